//! The subset of the UCI text protocol this crate speaks.

use super::score::{EngineScore, Perspective, ScoreKind};
use super::EngineError;

/// One parsed line of engine output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineLine {
    IdName(String),
    IdAuthor(String),
    UciOk,
    ReadyOk,
    Option {
        name: String,
    },
    Info(Info),
    BestMove {
        mv: Option<String>,
        ponder: Option<String>,
    },
    Other(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Info {
    pub depth: Option<u32>,
    pub multipv: Option<u32>,
    pub score: Option<EngineScore>,
    /// True for `lowerbound` / `upperbound` scores.
    pub bound: bool,
    pub pv: Vec<String>,
    pub string: Option<String>,
}

// Keywords that introduce a field inside an `info` line.
const INFO_KEYWORDS: &[&str] = &[
    "depth",
    "seldepth",
    "time",
    "nodes",
    "pv",
    "multipv",
    "score",
    "currmove",
    "currmovenumber",
    "hashfull",
    "nps",
    "tbhits",
    "sbhits",
    "cpuload",
    "string",
    "refutation",
    "currline",
    "wdl",
];

fn malformed(line: &str, what: &str) -> EngineError {
    EngineError::Malformed {
        line: line.to_string(),
        reason: what.to_string(),
    }
}

/// Parses a single line of engine output.
///
/// Unknown lines become [`EngineLine::Other`]; known lines with bad
/// payloads are errors.
pub fn parse_engine_line(line: &str) -> Result<EngineLine, EngineError> {
    let trimmed = line.trim();
    let mut tokens = trimmed.split_whitespace();
    let Some(head) = tokens.next() else {
        return Ok(EngineLine::Other(String::new()));
    };
    match head {
        "uciok" => Ok(EngineLine::UciOk),
        "readyok" => Ok(EngineLine::ReadyOk),
        "id" => {
            let key = tokens.next();
            let rest = tokens.collect::<Vec<_>>().join(" ");
            match key {
                Some("name") => Ok(EngineLine::IdName(rest)),
                Some("author") => Ok(EngineLine::IdAuthor(rest)),
                _ => Ok(EngineLine::Other(trimmed.to_string())),
            }
        }
        "option" => {
            if tokens.next() != Some("name") {
                return Err(malformed(line, "option line without a name"));
            }
            let name: Vec<&str> = tokens.take_while(|t| *t != "type").collect();
            if name.is_empty() {
                return Err(malformed(line, "empty option name"));
            }
            Ok(EngineLine::Option {
                name: name.join(" "),
            })
        }
        "bestmove" => {
            let mv = tokens
                .next()
                .ok_or_else(|| malformed(line, "bestmove without a move"))?;
            let ponder = match tokens.next() {
                Some("ponder") => tokens.next().map(str::to_string),
                _ => None,
            };
            let mv = match mv {
                "(none)" | "0000" => None,
                m => Some(m.to_string()),
            };
            Ok(EngineLine::BestMove { mv, ponder })
        }
        "info" => parse_info(line, tokens.collect()).map(EngineLine::Info),
        _ => Ok(EngineLine::Other(trimmed.to_string())),
    }
}

fn parse_info(line: &str, tokens: Vec<&str>) -> Result<Info, EngineError> {
    let mut info = Info::default();
    let mut i = 0;
    let int = |tok: Option<&&str>, what: &str| -> Result<i64, EngineError> {
        tok.and_then(|t| t.parse::<i64>().ok())
            .ok_or_else(|| malformed(line, &format!("bad {what} value")))
    };
    while i < tokens.len() {
        match tokens[i] {
            "depth" => {
                info.depth = Some(
                    int(tokens.get(i + 1), "depth")?
                        .try_into()
                        .map_err(|_| malformed(line, "bad depth value"))?,
                );
                i += 2;
            }
            "multipv" => {
                info.multipv = Some(
                    int(tokens.get(i + 1), "multipv")?
                        .try_into()
                        .map_err(|_| malformed(line, "bad multipv value"))?,
                );
                i += 2;
            }
            "score" => {
                let kind = match tokens.get(i + 1).copied() {
                    Some("cp") => ScoreKind::Centipawns,
                    Some("mate") => ScoreKind::Mate,
                    _ => return Err(malformed(line, "score must be `cp` or `mate`")),
                };
                let value: i32 = int(tokens.get(i + 2), "score")?
                    .try_into()
                    .map_err(|_| malformed(line, "score out of range"))?;
                if kind == ScoreKind::Mate && value == 0 {
                    return Err(malformed(line, "mate 0"));
                }
                info.score = Some(EngineScore {
                    kind,
                    value,
                    perspective: Perspective::SideToMove,
                });
                i += 3;
                while let Some(&t) = tokens.get(i) {
                    if t == "lowerbound" || t == "upperbound" {
                        info.bound = true;
                        i += 1;
                    } else {
                        break;
                    }
                }
            }
            "pv" => {
                let end = tokens[i + 1..]
                    .iter()
                    .position(|t| INFO_KEYWORDS.contains(t))
                    .map_or(tokens.len(), |p| i + 1 + p);
                info.pv = tokens[i + 1..end].iter().map(|s| s.to_string()).collect();
                i = end;
            }
            "string" => {
                info.string = Some(tokens[i + 1..].join(" "));
                break;
            }
            _ => i += 1,
        }
    }
    Ok(info)
}

pub fn setoption_command(name: &str, value: &str) -> String {
    format!("setoption name {name} value {value}")
}
