//! Table-driven stand-in for a UCI engine.
//!
//! A table is a text file with one entry per line:
//!
//! ```text
//! # comment
//! <FEN> | <bestmove> | cp <centipawns>
//! <FEN> | <bestmove> | mate <moves> | depth <d>
//! ```
//!
//! Scores are from the side to move's point of view, as UCI reports them.
//! The optional fourth field restricts an entry to one search depth; a
//! lookup prefers an exact depth match and falls back to the entry with no
//! depth. Positions are matched on placement, side, castling and en passant.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::score::{EngineScore, ScoreKind};
use super::session::{SearchLimit, Transport};
use super::EngineError;
use crate::board::{self, position_key, Board};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MockEntry {
    pub best_move: String,
    pub score: EngineScore,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MockTable {
    entries: HashMap<(String, Option<u32>), MockEntry>,
    digest: String,
}

impl MockTable {
    pub fn parse(text: &str) -> Result<Self, EngineError> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| EngineError::MockTable {
                line: lineno,
                reason,
            };
            let fields: Vec<&str> = line.split('|').map(str::trim).collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(err(
                    "expected `FEN | bestmove | score-kind value [| depth d]`".into(),
                ));
            }
            let board = board::parse_fen(fields[0]).map_err(|e| err(e.to_string()))?;
            let best = board::parse_uci_move(&board, fields[1]).map_err(|e| err(e.to_string()))?;
            let score = parse_score_field(fields[2]).map_err(err)?;
            let depth = match fields.get(3) {
                None => None,
                Some(f) => {
                    let d = f
                        .strip_prefix("depth")
                        .map(str::trim)
                        .and_then(|d| d.parse::<u32>().ok())
                        .ok_or_else(|| err(format!("bad depth field `{f}`")))?;
                    Some(d)
                }
            };
            let key = (position_key(&board), depth);
            if entries.contains_key(&key) {
                return Err(err("duplicate position".into()));
            }
            entries.insert(
                key,
                MockEntry {
                    best_move: board::uci_text(best),
                    score,
                },
            );
        }
        let digest = Sha256::digest(text.as_bytes())
            .iter()
            .fold(String::new(), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            });
        Ok(Self { entries, digest })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// SHA-256 of the table text, hex encoded.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn lookup(&self, board: &Board, depth: Option<u32>) -> Option<&MockEntry> {
        let key = position_key(board);
        depth
            .and_then(|d| self.entries.get(&(key.clone(), Some(d))))
            .or_else(|| self.entries.get(&(key, None)))
    }
}

fn parse_score_field(field: &str) -> Result<EngineScore, String> {
    let mut parts = field.split_whitespace();
    let kind = match parts.next() {
        Some("cp") => ScoreKind::Centipawns,
        Some("mate") => ScoreKind::Mate,
        other => return Err(format!("bad score kind `{}`", other.unwrap_or(""))),
    };
    let value: i32 = parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| format!("bad score value in `{field}`"))?;
    if parts.next().is_some() {
        return Err(format!("trailing text in score `{field}`"));
    }
    match kind {
        ScoreKind::Centipawns => Ok(EngineScore::cp(value)),
        ScoreKind::Mate => {
            EngineScore::mate(value).ok_or_else(|| "mate 0 is not a score".to_string())
        }
    }
}

pub const MOCK_NAME: &str = "pawnloss-mock";

/// Answers UCI commands from a [`MockTable`], in process.
#[derive(Debug)]
pub struct MockEngine {
    table: std::sync::Arc<MockTable>,
    position: Option<Board>,
    /// Last `position` arguments, so a command that only appends moves
    /// replays just the new ones.
    last: Vec<String>,
    pending: VecDeque<String>,
}

impl MockEngine {
    pub fn new(table: std::sync::Arc<MockTable>) -> Self {
        Self {
            table,
            position: None,
            last: Vec::new(),
            pending: VecDeque::new(),
        }
    }

    fn handle(&mut self, command: &str) {
        let mut tokens = command.split_whitespace();
        match tokens.next() {
            Some("uci") => {
                self.pending.push_back(format!("id name {MOCK_NAME}"));
                self.pending.push_back("id author pawnloss".into());
                self.pending
                    .push_back("option name Hash type spin default 16 min 1 max 4096".into());
                self.pending
                    .push_back("option name Threads type spin default 1 min 1 max 256".into());
                self.pending.push_back("uciok".into());
            }
            Some("isready") => self.pending.push_back("readyok".into()),
            Some("position") => {
                let args: Vec<String> = tokens.map(str::to_string).collect();
                self.position = match self.position {
                    Some(b)
                        if args.len() >= self.last.len()
                            && args.starts_with(&self.last)
                            && !self.last.is_empty() =>
                    {
                        let rest = &args[self.last.len()..];
                        let rest = if self.last.iter().any(|t| t == "moves") {
                            rest
                        } else {
                            rest.strip_prefix(&["moves".to_string()][..])
                                .unwrap_or(rest)
                        };
                        apply_moves(b, rest.iter().map(String::as_str))
                    }
                    _ => replay_position(args.iter().map(String::as_str).collect()),
                };
                self.last = if self.position.is_some() {
                    args
                } else {
                    Vec::new()
                };
            }
            Some("go") => {
                let args: Vec<&str> = tokens.collect();
                let limit = SearchLimit::parse_go_args(&args);
                let depth = match limit {
                    Some(SearchLimit::Depth(d)) => Some(d),
                    _ => None,
                };
                let entry = self
                    .position
                    .as_ref()
                    .and_then(|b| self.table.lookup(b, depth));
                match entry {
                    Some(e) => {
                        self.pending.push_back(format!(
                            "info depth {} score {} pv {}",
                            depth.unwrap_or(1),
                            e.score,
                            e.best_move
                        ));
                        self.pending.push_back(format!("bestmove {}", e.best_move));
                    }
                    None => {
                        self.pending
                            .push_back("info string position not in mock table".into());
                        self.pending.push_back("bestmove (none)".into());
                    }
                }
            }
            // ucinewgame, setoption, stop, quit: nothing to say.
            _ => {}
        }
    }
}

fn replay_position(tokens: Vec<&str>) -> Option<Board> {
    let (board, rest) = match tokens.first() {
        Some(&"startpos") => (board::parse_fen(board::START_FEN).ok()?, &tokens[1..]),
        Some(&"fen") => {
            let end = tokens
                .iter()
                .position(|t| *t == "moves")
                .unwrap_or(tokens.len());
            (
                board::parse_fen(&tokens[1..end].join(" ")).ok()?,
                &tokens[end..],
            )
        }
        _ => return None,
    };
    match rest.split_first() {
        Some((&"moves", moves)) => apply_moves(board, moves.iter().copied()),
        Some(_) => None,
        None => Some(board),
    }
}

fn apply_moves<'a>(mut board: Board, moves: impl Iterator<Item = &'a str>) -> Option<Board> {
    for m in moves {
        let mv = board::parse_uci_move(&board, m).ok()?;
        board = board.make_move_new(mv);
    }
    Some(board)
}

impl Transport for MockEngine {
    fn send(&mut self, line: &str) -> Result<(), EngineError> {
        self.handle(line);
        Ok(())
    }

    fn recv(&mut self, _timeout: std::time::Duration) -> Result<String, EngineError> {
        self.pending.pop_front().ok_or(EngineError::Timeout)
    }
}
