//! Analysis and standings reports.
//!
//! JSON is the lossless format: [`parse_report`] of [`emit_report`] output
//! gives back an identical [`Report`]. CSV is a flat summary with TPLVs
//! rounded to two decimals: one row per game for [`ReportKind::Games`], one
//! row per player for [`ReportKind::Standings`].
//!
//! JSON layout (all keys always present, `null` where absent):
//!
//! ```text
//! { "version": 1, "kind": "games" | "standings",
//!   "engine": { "name", "author", "settings", "hash" } | null,
//!   "rule": { "variant", "threshold_mode", "threshold_value", "absolute_epsilon" } | null,
//!   "games": [ { "index", "headers", "white", "black", "result", "termination",
//!                "plies", "draw_offers", "tplv_white", "tplv_black",
//!                "annotations": [ { "ply", "mover", "kind", "played", "best_move",
//!                                   "value_best", "value_played", "pawn_loss" } ],
//!                "positions", "reevaluations", "incomplete", "score" } ],
//!   "standings": [ { "rank", "player", "raw_score", "games", "cumulative_tplv",
//!                    "average_tplv", "average_cpl", "tiebreak_used" } ],
//!   "warnings": [ string ] }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    AnnotatedGame, GameTotals, Incomplete, MoveAnnotation, PositionEval, Reevaluation,
    SUM_TOLERANCE,
};
use crate::board::Color;
use crate::engine::EngineFingerprint;
use crate::pgn::{DrawOffer, GameResult, Termination};
use crate::scoring::{GameScore, ScoringRule};
use crate::tournament::Standing;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported report version {0}")]
    Version(u32),
    #[error("game {game}: {reason}")]
    Inconsistent { game: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    #[default]
    Games,
    Standings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameEntry {
    /// 0-based position of the game in its source.
    pub index: usize,
    pub headers: BTreeMap<String, String>,
    pub white: String,
    pub black: String,
    pub result: GameResult,
    pub termination: Termination,
    pub plies: usize,
    pub draw_offers: Vec<DrawOffer>,
    pub tplv_white: f64,
    pub tplv_black: f64,
    pub annotations: Vec<MoveAnnotation>,
    pub positions: Vec<PositionEval>,
    pub reevaluations: Vec<Reevaluation>,
    pub incomplete: Option<Incomplete>,
    pub score: Option<GameScore>,
}

impl GameEntry {
    pub fn from_annotated(index: usize, a: &AnnotatedGame) -> Self {
        Self {
            index,
            headers: a.game.headers.clone(),
            white: a.game.player_name(Color::White).into(),
            black: a.game.player_name(Color::Black).into(),
            result: a.game.result,
            termination: a.game.termination,
            plies: a.game.ply_count(),
            draw_offers: a.game.draw_offers.clone(),
            tplv_white: a.tplv_white,
            tplv_black: a.tplv_black,
            annotations: a.annotations.clone(),
            positions: a.positions.clone(),
            reevaluations: a.reevaluations.clone(),
            incomplete: a.incomplete.clone(),
            score: None,
        }
    }

    pub fn tplv(&self, c: Color) -> f64 {
        match c {
            Color::White => self.tplv_white,
            Color::Black => self.tplv_black,
        }
    }

    fn check(&self) -> Result<(), String> {
        for a in &self.annotations {
            let expect = (a.value_best - a.value_played).max(0.0);
            if (a.pawn_loss - expect).abs() > SUM_TOLERANCE || a.pawn_loss < 0.0 {
                return Err(format!(
                    "ply {} pawn loss {} does not match its values",
                    a.ply, a.pawn_loss
                ));
            }
        }
        for c in [Color::White, Color::Black] {
            let sum: f64 = self
                .annotations
                .iter()
                .filter(|a| a.mover == c)
                .map(|a| a.pawn_loss)
                .sum();
            if (sum - self.tplv(c)).abs() > SUM_TOLERANCE {
                return Err(format!(
                    "{c} TPLV {} differs from its annotations ({sum})",
                    self.tplv(c)
                ));
            }
        }
        if let Some(s) = &self.score {
            if !(s.score_white.is_finite() && s.score_black.is_finite()) {
                return Err("non-finite score".into());
            }
            if self.result == GameResult::Unfinished {
                return Err("unfinished game carries a score".into());
            }
        }
        Ok(())
    }
}

impl GameTotals for GameEntry {
    fn label(&self) -> String {
        let mut s = format!("#{} {} - {}", self.index + 1, self.white, self.black);
        if let Some(r) = self.headers.get("Round") {
            s.push_str(&format!(" (round {r})"));
        }
        s
    }
    fn player(&self, c: Color) -> &str {
        match c {
            Color::White => &self.white,
            Color::Black => &self.black,
        }
    }
    fn total(&self, c: Color) -> f64 {
        self.tplv(c)
    }
    fn move_count(&self, c: Color) -> usize {
        self.annotations.iter().filter(|a| a.mover == c).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub version: u32,
    pub kind: ReportKind,
    pub engine: Option<EngineFingerprint>,
    pub rule: Option<ScoringRule>,
    pub games: Vec<GameEntry>,
    pub standings: Vec<Standing>,
    pub warnings: Vec<String>,
}

impl Default for Report {
    fn default() -> Self {
        Self {
            version: REPORT_VERSION,
            kind: ReportKind::Games,
            engine: None,
            rule: None,
            games: Vec::new(),
            standings: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

impl Report {
    pub fn from_games(games: &[AnnotatedGame]) -> Self {
        Self {
            engine: games.first().map(|g| g.fingerprint.clone()),
            games: games
                .iter()
                .enumerate()
                .map(|(i, g)| GameEntry::from_annotated(i, g))
                .collect(),
            ..Self::default()
        }
    }

    pub fn standings(standings: Vec<Standing>) -> Self {
        Self {
            kind: ReportKind::Standings,
            standings,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        if self.version != REPORT_VERSION {
            return Err(ReportError::Version(self.version));
        }
        for g in &self.games {
            g.check().map_err(|reason| ReportError::Inconsistent {
                game: g.index,
                reason,
            })?;
        }
        Ok(())
    }
}

pub fn parse_report(text: &str) -> Result<Report, ReportError> {
    let r: Report = serde_json::from_str(text)?;
    r.validate()?;
    Ok(r)
}

fn two(x: f64) -> String {
    format!("{x:.2}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn kebab<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

const GAME_COLUMNS: [&str; 16] = [
    "game",
    "white",
    "black",
    "event",
    "round",
    "result",
    "termination",
    "plies",
    "tplv_white",
    "tplv_black",
    "score_white",
    "score_black",
    "tiebreak_winner",
    "basis",
    "status",
    "engine",
];

const STANDING_COLUMNS: [&str; 8] = [
    "rank",
    "player",
    "raw_score",
    "games",
    "cumulative_tplv",
    "average_tplv",
    "average_cpl",
    "tiebreak_used",
];

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Renders `report`. Output depends only on the report's contents.
pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report is serializable");
            s.push('\n');
            s
        }
        ReportFormat::Csv => match report.kind {
            ReportKind::Games => {
                let engine = report
                    .engine
                    .as_ref()
                    .map(|e| e.name.clone())
                    .unwrap_or_default();
                let rows = report
                    .games
                    .iter()
                    .map(|g| {
                        let h = |k: &str| g.headers.get(k).cloned().unwrap_or_default();
                        vec![
                            (g.index + 1).to_string(),
                            g.white.clone(),
                            g.black.clone(),
                            h("Event"),
                            h("Round"),
                            g.result.token().to_string(),
                            kebab(&g.termination),
                            g.plies.to_string(),
                            two(g.tplv_white),
                            two(g.tplv_black),
                            opt(g.score.as_ref().map(|s| s.score_white)),
                            opt(g.score.as_ref().map(|s| s.score_black)),
                            opt(g.score.as_ref().and_then(|s| s.tiebreak_winner)),
                            g.score
                                .as_ref()
                                .map(|s| kebab(&s.basis))
                                .unwrap_or_default(),
                            if g.incomplete.is_some() {
                                "incomplete"
                            } else {
                                "complete"
                            }
                            .into(),
                            engine.clone(),
                        ]
                    })
                    .collect();
                csv_text(&GAME_COLUMNS, rows)
            }
            ReportKind::Standings => {
                let rows = report
                    .standings
                    .iter()
                    .map(|s| {
                        vec![
                            s.rank.to_string(),
                            s.player.clone(),
                            s.raw_score.to_string(),
                            s.games.to_string(),
                            two(s.cumulative_tplv),
                            two(s.average_tplv),
                            two(s.average_cpl),
                            kebab(&s.tiebreak_used),
                        ]
                    })
                    .collect();
                csv_text(&STANDING_COLUMNS, rows)
            }
        },
    }
}

/// One CSV row per annotation of every game.
pub fn emit_moves_csv(report: &Report) -> String {
    let header = [
        "game",
        "ply",
        "mover",
        "kind",
        "played",
        "best_move",
        "value_best",
        "value_played",
        "pawn_loss",
    ];
    let rows = report
        .games
        .iter()
        .flat_map(|g| {
            g.annotations.iter().map(move |a| {
                vec![
                    (g.index + 1).to_string(),
                    a.ply.to_string(),
                    a.mover.to_string(),
                    kebab(&a.kind),
                    a.played.clone(),
                    a.best_move.clone().unwrap_or_default(),
                    two(a.value_best),
                    two(a.value_played),
                    two(a.pawn_loss),
                ]
            })
        })
        .collect();
    csv_text(&header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::AnnotationKind;
    use crate::tournament::TiebreakUsed;

    fn ann(ply: usize, mover: Color, vb: f64, vp: f64) -> MoveAnnotation {
        MoveAnnotation {
            ply,
            mover,
            kind: AnnotationKind::Move,
            played: "e4".into(),
            best_move: Some("d4".into()),
            value_best: vb,
            value_played: vp,
            pawn_loss: (vb - vp).max(0.0),
        }
    }

    fn entry() -> GameEntry {
        let annotations = vec![
            ann(1, Color::White, 0.3, 0.1),
            ann(2, Color::Black, -0.1, -0.45),
        ];
        GameEntry {
            index: 0,
            headers: [("Event".to_string(), "Test, \"quoted\"".to_string())].into(),
            white: "W".into(),
            black: "B".into(),
            result: GameResult::Draw,
            termination: Termination::Normal,
            plies: 2,
            draw_offers: vec![],
            tplv_white: annotations[0].pawn_loss,
            tplv_black: annotations[1].pawn_loss,
            annotations,
            positions: vec![],
            reevaluations: vec![],
            incomplete: None,
            score: None,
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let r = Report {
            games: vec![entry()],
            ..Report::default()
        };
        let text = emit_report(&r, ReportFormat::Json);
        assert_eq!(parse_report(&text).unwrap(), r);
        assert_eq!(
            emit_report(&parse_report(&text).unwrap(), ReportFormat::Json),
            text
        );
    }

    #[test]
    fn csv_quotes_and_rounds() {
        let r = Report {
            games: vec![entry()],
            ..Report::default()
        };
        let csv = emit_report(&r, ReportFormat::Csv);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), GAME_COLUMNS.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "1,W,B,\"Test, \"\"quoted\"\"\",,1/2-1/2,normal,2,0.20,0.35,,,,,complete,"
        );
        assert!(emit_moves_csv(&r).contains("1,2,black,move,e4,d4,-0.10,-0.45,0.35"));
    }

    #[test]
    fn standings_csv() {
        let s = Standing {
            rank: 1,
            player: "Krush".into(),
            raw_score: 9.0,
            games: 13,
            cumulative_tplv: 159.21,
            average_tplv: 159.21 / 13.0,
            average_cpl: 20.0,
            tiebreak_used: TiebreakUsed::CumulativeTplv,
        };
        let csv = emit_report(&Report::standings(vec![s]), ReportFormat::Csv);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "1,Krush,9,13,159.21,12.25,20.00,cumulative-tplv"
        );
        let empty = emit_report(&Report::standings(vec![]), ReportFormat::Csv);
        assert_eq!(empty, format!("{}\n", STANDING_COLUMNS.join(",")));
    }

    #[test]
    fn inconsistent_reports_are_rejected() {
        let mut e = entry();
        e.tplv_black += 0.5;
        let text = emit_report(
            &Report {
                games: vec![e],
                ..Report::default()
            },
            ReportFormat::Json,
        );
        assert!(matches!(
            parse_report(&text),
            Err(ReportError::Inconsistent { .. })
        ));
        let mut e = entry();
        e.annotations[0].pawn_loss = 1.0;
        e.tplv_white = 1.0;
        let text = emit_report(
            &Report {
                games: vec![e],
                ..Report::default()
            },
            ReportFormat::Json,
        );
        assert!(matches!(
            parse_report(&text),
            Err(ReportError::Inconsistent { .. })
        ));
        assert!(parse_report("{}").is_err());
        let v = emit_report(
            &Report {
                version: 9,
                ..Report::default()
            },
            ReportFormat::Json,
        );
        assert!(matches!(parse_report(&v), Err(ReportError::Version(9))));
    }
}
