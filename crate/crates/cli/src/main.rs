use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

mod analyze;
mod config;
mod standings;
mod trees;

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "pawnloss",
    version,
    about = "Score chess games by engine-measured move quality"
)]
struct Cli {
    /// TOML file with defaults for any flag; flags on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Annotate every move of one or more PGN files with engine pawn losses.
    Analyze(AnalyzeArgs),
    /// Add game scores to an annotated report.
    Score(ScoreArgs),
    /// Build standings from one or more annotated reports.
    Rank(RankArgs),
    /// Check a game tree for single-deviation manipulations.
    VerifyTsp(VerifyArgs),
    /// Compare a fast-tiebreak rule with the TPLV rule on the bundled draw-offer model.
    DemoManipulation(DemoArgs),
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// PGN files, read in order.
    #[arg(required = true)]
    pub pgn: Vec<PathBuf>,
    /// UCI engine executable.
    #[arg(long, conflicts_with = "mock", value_name = "PATH")]
    pub engine: Option<PathBuf>,
    /// Extra argument passed to the engine executable.
    #[arg(long = "engine-arg", value_name = "ARG", allow_hyphen_values = true)]
    pub engine_args: Vec<String>,
    /// Recorded-evaluation table used in place of an engine.
    #[arg(long, value_name = "PATH")]
    pub mock: Option<PathBuf>,
    /// Search depth per position [default: 20].
    #[arg(long, conflicts_with = "movetime")]
    pub depth: Option<u32>,
    /// Search time per position in milliseconds.
    #[arg(long, value_name = "MS")]
    pub movetime: Option<u64>,
    /// UCI option sent before analysis.
    #[arg(long = "option", value_name = "NAME=VALUE")]
    pub options: Vec<String>,
    /// Pawn value of a forced mate.
    #[arg(long, value_name = "PAWNS")]
    pub mate_cap: Option<f64>,
    /// Engine sessions run in parallel.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file; stdout when absent or `-`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report format [default: json].
    #[arg(long)]
    pub format: Option<Format>,
    /// Also write one CSV row per annotation.
    #[arg(long, value_name = "PATH")]
    pub moves_csv: Option<PathBuf>,
    /// Record a draw offer after ply PLY of game GAME (both 1-based).
    #[arg(long = "draw-offer", value_name = "GAME:PLY")]
    pub draw_offers: Vec<String>,
    /// Query ply PLY's positions a second time and record both values.
    #[arg(long = "reeval", value_name = "PLY")]
    pub reeval: Vec<usize>,
    /// Leave the first N plies out of the totals.
    #[arg(long, value_name = "N")]
    pub skip_plies: Option<usize>,
    /// Charge the accepting player for an accepted draw offer.
    #[arg(long)]
    pub charge_acceptance: bool,
    /// Charge draw offers that were declined.
    #[arg(long)]
    pub charge_declined_offers: bool,
}

#[derive(Args)]
pub struct RuleArgs {
    /// Scoring rule [default: def4].
    #[arg(long)]
    pub rule: Option<RuleName>,
    /// Relative TPLV gap below which the tiebreak is shared.
    #[arg(long, value_name = "FRACTION")]
    pub threshold: Option<f64>,
    /// Tiebreak comparison [default: exact, or relative when --threshold is set].
    #[arg(long)]
    pub threshold_mode: Option<ThresholdModeName>,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Report written by `analyze`.
    pub report: PathBuf,
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Output file; stdout when absent or `-`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report format [default: json].
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Args)]
pub struct RankArgs {
    /// Reports written by `analyze` or `score`.
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    /// Player who keeps the place in a tie nothing else resolves.
    #[arg(long, value_name = "NAME")]
    pub champion: Option<String>,
    /// TPLV tiebreak between equal raw scores [default: cumulative].
    #[arg(long)]
    pub tplv_key: Option<TplvKeyName>,
    /// Rank only these players (repeatable). Defaults to everyone.
    #[arg(long = "player", value_name = "NAME")]
    pub players: Vec<String>,
    /// Output file; stdout when absent or `-`.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report format [default: csv].
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Tree fixture (JSON).
    #[arg(required_unless_present = "random", conflicts_with = "random")]
    pub tree: Option<PathBuf>,
    /// Generate a complete tree instead of reading one.
    #[arg(long, num_args = 3, value_names = ["DEPTH", "BRANCHING", "SEED"])]
    pub random: Option<Vec<u64>>,
    /// Players in a generated tree.
    #[arg(long, default_value_t = 2)]
    pub players: usize,
    /// Mechanism whose scores are checked.
    #[arg(long, default_value = "tplv")]
    pub mechanism: MechanismName,
    /// Give up after this many plays.
    #[arg(long, default_value_t = pawnloss::game::DEFAULT_MAX_PLAYS)]
    pub max_plays: usize,
    /// Print the verdict as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args)]
pub struct DemoArgs {
    /// Perturb the model's valuations with noise drawn from this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise amplitude in pawns when a seed is given.
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    /// Mechanism to run; `both` contrasts the two.
    #[arg(long, default_value = "both")]
    pub mechanism: DemoMechanism,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

impl From<Format> for pawnloss::report::ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => Self::Csv,
            Format::Json => Self::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    Def4,
    Norway,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdModeName {
    Exact,
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TplvKeyName {
    Cumulative,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismName {
    Tplv,
    FastchessDemo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoMechanism {
    Both,
    Tplv,
    FastchessDemo,
}

/// An error that exits with a specific status.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl std::error::Error for Coded {}

pub fn coded(code: u8, error: impl Into<anyhow::Error>) -> anyhow::Error {
    Coded {
        code,
        error: error.into(),
    }
    .into()
}

/// Writes `text` to `out`, or to stdout when no path (or `-`) is given.
pub fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) if p != Path::new("-") => {
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Analyze(a) => analyze::run(a, &file),
        Command::Score(a) => standings::score(a, &file),
        Command::Rank(a) => standings::rank(a, &file),
        Command::VerifyTsp(a) => trees::verify(a),
        Command::DemoManipulation(a) => trees::demo(a, &file),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = e.downcast_ref::<Coded>().map_or(1, |c| c.code);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(rel: &str) -> String {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../fixtures")
            .join(rel)
            .display()
            .to_string()
    }

    fn exec(args: &[&str]) -> u8 {
        let cli =
            Cli::try_parse_from(std::iter::once("pawnloss").chain(args.iter().copied())).unwrap();
        match run(cli) {
            Ok(code) => code,
            Err(e) => e.downcast_ref::<Coded>().map_or(1, |c| c.code),
        }
    }

    #[test]
    fn reports_do_not_depend_on_job_count() {
        let dir = tempfile::tempdir().unwrap();
        let (pgn, table) = (
            fixture("krush-yu/championship.pgn"),
            fixture("krush-yu/championship.table"),
        );
        let mut outputs = Vec::new();
        for jobs in ["1", "4", "4"] {
            let out = dir.path().join(format!("r{}.json", outputs.len()));
            let out_s = out.display().to_string();
            assert_eq!(
                exec(&["analyze", &pgn, "--mock", &table, "--jobs", jobs, "--out", &out_s]),
                0
            );
            outputs.push(std::fs::read(&out).unwrap());
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn config_file_supplies_engine_and_rule() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(
            &cfg,
            format!(
                "mock = {:?}\ndepth = 20\nrule = \"norway\"\n",
                fixture("topalov/topalov.table")
            ),
        )
        .unwrap();
        let cfg = cfg.display().to_string();
        let report = dir.path().join("a.json").display().to_string();
        let scored = dir.path().join("s.json").display().to_string();
        assert_eq!(
            exec(&[
                "--config",
                &cfg,
                "analyze",
                &fixture("topalov/topalov.pgn"),
                "--out",
                &report
            ]),
            0
        );
        assert_eq!(
            exec(&["--config", &cfg, "score", &report, "--out", &scored]),
            0
        );
        let r = pawnloss::report::parse_report(&std::fs::read_to_string(&scored).unwrap()).unwrap();
        let s = r.games[0].score.as_ref().unwrap();
        assert_eq!((s.score_white, s.score_black), (1.5, 1.0));
        assert!(r.engine.unwrap().settings.contains("mock=topalov.table"));
    }

    #[test]
    fn injected_offer_is_charged_and_moves_csv_written() {
        let dir = tempfile::tempdir().unwrap();
        let pgn = dir.path().join("g.pgn");
        // The fixture without its offer comment.
        std::fs::write(
            &pgn,
            std::fs::read_to_string(fixture("game12/game12.pgn"))
                .unwrap()
                .replace("{draw offered}", ""),
        )
        .unwrap();
        let pgn = pgn.display().to_string();
        let table = fixture("game12/game12.table");
        let report = dir.path().join("a.json");
        let moves = dir.path().join("m.csv");
        let (report_s, moves_s) = (report.display().to_string(), moves.display().to_string());
        assert_eq!(
            exec(&["analyze", &pgn, "--mock", &table, "--out", &report_s]),
            0
        );
        let plain =
            pawnloss::report::parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert!((plain.games[0].tplv_black - 5.2).abs() < 1e-9);
        let args = [
            "analyze",
            &pgn,
            "--mock",
            &table,
            "--draw-offer",
            "1:124",
            "--out",
            &report_s,
            "--moves-csv",
            &moves_s,
        ];
        assert_eq!(exec(&args), 0);
        let offered =
            pawnloss::report::parse_report(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert!((offered.games[0].tplv_black - 6.2).abs() < 1e-9);
        let csv = std::fs::read_to_string(&moves).unwrap();
        assert_eq!(csv.lines().count(), 1 + 125);
        assert_eq!(
            exec(&[
                "analyze",
                &pgn,
                "--mock",
                &table,
                "--draw-offer",
                "2:4",
                "--out",
                &report_s
            ]),
            1
        );
    }

    #[test]
    fn engine_failure_exits_two_with_partial_report() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("a.json");
        let out_s = out.display().to_string();
        let script = fixture("engines/crash.sh");
        let args = [
            "analyze",
            &fixture("engines/replay.pgn"),
            "--engine",
            "sh",
            "--engine-arg",
            &script,
            "--out",
            &out_s,
        ];
        assert_eq!(exec(&args), 2);
        let r = pawnloss::report::parse_report(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!(r.games[0].incomplete.is_some());
        assert_eq!(r.engine.unwrap().name, "Crasher");
    }

    #[test]
    fn unfinished_games_are_skipped_by_score() {
        let dir = tempfile::tempdir().unwrap();
        let report = dir.path().join("a.json").display().to_string();
        let scored = dir.path().join("s.json").display().to_string();
        let script = fixture("engines/replay.sh");
        let args = [
            "analyze",
            &fixture("engines/replay.pgn"),
            "--engine",
            "sh",
            "--engine-arg",
            &script,
            "--depth",
            "2",
            "--out",
            &report,
        ];
        assert_eq!(exec(&args), 0);
        assert_eq!(exec(&["score", &report, "--out", &scored]), 0);
        let r = pawnloss::report::parse_report(&std::fs::read_to_string(&scored).unwrap()).unwrap();
        assert!(r.games[0].score.is_none());
        assert!(r.warnings[0].contains("unfinished"));
    }

    #[test]
    fn rank_needs_players() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("e.pgn");
        std::fs::write(&empty, "").unwrap();
        let report = dir.path().join("e.json").display().to_string();
        let args = [
            "analyze",
            empty.to_str().unwrap(),
            "--mock",
            &fixture("game12/game12.table"),
            "--out",
            &report,
        ];
        assert_eq!(exec(&args), 0);
        assert_eq!(exec(&["rank", &report]), 1);
        let single = dir.path().join("one.json").display().to_string();
        let args = [
            "analyze",
            &fixture("game12/game12.pgn"),
            "--mock",
            &fixture("game12/game12.table"),
            "--out",
            &single,
        ];
        assert_eq!(exec(&args), 0);
        let standings = dir.path().join("st.json");
        let st = standings.display().to_string();
        assert_eq!(
            exec(&[
                "rank",
                &single,
                "--player",
                "Carlsen, Magnus",
                "--format",
                "json",
                "--out",
                &st
            ]),
            0
        );
        let r =
            pawnloss::report::parse_report(&std::fs::read_to_string(&standings).unwrap()).unwrap();
        assert_eq!((r.standings.len(), r.standings[0].rank), (1, 1));
    }

    #[test]
    fn usage_errors_are_reported_by_clap() {
        assert!(Cli::try_parse_from(["pawnloss", "analyze"]).is_err());
        assert!(Cli::try_parse_from(["pawnloss", "verify-tsp"]).is_err());
        assert!(Cli::try_parse_from([
            "pawnloss",
            "analyze",
            "x.pgn",
            "--depth",
            "3",
            "--movetime",
            "10"
        ])
        .is_err());
    }
}
