use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use pawnloss::analysis::{annotate_game, AnalysisConfig, AnnotatedGame};
use pawnloss::engine::{EngineConfig, EngineSession, EngineSource, MockTable, SearchLimit};
use pawnloss::pgn::{parse_pgn, GameRecord};
use pawnloss::report::{emit_moves_csv, emit_report, Report};

use crate::config::FileConfig;
use crate::{coded, read_text, write_output, AnalyzeArgs, Format};

const DEFAULT_DEPTH: u32 = 20;

pub fn run(args: AnalyzeArgs, file: &FileConfig) -> Result<u8> {
    let engine = engine_config(&args, file)?;
    let analysis = AnalysisConfig {
        skip_plies: args.skip_plies.or(file.skip_plies).unwrap_or(0),
        charge_acceptance: args.charge_acceptance || file.charge_acceptance.unwrap_or(false),
        charge_declined_offers: args.charge_declined_offers
            || file.charge_declined_offers.unwrap_or(false),
        reeval_plies: args.reeval.clone(),
    };

    let mut games = Vec::new();
    for path in &args.pgn {
        let text = read_text(path)?;
        let parsed = parse_pgn(&text).map_err(|e| coded(2, anyhow!("{}:{e}", path.display())))?;
        games.extend(parsed);
    }
    for spec in &args.draw_offers {
        let (game, ply) = parse_offer(spec)?;
        let count = games.len();
        let record = games
            .get_mut(game - 1)
            .ok_or_else(|| anyhow!("--draw-offer {spec}: only {count} games were read"))?;
        record
            .add_draw_offer(ply)
            .map_err(|e| anyhow!("--draw-offer {spec}: {e}"))?;
    }

    let jobs = args.jobs.or(file.jobs).unwrap_or(1);
    if jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let (annotated, fingerprint) = annotate_all(&games, &engine, &analysis, jobs)?;

    let mut report = Report::from_games(&annotated);
    report.engine = Some(fingerprint);
    let format = args.format.or(file.format).unwrap_or(Format::Json);
    write_output(args.out.as_deref(), &emit_report(&report, format.into()))?;
    if let Some(p) = &args.moves_csv {
        write_output(Some(p), &emit_moves_csv(&report))?;
    }

    let failed: Vec<String> = annotated
        .iter()
        .enumerate()
        .filter_map(|(i, g)| {
            g.incomplete.as_ref().map(|inc| {
                format!(
                    "game {} ({}): position {}: {}",
                    i + 1,
                    g.game.label(),
                    inc.position,
                    inc.error
                )
            })
        })
        .collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        for f in &failed {
            eprintln!("error: {f}");
        }
        Err(coded(
            2,
            anyhow!(
                "{} of {} games could not be fully annotated",
                failed.len(),
                annotated.len()
            ),
        ))
    }
}

fn parse_offer(spec: &str) -> Result<(usize, usize)> {
    let parse = || -> Option<(usize, usize)> {
        let (g, p) = spec.split_once(':')?;
        Some((g.trim().parse().ok()?, p.trim().parse().ok()?))
    };
    match parse() {
        Some((g, p)) if g >= 1 => Ok((g, p)),
        _ => bail!("--draw-offer expects GAME:PLY with a 1-based game number, got `{spec}`"),
    }
}

fn engine_config(args: &AnalyzeArgs, file: &FileConfig) -> Result<EngineConfig> {
    let limit = match (args.depth, args.movetime) {
        (Some(d), _) => SearchLimit::Depth(d),
        (None, Some(ms)) => SearchLimit::MoveTime(ms),
        (None, None) => match (file.depth, file.movetime) {
            (Some(_), Some(_)) => bail!("config file sets both depth and movetime"),
            (_, Some(ms)) => SearchLimit::MoveTime(ms),
            (d, None) => SearchLimit::Depth(d.unwrap_or(DEFAULT_DEPTH)),
        },
    };
    let source = match (&args.engine, &args.mock) {
        (Some(path), _) => executable(path, &args.engine_args, file),
        (None, Some(table)) => mock(table)?,
        (None, None) => match (&file.engine, &file.mock) {
            (Some(_), Some(_)) => bail!("config file sets both engine and mock"),
            (Some(path), None) => executable(path, &args.engine_args, file),
            (None, Some(table)) => mock(table)?,
            (None, None) => bail!("analyze needs --engine <path> or --mock <table>"),
        },
    };
    let mut cfg = EngineConfig::new(source, limit);
    cfg.options = file.options.clone();
    for o in &args.options {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| anyhow!("--option expects NAME=VALUE, got `{o}`"))?;
        cfg.options
            .insert(k.trim().to_string(), v.trim().to_string());
    }
    if let Some(cap) = args.mate_cap.or(file.mate_cap) {
        cfg.mate_cap = cap;
    }
    if let Some(ms) = file.handshake_timeout_ms {
        cfg.handshake_timeout = Duration::from_millis(ms);
    }
    if let Some(ms) = file.search_timeout_ms {
        cfg.search_timeout = Duration::from_millis(ms);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn executable(path: &Path, flag_args: &[String], file: &FileConfig) -> EngineSource {
    let args = if flag_args.is_empty() {
        file.engine_args.clone()
    } else {
        flag_args.to_vec()
    };
    EngineSource::Executable {
        path: path.to_path_buf(),
        args,
    }
}

fn mock(path: &Path) -> Result<EngineSource> {
    let table = MockTable::parse(&read_text(path)?)
        .with_context(|| format!("mock table {}", path.display()))?;
    // The file name, not the full path, so reports do not depend on where
    // the table happens to live; the table digest pins its contents.
    let id = path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    );
    Ok(EngineSource::Mock {
        id,
        table: table.into(),
    })
}

/// Annotates `games` over a pool of `jobs` sessions. Results come back in
/// input order whatever the scheduling.
fn annotate_all(
    games: &[GameRecord],
    engine: &EngineConfig,
    analysis: &AnalysisConfig,
    jobs: usize,
) -> Result<(Vec<AnnotatedGame>, pawnloss::engine::EngineFingerprint)> {
    let first = EngineSession::start(engine).context("starting engine")?;
    let fingerprint = first.fingerprint().clone();
    let mut sessions = vec![first];
    for _ in 1..jobs.min(games.len()) {
        let s = EngineSession::start(engine).context("starting engine")?;
        if *s.fingerprint() != fingerprint {
            bail!("engine sessions identify differently; refusing to mix them in one report");
        }
        sessions.push(s);
    }

    let next = AtomicUsize::new(0);
    let mut results: Vec<(usize, AnnotatedGame)> = std::thread::scope(|scope| {
        let workers: Vec<_> = sessions
            .into_iter()
            .map(|mut session| {
                let next = &next;
                scope.spawn(move || {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(game) = games.get(i) else { break };
                        done.push((i, annotate_game(game, &mut session, analysis)));
                    }
                    done
                })
            })
            .collect();
        workers
            .into_iter()
            .flat_map(|w| w.join().expect("annotation worker panicked"))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    Ok((results.into_iter().map(|(_, g)| g).collect(), fingerprint))
}
