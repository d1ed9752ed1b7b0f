//! Acceptance suite: one PASS/FAIL line per criterion, every tolerance
//! pinned below. Exits nonzero if any line fails.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use pawnloss::analysis::{
    self, annotate_game, AnalysisConfig, AnnotatedGame, AnnotationKind, GameTotals,
};
use pawnloss::board;
use pawnloss::engine::{EngineConfig, EngineSession, MockTable, SearchLimit};
use pawnloss::game::{
    check_tsp_mechanism, check_tsp_play, generate_random_tree, modify_play, scoring_rule_f, toy,
    Play, TplvRule, DEFAULT_MAX_PLAYS,
};
use pawnloss::pgn::{parse_pgn, GameResult, Termination};
use pawnloss::report::{emit_report, parse_report, Report, ReportFormat};
use pawnloss::scoring::{score_game, ScoringRule};
use pawnloss::tournament::{rank_players, PlayerEntry, RankOptions, TiebreakUsed};
use pawnloss::Color;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Published values are given to two decimals.
const PUBLISHED_TOL: f64 = 0.005;
/// Sums of integer centipawns are exact up to float rounding.
const SUM_TOL: f64 = 1e-9;
/// Best-response substitution slack.
const TSP_TOL: f64 = 1e-9;
const MOCK_BUDGET: Duration = Duration::from_secs(1);
const PROPERTY_BUDGET: Duration = Duration::from_secs(60);
const THEOREM_TRIPLES: usize = 1000;
const SCORE_CASES: usize = 10_000;
const SEED: u64 = 20181128;

const KRUSH: &str = "Krush, Irina";
const YU: &str = "Yu, Jennifer";

type Outcome = Result<String, String>;
/// Id, description, check.
type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn annotate(pgn: &str, table: &str) -> Result<Vec<AnnotatedGame>, String> {
    let games = parse_pgn(&read(pgn)).map_err(|e| e.to_string())?;
    let table = MockTable::parse(&read(table)).map_err(|e| e.to_string())?;
    let cfg = EngineConfig::mock("acceptance", table, SearchLimit::Depth(20));
    let mut s = EngineSession::start(&cfg).map_err(|e| e.to_string())?;
    let out: Vec<AnnotatedGame> = games
        .iter()
        .map(|g| annotate_game(g, &mut s, &AnalysisConfig::default()))
        .collect();
    match out.iter().find_map(|a| a.incomplete.as_ref()) {
        Some(inc) => Err(format!("annotation stopped: {}", inc.error)),
        None => Ok(out),
    }
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pawnloss"))
        .args(args)
        .output()
        .expect("run pawnloss");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn fx(rel: &str) -> String {
    fixture(rel).display().to_string()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let all = annotate("game12/game12.pgn", "game12/game12.table")?;
    let elapsed = t.elapsed();
    let a = &all[0];
    let offer = a.annotations.last().ok_or("no annotations")?;
    ensure(
        offer.kind == AnnotationKind::DrawOffer && offer.mover == Color::Black,
        || format!("last annotation is {:?} by {:?}", offer.kind, offer.mover),
    )?;
    // Table values are whole centipawns, so the offer charge is exact.
    ensure(
        offer.value_best == 1.0 && offer.value_played == 0.0 && offer.pawn_loss == 1.0,
        || {
            format!(
                "offer: best {} played {} loss {}",
                offer.value_best, offer.value_played, offer.pawn_loss
            )
        },
    )?;
    let pre = a.tplv_black - offer.pawn_loss;
    ensure(close(pre, 5.2, PUBLISHED_TOL), || {
        format!("pre-offer TPLV {pre}")
    })?;
    ensure(close(a.tplv_black, 6.2, PUBLISHED_TOL), || {
        format!("final TPLV {}", a.tplv_black)
    })?;
    ensure(elapsed < MOCK_BUDGET, || format!("took {elapsed:?}"))?;

    let (code, out, err) = cli(&[
        "analyze",
        &fx("game12/game12.pgn"),
        "--mock",
        &fx("game12/game12.table"),
        "--format",
        "csv",
    ]);
    ensure(code == 0, || format!("analyze exited {code}: {err}"))?;
    let row = out.lines().nth(1).unwrap_or_default();
    ensure(row.contains(",5.90,6.20,"), || {
        format!("report row `{row}`")
    })?;
    Ok(format!(
        "offer charged {:.2}, Carlsen TPLV {:.2} (pre-offer {pre:.2}) in {elapsed:.0?}",
        offer.pawn_loss, a.tplv_black
    ))
}

fn expect_score(
    w: f64,
    b: f64,
    rule: &ScoringRule,
    want: (f64, f64),
    winner: Option<Color>,
) -> Result<(), String> {
    let s =
        score_game(GameResult::Draw, Termination::Normal, w, b, rule).map_err(|e| e.to_string())?;
    ensure(
        (s.score_white, s.score_black) == want && s.tiebreak_winner == winner,
        || {
            format!(
                "({w}, {b}) scored {}/{} winner {:?}",
                s.score_white, s.score_black, s.tiebreak_winner
            )
        },
    )
}

fn criterion_2() -> Outcome {
    expect_score(
        5.9,
        6.2,
        &ScoringRule::default(),
        (2.0, 1.0),
        Some(Color::White),
    )?;
    let a = &annotate("game12/game12.pgn", "game12/game12.table")?[0];
    ensure(
        a.game.player_name(Color::White) == "Caruana, Fabiano",
        || "white is not Caruana".into(),
    )?;
    expect_score(
        a.tplv_white,
        a.tplv_black,
        &ScoringRule::default(),
        (2.0, 1.0),
        Some(Color::White),
    )?;
    Ok("draw at 5.9 vs 6.2 scores 2-1, Caruana wins the tiebreak".into())
}

fn criterion_3() -> Outcome {
    expect_score(
        3.15,
        3.4,
        &ScoringRule::default(),
        (2.0, 1.0),
        Some(Color::White),
    )?;
    let a = &annotate("topalov/topalov.pgn", "topalov/topalov.table")?[0];
    ensure(
        a.game.player_name(Color::White) == "Topalov, Veselin",
        || "white is not Topalov".into(),
    )?;
    expect_score(
        a.tplv_white,
        a.tplv_black,
        &ScoringRule::default(),
        (2.0, 1.0),
        Some(Color::White),
    )?;
    Ok(format!(
        "fixture TPLVs {:.2} vs {:.2} score 2-1, Topalov wins the tiebreak",
        a.tplv_white, a.tplv_black
    ))
}

struct Championship {
    games: Vec<AnnotatedGame>,
    elapsed: Duration,
    standings: Vec<pawnloss::tournament::Standing>,
}

fn championship() -> Result<Championship, String> {
    let t = Instant::now();
    let games = annotate("krush-yu/championship.pgn", "krush-yu/championship.table")?;
    let mut entries = Vec::new();
    for p in [KRUSH, YU] {
        let theirs: Vec<&AnnotatedGame> =
            games.iter().filter(|g| g.color_of(p).is_some()).collect();
        let raw = theirs
            .iter()
            .map(|g| g.game.result.points(g.color_of(p).unwrap()))
            .sum();
        entries.push(PlayerEntry::from_games(p, raw, &theirs).map_err(|e| e.to_string())?);
    }
    let standings = rank_players(&entries, &RankOptions::default()).map_err(|e| e.to_string())?;
    Ok(Championship {
        games,
        elapsed: t.elapsed(),
        standings,
    })
}

fn player_games<'a>(c: &'a Championship, p: &str) -> Vec<&'a AnnotatedGame> {
    c.games.iter().filter(|g| g.color_of(p).is_some()).collect()
}

fn criterion_4() -> Outcome {
    let c = championship()?;
    for (p, want) in [(KRUSH, 159.21), (YU, 188.62)] {
        let games = player_games(&c, p);
        ensure(games.len() == 13, || format!("{p}: {} games", games.len()))?;
        let cum = analysis::cumulative_tplv(&games, p).map_err(|e| e.to_string())?;
        ensure(close(cum, want, PUBLISHED_TOL), || {
            format!("{p}: cumulative {cum}")
        })?;
    }
    let top = &c.standings[0];
    ensure(top.player == KRUSH && top.rank == 1, || {
        format!("{} is first", top.player)
    })?;
    ensure(c.standings.iter().all(|s| s.raw_score == 9.0), || {
        "raw scores are not 9-9".into()
    })?;
    ensure(top.tiebreak_used == TiebreakUsed::CumulativeTplv, || {
        format!("tiebreak {:?}", top.tiebreak_used)
    })?;
    ensure(c.elapsed < MOCK_BUDGET, || format!("took {:?}", c.elapsed))?;
    Ok(format!(
        "cumulative 159.21 / 188.62, Krush first on 9-9 by {:?} in {:.0?}",
        top.tiebreak_used, c.elapsed
    ))
}

/// Per-game averages as published. 159.21 / 13 = 12.247 and 188.62 / 13 =
/// 14.509, so the published 12.24 and 14.50 are truncations and sit just
/// outside a symmetric two-decimal tolerance.
fn criterion_4_averages() -> Outcome {
    let c = championship()?;
    let mut got = Vec::new();
    let mut ok = true;
    for (p, want) in [(KRUSH, 12.24), (YU, 14.50)] {
        let avg =
            analysis::average_tplv_per_game(&player_games(&c, p), p).map_err(|e| e.to_string())?;
        ok &= close(avg, want, PUBLISHED_TOL);
        got.push(format!("{p} {avg:.4} vs published {want:.2}"));
    }
    let text = got.join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut decisions = 0usize;
    for _ in 0..THEOREM_TRIPLES {
        let depth = rng.gen_range(1..=5);
        let branching = rng.gen_range(1..=4);
        let players = rng.gen_range(1..=3);
        let (tree, ai) = generate_random_tree(depth, branching, players, rng.gen())
            .map_err(|e| e.to_string())?;
        let mut path = vec![tree.root()];
        while let Some(&x) = path.last().filter(|&&x| !tree.is_terminal(x)) {
            let kids = tree.children(x);
            path.push(kids[rng.gen_range(0..kids.len())]);
        }
        let play = Play::from_path(&tree, path.clone()).map_err(|e| e.to_string())?;
        let v = check_tsp_play(&TplvRule, &tree, &ai, &play).map_err(|e| e.to_string())?;
        ensure(v.is_empty(), || {
            format!(
                "{} violations at depth {depth} branching {branching}",
                v.len()
            )
        })?;

        // Second route: substitute each maximizing child by hand.
        let f = scoring_rule_f(&tree, &ai, &play.clone().into());
        for w in path.windows(2) {
            let node = w[0];
            let p = tree.active_player(node).unwrap();
            let top = tree
                .children(node)
                .iter()
                .map(|&c| ai.value(p, c))
                .fold(f64::NEG_INFINITY, f64::max);
            for &c in tree
                .children(node)
                .iter()
                .filter(|&&c| ai.value(p, c) == top)
            {
                let m = modify_play(&tree, &play, node, c).map_err(|e| e.to_string())?;
                let g = scoring_rule_f(&tree, &ai, &m);
                // Only the swapped term changes: it drops to zero.
                let own = top - ai.value(p, w[1]);
                ensure(
                    close(g[p], f[p] - own, TSP_TOL) && g[p] <= f[p] + TSP_TOL,
                    || {
                        format!(
                            "substitution at node {node} moved f from {} to {}",
                            f[p], g[p]
                        )
                    },
                )?;
                decisions += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    ensure(elapsed < PROPERTY_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{THEOREM_TRIPLES} triples, {decisions} substitutions, no violation, {elapsed:.0?}"
    ))
}

fn criterion_6() -> Outcome {
    let fixture = toy::draw_offer_model();
    let (tree, ai) = fixture.build().map_err(|e| e.to_string())?;
    let verdict = check_tsp_mechanism(&fixture.fast_chess(&tree), &tree, &ai, DEFAULT_MAX_PLAYS)
        .map_err(|e| e.to_string())?;
    let strict = verdict
        .failing_plays
        .iter()
        .flat_map(|p| &p.violations)
        .filter(|v| {
            ai.value(v.player, v.chosen) < ai.value(v.player, v.best_response)
                && v.score_original < v.score_with_best
        })
        .count();
    ensure(strict >= 1, || {
        "no strict violation under the fast tiebreak".into()
    })?;

    let runs: [(&[&str], i32); 5] = [
        (&["demo-manipulation"], 0),
        (&["demo-manipulation", "--mechanism", "tplv"], 0),
        (&["demo-manipulation", "--mechanism", "fastchess-demo"], 3),
        (&["demo-manipulation", "--seed", "7"], 0),
        (
            &[
                "verify-tsp",
                "--random",
                "4",
                "3",
                "42",
                "--mechanism",
                "tplv",
            ],
            0,
        ),
    ];
    for (args, want) in runs {
        let (code, _, err) = cli(args);
        ensure(code == want, || {
            format!("`{}` exited {code}, expected {want}: {err}", args.join(" "))
        })?;
    }
    let tree_path = fx("trees/draw_offer.json");
    let (code, out, _) = cli(&["verify-tsp", &tree_path, "--mechanism", "fastchess-demo"]);
    ensure(code == 3 && out.contains("Black offers a draw"), || {
        format!("verify-tsp fastchess exited {code}")
    })?;
    let (code, _, _) = cli(&["verify-tsp", &fx("trees/depth_one.json")]);
    ensure(code == 0, || format!("depth-one tree exited {code}"))?;
    Ok(format!("{strict} strict violations under the fast tiebreak; demo and verify-tsp exit codes as documented"))
}

const FIXTURES: [(&str, &str); 4] = [
    ("game12/game12.pgn", "game12/game12.table"),
    ("topalov/topalov.pgn", "topalov/topalov.table"),
    ("krush-yu/championship.pgn", "krush-yu/championship.table"),
    ("symmetric/pair.pgn", "symmetric/pair.table"),
];

/// Per-ply sums from the table text, replayed on the `chess` crate directly.
fn recompute(a: &AnnotatedGame, table: &str) -> Result<[f64; 2], String> {
    let scores: HashMap<String, i64> = table
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split('|').map(str::trim).collect();
            let key = f[0]
                .split_whitespace()
                .take(4)
                .collect::<Vec<_>>()
                .join(" ");
            (key, f[2].trim_start_matches("cp ").parse().unwrap())
        })
        .collect();
    let lookup = |b: &chess::Board| {
        scores
            .get(&board::position_key(b))
            .copied()
            .ok_or("position missing from table")
    };
    let mut b = chess::Board::default();
    let mut prev = lookup(&b)?;
    let mut cp = [0i64; 2];
    for (i, m) in a.game.moves.iter().enumerate() {
        let mv: chess::ChessMove = m.uci.parse().map_err(|_| format!("bad uci {}", m.uci))?;
        if !b.legal(mv) {
            return Err(format!("illegal {}", m.uci));
        }
        b = b.make_move_new(mv);
        let s = lookup(&b)?;
        cp[i % 2] += (prev + s).max(0);
        prev = s;
    }
    if let Some(o) = a.game.accepted_draw_offer() {
        cp[o.player.index()] += (-prev).max(0);
    }
    Ok([cp[0] as f64 / 100.0, cp[1] as f64 / 100.0])
}

fn criterion_7() -> Outcome {
    let mut annotations = 0;
    let mut legal_plies = 0;
    let mut round_trips = 0;
    for (pgn, table) in FIXTURES {
        for g in parse_pgn(&read(pgn)).map_err(|e| e.to_string())? {
            let boards = g.positions();
            for (b, m) in boards.iter().zip(&g.moves) {
                board::parse_uci_move(b, &m.uci).map_err(|e| format!("{pgn}: {e}"))?;
                legal_plies += 1;
            }
        }
        let games = annotate(pgn, table)?;
        let text = read(table);
        for a in &games {
            for m in &a.annotations {
                ensure(
                    m.pawn_loss >= 0.0 && m.pawn_loss == (m.value_best - m.value_played).max(0.0),
                    || format!("{}: ply {} loss {}", a.game.label(), m.ply, m.pawn_loss),
                )?;
                annotations += 1;
            }
            let [w, b] = recompute(a, &text)?;
            ensure(
                close(a.tplv_white, w, SUM_TOL) && close(a.tplv_black, b, SUM_TOL),
                || {
                    format!(
                        "{}: {}/{} vs recomputed {w}/{b}",
                        a.game.label(),
                        a.tplv_white,
                        a.tplv_black
                    )
                },
            )?;
        }
        let report = Report::from_games(&games);
        let json = emit_report(&report, ReportFormat::Json);
        let back = parse_report(&json).map_err(|e| e.to_string())?;
        ensure(
            back == report && emit_report(&back, ReportFormat::Json) == json,
            || format!("{pgn}: round trip differs"),
        )?;
        round_trips += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let results = [GameResult::WhiteWin, GameResult::BlackWin, GameResult::Draw];
    let terms = [
        Termination::Normal,
        Termination::TimeForfeit,
        Termination::Other,
    ];
    for _ in 0..SCORE_CASES {
        let r = results[rng.gen_range(0..3)];
        let t = terms[rng.gen_range(0..3)];
        let w: f64 = rng.gen_range(0.0..40.0);
        let b = if rng.gen_bool(0.2) {
            w
        } else {
            rng.gen_range(0.0..40.0)
        };
        let s = score_game(r, t, w, b, &ScoringRule::default()).map_err(|e| e.to_string())?;
        ensure(s.score_white + s.score_black == 3.0, || {
            format!(
                "{r:?} {t:?} {w} {b} sums to {}",
                s.score_white + s.score_black
            )
        })?;
        let k: f64 = rng.gen_range(0.01..100.0);
        if w == b || (w - b).abs() > 1e-6 {
            let scaled = score_game(r, t, w * k, b * k, &ScoringRule::default())
                .map_err(|e| e.to_string())?;
            ensure(scaled == s, || {
                format!("scaling by {k} changed the score of {w} vs {b}")
            })?;
        }
    }
    Ok(format!(
        "{annotations} losses non-negative, TPLVs match recomputation, {SCORE_CASES} scores conserve 3 and ignore scaling, \
         {legal_plies} plies legal, {round_trips} reports round-trip"
    ))
}

fn criterion_8() -> Outcome {
    let rel = ScoringRule::relative(0.05);
    let s = score_game(GameResult::Draw, Termination::Normal, 5.9, 6.2, &rel)
        .map_err(|e| e.to_string())?;
    ensure(
        (s.score_white, s.score_black) == (1.5, 1.5) && s.tiebreak_winner.is_none(),
        || format!("relative mode scored {}/{}", s.score_white, s.score_black),
    )?;
    let warning = s.warning.ok_or("no warning in relative mode")?;
    ensure(
        warning.contains("relative threshold") && warning.contains("exact mode would decide"),
        || format!("warning text: {warning}"),
    )?;
    expect_score(
        5.9,
        6.2,
        &ScoringRule::default(),
        (2.0, 1.0),
        Some(Color::White),
    )?;
    let exact = score_game(
        GameResult::Draw,
        Termination::Normal,
        5.9,
        6.2,
        &ScoringRule::default(),
    )
    .unwrap();
    ensure(exact.warning.is_none(), || "exact mode warned".into())?;

    let dir = std::env::temp_dir().join(format!("pawnloss-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let report = dir.join("g12.json").display().to_string();
    let (code, _, err) = cli(&[
        "analyze",
        &fx("game12/game12.pgn"),
        "--mock",
        &fx("game12/game12.table"),
        "--out",
        &report,
    ]);
    ensure(code == 0, || format!("analyze exited {code}: {err}"))?;
    let (code, out, err) = cli(&[
        "score",
        &report,
        "--threshold",
        "0.05",
        "--threshold-mode",
        "relative",
        "--format",
        "csv",
    ]);
    let _ = std::fs::remove_dir_all(&dir);
    ensure(
        code == 0 && out.contains(",1.5,1.5,") && err.contains("relative threshold"),
        || format!("score exited {code}; stdout `{out}` stderr `{err}`"),
    )?;
    Ok("relative 5% ties 5.9 vs 6.2 at 1.5/1.5 with a warning; exact mode gives 2/1".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1", "game-12 draw offer and final TPLV", criterion_1),
        ("2", "game-12 game score", criterion_2),
        ("3", "Topalov-Carlsen game score", criterion_3),
        ("4", "championship cumulative TPLV and ranking", criterion_4),
        (
            "4-avg",
            "championship per-game averages as published",
            criterion_4_averages,
        ),
        (
            "5",
            "no profitable deviation under the TPLV rule",
            criterion_5,
        ),
        (
            "6",
            "fast-tiebreak counterexample and demo exit codes",
            criterion_6,
        ),
        ("7", "invariant suites", criterion_7),
        ("8", "relative-threshold regression", criterion_8),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  [{id}] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  [{id}] {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
