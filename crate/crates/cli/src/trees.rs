use std::fmt::Write as _;

use anyhow::{bail, Result};
use pawnloss::game::{
    check_tsp_mechanism, generate_random_tree, toy, AiEvaluation, GameError, GameTree,
    ScoringMechanism, TplvRule, TreeFixture, TspVerdict, DEFAULT_MAX_PLAYS,
};

use crate::config::FileConfig;
use crate::{coded, read_text, DemoArgs, DemoMechanism, MechanismName, VerifyArgs};

const EXIT_VIOLATIONS: u8 = 3;
const EXIT_BOUND: u8 = 4;

fn game_error(e: GameError) -> anyhow::Error {
    match e {
        GameError::TooManyPlays { .. } => coded(EXIT_BOUND, e),
        e => e.into(),
    }
}

fn check(
    fixture: &TreeFixture,
    tree: &GameTree,
    ai: &AiEvaluation,
    mechanism: MechanismName,
    max_plays: usize,
) -> Result<TspVerdict> {
    let fast;
    let m: &dyn ScoringMechanism = match mechanism {
        MechanismName::Tplv => &TplvRule,
        MechanismName::FastchessDemo => {
            fast = fixture.fast_chess(tree);
            &fast
        }
    };
    check_tsp_mechanism(m, tree, ai, max_plays).map_err(game_error)
}

/// Human-readable listing of every violation, naming nodes by their labels.
fn describe(fixture: &TreeFixture, verdict: &TspVerdict) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "mechanism {}: {} plays checked, {} violations",
        verdict.mechanism,
        verdict.plays_checked,
        verdict.violation_count()
    );
    for p in &verdict.failing_plays {
        let _ = writeln!(
            s,
            "  play ending at node {} ({})",
            p.terminal,
            fixture.label(p.terminal)
        );
        for v in &p.violations {
            let _ = writeln!(
                s,
                "    {} at node {} ({}): played node {} ({}) for f = {:.4}; the best response, node {} ({}), gives f = {:.4}",
                fixture.player_name(v.player),
                v.node,
                fixture.label(v.node),
                v.chosen,
                fixture.label(v.chosen),
                v.score_original,
                v.best_response,
                fixture.label(v.best_response),
                v.score_with_best,
            );
        }
    }
    s
}

pub fn verify(args: VerifyArgs) -> Result<u8> {
    let fixture = match (&args.tree, &args.random) {
        (Some(path), None) => TreeFixture::parse(&read_text(path)?)?,
        (None, Some(r)) => {
            let &[depth, branching, seed] = r.as_slice() else {
                bail!("--random takes DEPTH BRANCHING SEED")
            };
            let (tree, ai) =
                generate_random_tree(depth as usize, branching as usize, args.players, seed)?;
            TreeFixture::from_tree(&tree, &ai)
        }
        _ => bail!("give either a tree fixture or --random"),
    };
    let (tree, ai) = fixture.build()?;
    let verdict = check(&fixture, &tree, &ai, args.mechanism, args.max_plays)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&verdict)?);
    } else {
        print!("{}", describe(&fixture, &verdict));
        println!(
            "{}",
            if verdict.is_tsp() {
                "TSP: yes"
            } else {
                "TSP: no"
            }
        );
    }
    Ok(if verdict.is_tsp() { 0 } else { EXIT_VIOLATIONS })
}

pub fn demo(args: DemoArgs, file: &FileConfig) -> Result<u8> {
    let seed = args.seed.or(file.seed);
    let fixture = match seed {
        Some(s) => toy::draw_offer_model_with_noise(s, args.noise),
        None => toy::draw_offer_model(),
    };
    let (tree, ai) = fixture.build()?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Model: {} is a pawn better and may press on or offer a draw that leads to a fast tiebreak they are favoured to win.",
        fixture.player_name(toy::BLACK)
    );
    if let Some(s) = seed {
        let _ = writeln!(
            out,
            "Valuations perturbed by up to {} pawns (seed {s}).",
            args.noise
        );
    }

    let wanted: &[MechanismName] = match args.mechanism {
        DemoMechanism::Both => &[MechanismName::FastchessDemo, MechanismName::Tplv],
        DemoMechanism::Tplv => &[MechanismName::Tplv],
        DemoMechanism::FastchessDemo => &[MechanismName::FastchessDemo],
    };
    let mut verdicts = Vec::new();
    for &m in wanted {
        let v = check(&fixture, &tree, &ai, m, DEFAULT_MAX_PLAYS)?;
        out.push('\n');
        out.push_str(&describe(&fixture, &v));
        let _ = writeln!(
            out,
            "{}",
            if v.is_tsp() {
                "No player can improve their outcome with a move the engine rates lower."
            } else {
                "A move the engine rates lower strictly improves the mover's outcome."
            }
        );
        verdicts.push((m, v));
    }
    print!("{out}");

    let code = match args.mechanism {
        DemoMechanism::Both => {
            let fast_manipulable = verdicts
                .iter()
                .any(|(m, v)| *m == MechanismName::FastchessDemo && !v.is_tsp());
            let tplv_clean = verdicts
                .iter()
                .all(|(m, v)| *m != MechanismName::Tplv || v.is_tsp());
            if fast_manipulable && tplv_clean {
                0
            } else {
                1
            }
        }
        _ if verdicts.iter().all(|(_, v)| v.is_tsp()) => 0,
        _ => EXIT_VIOLATIONS,
    };
    Ok(code)
}
