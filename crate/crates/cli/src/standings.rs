use std::collections::BTreeSet;

use anyhow::{bail, Context, Result};
use pawnloss::analysis::{is_scorable, GameTotals};
use pawnloss::report::{emit_report, parse_report, GameEntry, Report};
use pawnloss::scoring::{score_game, ScoringRule, ThresholdMode, Variant};
use pawnloss::tournament::{
    rank_players, PlayerEntry, PlayoffPlan, RankOptions, TiebreakUsed, TplvKey,
};

use crate::config::FileConfig;
use crate::{
    read_text, write_output, Format, RankArgs, RuleName, ScoreArgs, ThresholdModeName, TplvKeyName,
};

fn load(path: &std::path::Path) -> Result<Report> {
    parse_report(&read_text(path)?).with_context(|| format!("{}", path.display()))
}

fn rule(args: &crate::RuleArgs, file: &FileConfig) -> Result<ScoringRule> {
    let variant = match args.rule.or(file.rule).unwrap_or(RuleName::Def4) {
        RuleName::Def4 => Variant::Def4,
        RuleName::Norway => Variant::Norway,
    };
    let threshold = args.threshold.or(file.threshold);
    // A threshold on its own implies relative mode.
    let mode = match args.threshold_mode.or(file.threshold_mode) {
        Some(ThresholdModeName::Exact) => ThresholdMode::Exact,
        Some(ThresholdModeName::Relative) => ThresholdMode::Relative,
        None if threshold.is_some() => ThresholdMode::Relative,
        None => ThresholdMode::Exact,
    };
    let mut rule = ScoringRule {
        variant,
        threshold_mode: mode,
        ..ScoringRule::default()
    };
    if let Some(t) = threshold {
        rule.threshold_value = t;
    } else if mode == ThresholdMode::Relative {
        bail!("--threshold-mode relative needs --threshold");
    }
    rule.validate()?;
    Ok(rule)
}

pub fn score(args: ScoreArgs, file: &FileConfig) -> Result<u8> {
    let rule = rule(&args.rule, file)?;
    let mut report = load(&args.report)?;
    report.rule = Some(rule);
    let mut warnings = Vec::new();
    for g in &mut report.games {
        g.score = None;
        let label = GameTotals::label(&*g);
        if let Some(inc) = &g.incomplete {
            warnings.push(format!(
                "{label}: annotation stopped at position {}; not scored",
                inc.position
            ));
            continue;
        }
        if !is_scorable(g.result, g.termination) {
            warnings.push(format!("{label}: unfinished; not scored"));
            continue;
        }
        let s = score_game(g.result, g.termination, g.tplv_white, g.tplv_black, &rule)
            .with_context(|| label.clone())?;
        if let Some(w) = &s.warning {
            warnings.push(format!("{label}: {w}"));
        }
        g.score = Some(s);
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    report.warnings.extend(warnings);
    let format = args.format.or(file.format).unwrap_or(Format::Json);
    write_output(args.out.as_deref(), &emit_report(&report, format.into()))?;
    Ok(0)
}

pub fn rank(args: RankArgs, file: &FileConfig) -> Result<u8> {
    let mut games: Vec<GameEntry> = Vec::new();
    let mut engine = None;
    let mut warnings = Vec::new();
    for path in &args.reports {
        let r = load(path)?;
        match (&engine, &r.engine) {
            (None, Some(e)) => engine = Some(e.clone()),
            (Some(a), Some(b)) if a != b => warnings.push(format!(
                "{} was analysed with a different engine setup ({}); TPLVs may not be comparable",
                path.display(),
                b.settings
            )),
            _ => {}
        }
        games.extend(r.games);
    }
    if let Some(g) = games.iter().find(|g| g.incomplete.is_some()) {
        bail!(
            "{} is only partly annotated; re-run analyze",
            GameTotals::label(g)
        );
    }

    let players: BTreeSet<String> = if args.players.is_empty() {
        games
            .iter()
            .flat_map(|g| [g.white.clone(), g.black.clone()])
            .collect()
    } else {
        args.players.iter().cloned().collect()
    };
    let mut entries = Vec::new();
    for p in &players {
        let theirs: Vec<&GameEntry> = games.iter().filter(|g| g.color_of(p).is_some()).collect();
        if theirs.is_empty() {
            bail!("player `{p}` does not appear in any report");
        }
        let raw: f64 = theirs
            .iter()
            .filter_map(|g| g.color_of(p).map(|c| g.result.points(c)))
            .sum();
        entries.push(PlayerEntry::from_games(p, raw, &theirs)?);
    }

    let options = RankOptions {
        tplv_key: match args
            .tplv_key
            .or(file.tplv_key)
            .unwrap_or(TplvKeyName::Cumulative)
        {
            TplvKeyName::Cumulative => TplvKey::Cumulative,
            TplvKeyName::Average => TplvKey::Average,
        },
        champion: args.champion.clone().or_else(|| file.champion.clone()),
    };
    let standings = rank_players(&entries, &options)?;
    if standings
        .iter()
        .any(|s| s.tiebreak_used == TiebreakUsed::Unresolved)
    {
        match PlayoffPlan::for_standings(&standings) {
            Ok(plan) => {
                let first: Vec<String> = plan
                    .games()
                    .iter()
                    .map(|g| format!("{} - {}", g.white, g.black))
                    .collect();
                warnings.push(format!(
                    "first place is unresolved; playoff cycle 1: {}",
                    first.join(", ")
                ));
            }
            Err(e) => warnings.push(format!("an unresolved tie remains: {e}")),
        }
    }
    for w in &warnings {
        eprintln!("warning: {w}");
    }

    let mut report = Report::standings(standings);
    report.engine = engine;
    report.warnings = warnings;
    let format = args.format.or(file.format).unwrap_or(Format::Csv);
    write_output(args.out.as_deref(), &emit_report(&report, format.into()))?;
    Ok(0)
}
