//! Optional TOML file; every key mirrors a command-line flag.
//!
//! ```toml
//! mock = "fixtures/game12/game12.table"
//! depth = 20
//! mate_cap = 10.0
//! jobs = 4
//! format = "json"
//! rule = "def4"
//! threshold_mode = "exact"
//!
//! [options]
//! Threads = "1"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::{Format, RuleName, ThresholdModeName, TplvKeyName};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub engine: Option<PathBuf>,
    #[serde(default)]
    pub engine_args: Vec<String>,
    pub mock: Option<PathBuf>,
    pub depth: Option<u32>,
    pub movetime: Option<u64>,
    #[serde(default)]
    pub options: BTreeMap<String, String>,
    pub mate_cap: Option<f64>,
    pub jobs: Option<usize>,
    pub format: Option<Format>,
    pub skip_plies: Option<usize>,
    pub charge_acceptance: Option<bool>,
    pub charge_declined_offers: Option<bool>,
    pub handshake_timeout_ms: Option<u64>,
    pub search_timeout_ms: Option<u64>,
    pub rule: Option<RuleName>,
    pub threshold: Option<f64>,
    pub threshold_mode: Option<ThresholdModeName>,
    pub tplv_key: Option<TplvKeyName>,
    pub champion: Option<String>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // Relative paths in the file are relative to the file.
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.engine, &mut cfg.mock].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_resolve_against_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(
            &p,
            "mock = \"t.table\"\ndepth = 12\nrule = \"norway\"\n[options]\nHash = \"16\"\n",
        )
        .unwrap();
        let cfg = FileConfig::load(&p).unwrap();
        assert_eq!(cfg.mock.unwrap(), dir.path().join("t.table"));
        assert_eq!(cfg.depth, Some(12));
        assert_eq!(cfg.rule, Some(RuleName::Norway));
        assert_eq!(cfg.options["Hash"], "16");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        std::fs::write(&p, "dept = 12\n").unwrap();
        assert!(FileConfig::load(&p).is_err());
    }
}
