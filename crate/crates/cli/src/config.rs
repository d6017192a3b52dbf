//! Flat TOML run configuration. Every key mirrors a command-line flag; flags
//! win over the file and the file wins over built-in defaults. Relative paths
//! in the file resolve against the file's directory.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

use crate::exit::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub elapsed: Option<PathBuf>,
    pub preprocess: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub matrices: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub iterations: Option<IterationList>,
    pub seed: Option<u64>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub split: Option<f64>,
    pub subset: Option<String>,
    pub fixed_clock: Option<bool>,
    pub abs_tau: Option<bool>,
}

/// `iterations = "1,19"` or `iterations = [1, 19]`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum IterationList {
    Text(String),
    List(Vec<u32>),
}

impl IterationList {
    pub fn resolve(&self) -> Result<Vec<u32>> {
        match self {
            IterationList::Text(s) => parse_iterations(s),
            IterationList::List(v) => check_iterations(v.clone()),
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.elapsed,
            &mut cfg.preprocess,
            &mut cfg.metadata,
            &mut cfg.data,
            &mut cfg.matrices,
            &mut cfg.corpus,
            &mut cfg.model,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// `"1,19"`, `"1..32"` (inclusive) or a mix such as `"1,4..8,19"`.
pub fn parse_iterations(text: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |s: &str| -> Result<u32> {
            s.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("bad iteration count {s:?}")).into())
        };
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
                if a > b {
                    return Err(CliError::Usage(format!("empty iteration range {part:?}")).into());
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    check_iterations(out)
}

fn check_iterations(mut v: Vec<u32>) -> Result<Vec<u32>> {
    if v.is_empty() || v.contains(&0) {
        return Err(CliError::Usage("iteration counts must be a non-empty list of positive integers".into()).into());
    }
    let mut seen = std::collections::BTreeSet::new();
    v.retain(|k| seen.insert(*k));
    Ok(v)
}
