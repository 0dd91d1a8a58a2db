use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use pmw_core::oplab::DEFAULT_TOL;

use crate::GlobalOpts;

/// Resolved run configuration: flags override the config file, which
/// overrides `PMW_TOL` and the built-in defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub seed: u64,
    pub tol: f64,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub samples: Option<usize>,
    pub gamma_grid: Option<Vec<f64>>,
    pub radius: Option<f64>,
}

const KNOWN_KEYS: [&str; 7] = ["seed", "tol", "jobs", "out", "samples", "gamma_grid", "radius"];

/// Reads a flat `key = value` file. Blank lines and `#` comments are skipped.
pub fn read_kv(path: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_kv(&text).with_context(|| format!("in {}", path.display()))
}

pub fn parse_kv(text: &str) -> anyhow::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`", i + 1);
        };
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn parse_floats(s: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("`{p}` is not a number"))
        })
        .collect()
}

fn parse_key<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> anyhow::Result<Option<T>> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| anyhow::anyhow!("config key `{key}`: bad value `{v}`")))
        .transpose()
}

impl Settings {
    pub fn resolve(g: &GlobalOpts) -> anyhow::Result<Settings> {
        let file = match &g.config {
            Some(p) => read_kv(p)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            bail!("unknown config key `{k}`");
        }
        let env_tol = match std::env::var("PMW_TOL") {
            Ok(v) => Some(v.parse::<f64>().with_context(|| format!("PMW_TOL=`{v}`"))?),
            Err(_) => None,
        };
        let tol = g
            .tol
            .or(parse_key(&file, "tol")?)
            .or(env_tol)
            .unwrap_or(DEFAULT_TOL);
        if !(tol >= 0.0) {
            bail!("tolerance must be nonnegative, got {tol}");
        }
        let jobs = g.jobs.or(parse_key(&file, "jobs")?);
        if jobs == Some(0) {
            bail!("--jobs must be positive");
        }
        Ok(Settings {
            seed: g.seed.or(parse_key(&file, "seed")?).unwrap_or(0),
            tol,
            jobs,
            out: g.out.clone().or(parse_key(&file, "out")?),
            samples: parse_key(&file, "samples")?,
            gamma_grid: file.get("gamma_grid").map(|v| parse_floats(v)).transpose()?,
            radius: parse_key(&file, "radius")?,
        })
    }
}
