//! Flat `key = value` run configuration. Command-line flags win over the
//! file; `QALR_OUTPUT_DIR` wins over the file's `output_dir`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

pub const OUTPUT_DIR_ENV: &str = "QALR_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "qalr-out";

pub const KNOWN_KEYS: &[&str] = &[
    "d",
    "p",
    "q",
    "k",
    "T",
    "alpha",
    "schedule",
    "threshold",
    "hilbert_cap",
    "threads",
    "tol",
    "method",
    "count_model",
    "worst_n",
    "refine",
    "ball_db",
    "energy_cache",
    "output_dir",
];

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    origin: Option<PathBuf>,
}

impl Config {
    pub fn parse(text: &str, origin: Option<&Path>) -> Result<Self> {
        let mut values = BTreeMap::new();
        let place = origin.map(|p| p.display().to_string()).unwrap_or_else(|| "<config>".into());
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{place}:{}: expected `key = value`, got {raw:?}", no + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if !KNOWN_KEYS.contains(&k) {
                bail!("{place}:{}: unknown key {k:?} (known: {})", no + 1, KNOWN_KEYS.join(", "));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                bail!("{place}:{}: key {k:?} set twice", no + 1);
            }
        }
        Ok(Self { values, origin: origin.map(Path::to_path_buf) })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, Some(path))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| {
                let place = self.origin.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<config>".into());
                anyhow!("{place}: bad value {v:?} for {key}: {e}")
            }),
        }
    }

    /// Flag value if given, else the config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Flag, then the environment, then the config, then the default.
    pub fn output_dir(&self, flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .or_else(|| self.raw("output_dir").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

/// `1.5`, `1,2,3` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let out = if let Some((head, count)) = s.rsplit_once(':').filter(|_| s.matches(':').count() == 2) {
        let (a, b) = head.split_once(':').expect("two colons");
        let (a, b): (f64, f64) = (a.trim().parse()?, b.trim().parse()?);
        let n: usize = count.trim().parse()?;
        match n {
            0 => bail!("grid {s:?} has zero points"),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        }
    } else {
        s.split(',').map(|x| x.trim().parse::<f64>().with_context(|| format!("bad number {x:?} in {s:?}"))).collect::<Result<_>>()?
    };
    if out.is_empty() || out.iter().any(|v| !v.is_finite()) {
        bail!("grid {s:?} must be non-empty and finite");
    }
    Ok(out)
}
