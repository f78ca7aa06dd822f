//! Layered settings: command-line flag, then `FFR_*` environment variable
//! (both resolved by clap), then a flat `key = value` config file, then the
//! built-in default.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use ffrestrict::{Limits, RunConfig};
use num_rational::Ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Flat CSV table.
    Table,
    /// Newline-delimited JSON records.
    Records,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Comma-separated odd primes.
    #[arg(long = "p", env = "FFR_P")]
    pub primes: Option<String>,
    /// Comma-separated dimensions (each at least 2).
    #[arg(long = "d", env = "FFR_D")]
    pub dims: Option<String>,
    /// Comma-separated suite names.
    #[arg(long, env = "FFR_SUITES")]
    pub suites: Option<String>,
    #[arg(long, env = "FFR_TRIALS")]
    pub trials: Option<String>,
    #[arg(long, env = "FFR_SEED")]
    pub seed: Option<String>,
    /// Largest dense grid `p^d` allowed.
    #[arg(long, env = "FFR_CAP")]
    pub cap: Option<String>,
    /// Directory receiving report.csv and report.ndjson.
    #[arg(long, env = "FFR_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, env = "FFR_FORMAT")]
    pub format: Option<String>,
    /// Flat key=value file consulted for anything not given as a flag or variable.
    #[arg(long, env = "FFR_CONFIG")]
    pub config: Option<PathBuf>,
    /// Fill the ms column with wall time (makes output run-dependent).
    #[arg(long, env = "FFR_TIMINGS")]
    pub timings: bool,
}

/// Parsed `key = value` lines; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
            entries.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// The first of `flag`, `file[key]` that is present.
pub fn pick<'a>(flag: Option<&'a str>, file: &'a ConfigFile, key: &str) -> Option<&'a str> {
    flag.or_else(|| file.get(key))
}

pub fn parse_one<T: FromStr>(key: &str, s: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse().map_err(|e| format!("bad value {s:?} for {key}: {e}"))
}

pub fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| parse_one(key, x)).collect()
}

pub fn parse_ratio(key: &str, s: &str) -> Result<Ratio<i64>, String> {
    parse_one(key, s)
}

/// Everything resolved for a run, plus output options.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub run: RunConfig,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub file: ConfigFile,
}

impl Common {
    pub fn resolve(&self) -> Result<Resolved, String> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let mut run = RunConfig::default();
        if let Some(s) = pick(self.primes.as_deref(), &file, "p") {
            run.primes = parse_list("p", s)?;
        }
        if let Some(s) = pick(self.dims.as_deref(), &file, "d") {
            run.dims = parse_list("d", s)?;
        }
        if let Some(s) = pick(self.suites.as_deref(), &file, "suites") {
            run.suites = s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
        }
        if let Some(s) = pick(self.trials.as_deref(), &file, "trials") {
            run.trials = parse_one("trials", s)?;
        }
        if let Some(s) = pick(self.seed.as_deref(), &file, "seed") {
            run.seed = parse_one("seed", s)?;
        }
        if let Some(s) = pick(self.cap.as_deref(), &file, "cap") {
            run.limits = Limits { max_grid: parse_one("cap", s)?, ..Limits::default() };
        }
        run.timings = self.timings || matches!(file.get("timings"), Some("true" | "1" | "yes"));
        let out = self.out.clone().or_else(|| file.get("out").map(PathBuf::from));
        let format = match pick(self.format.as_deref(), &file, "format") {
            Some(s) => Format::from_str(s, true).map_err(|_| format!("bad format {s:?}; use table or records"))?,
            None => Format::Table,
        };
        Ok(Resolved { run, out, format, file })
    }
}
