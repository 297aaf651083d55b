//! `key = value` experiment configuration.
//!
//! ```text
//! # comments run to end of line
//! family = lasso            # lasso | logistic | elastic-net
//! instances = 4             # synthetic instances, seeds seed..seed+instances
//! m = 20
//! n = 50
//! lambda_fracs = 0.3, 0.5, 0.8
//! pairs = zero, dual-scaling:10, sequential:0.9
//! ```
//!
//! Values may be quoted and lists may be wrapped in `[ ]`. Section headers
//! (`[name]`) are accepted and ignored so files stay TOML-compatible.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::io::InstanceSource;
use super::synthetic::SyntheticSpec;
use crate::balls::BallKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Lasso,
    Logistic,
    ElasticNet,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Lasso => "lasso",
            Family::Logistic => "logistic",
            Family::ElasticNet => "elastic-net",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lasso" => Ok(Family::Lasso),
            "logistic" => Ok(Family::Logistic),
            "elastic-net" | "elastic_net" | "enet" => Ok(Family::ElasticNet),
            _ => Err(format!("unknown family `{s}`")),
        }
    }
}

/// How the primal-dual pair of a cell is produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PairStrategy {
    /// `x = 0` with its dual-scaled `u`.
    Zero,
    /// Dual scaling after a fixed number of solver iterations.
    DualScaling { iters: usize },
    /// Sequential pair from `λ₀ = max(λ, lambda0_frac·λ_max)`.
    Sequential { lambda0_frac: f64 },
}

impl fmt::Display for PairStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairStrategy::Zero => f.write_str("zero"),
            PairStrategy::DualScaling { iters } => write!(f, "dual-scaling:{iters}"),
            PairStrategy::Sequential { lambda0_frac } => write!(f, "sequential:{lambda0_frac}"),
        }
    }
}

impl FromStr for PairStrategy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        match (name, arg) {
            ("zero", None) => Ok(PairStrategy::Zero),
            ("dual-scaling", a) => {
                let iters = match a {
                    Some(a) => a
                        .parse()
                        .map_err(|_| format!("invalid iteration count `{a}`"))?,
                    None => 50,
                };
                Ok(PairStrategy::DualScaling { iters })
            }
            ("sequential", a) => {
                let lambda0_frac: f64 = match a {
                    Some(a) => a.parse().map_err(|_| format!("invalid fraction `{a}`"))?,
                    None => 1.0,
                };
                if !(lambda0_frac > 0.0 && lambda0_frac <= 1.0) {
                    return Err(format!(
                        "sequential fraction must lie in (0, 1], got {lambda0_frac}"
                    ));
                }
                Ok(PairStrategy::Sequential { lambda0_frac })
            }
            _ => Err(format!("unknown pair strategy `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub family: Family,
    /// Data file (`.csv` is read as CSV, anything else as LIBSVM); synthetic when absent.
    pub data: Option<PathBuf>,
    pub n_features: Option<usize>,
    /// Number of synthetic instances.
    pub instances: usize,
    pub synthetic: SyntheticSpec,
    /// Column normalisation for file data (synthetic data uses `synthetic.normalize`).
    pub normalize: bool,
    pub lambda_fracs: Vec<f64>,
    pub pairs: Vec<PairStrategy>,
    /// Quadratic weight of the elastic net.
    pub lambda2: f64,
    pub gap_tolerance: f64,
    pub max_iters: usize,
    /// Balls that drive dynamic screening runs.
    pub screen_balls: Vec<BallKind>,
    pub period: usize,
    pub timings: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            family: Family::Lasso,
            data: None,
            n_features: None,
            instances: 3,
            synthetic: SyntheticSpec::default(),
            normalize: false,
            lambda_fracs: vec![0.3, 0.5, 0.8],
            pairs: vec![
                PairStrategy::Zero,
                PairStrategy::DualScaling { iters: 10 },
                PairStrategy::Sequential { lambda0_frac: 0.9 },
            ],
            lambda2: 0.1,
            gap_tolerance: 1e-10,
            max_iters: 100_000,
            screen_balls: vec![BallKind::Ryu, BallKind::Gap],
            period: 10,
            timings: false,
        }
    }
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    for q in ['"', '\''] {
        if let Some(inner) = v.strip_prefix(q).and_then(|s| s.strip_suffix(q)) {
            return inner;
        }
    }
    v
}

fn list(v: &str) -> Vec<&str> {
    let v = v.trim();
    let v = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .unwrap_or(v);
    v.split(',')
        .map(unquote)
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    unquote(v)
        .parse()
        .map_err(|_| format!("invalid value `{v}` for `{key}`"))
}

fn parse_bool(key: &str, v: &str) -> std::result::Result<bool, String> {
    match unquote(v) {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("invalid boolean `{v}` for `{key}`")),
    }
}

fn positive(key: &str, v: f64) -> std::result::Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{key}` must be positive, got {v}"))
    }
}

impl Config {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let key = key.trim();
        match key {
            "family" => self.family = parse_value(key, value)?,
            "data" => self.data = Some(PathBuf::from(unquote(value))),
            "n_features" => self.n_features = Some(parse_value(key, value)?),
            "instances" => self.instances = parse_value(key, value)?,
            "m" => self.synthetic.m = parse_value(key, value)?,
            "n" => self.synthetic.n = parse_value(key, value)?,
            "density" => self.synthetic.density = parse_value(key, value)?,
            "noise" => self.synthetic.noise = parse_value(key, value)?,
            "seed" => self.synthetic.seed = parse_value(key, value)?,
            "normalize" => {
                let b = parse_bool(key, value)?;
                self.normalize = b;
                self.synthetic.normalize = b;
            }
            "lambda_fracs" => {
                self.lambda_fracs = list(value)
                    .into_iter()
                    .map(|t| parse_value::<f64>(key, t).and_then(|v| positive(key, v)))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "pairs" => {
                self.pairs = list(value)
                    .into_iter()
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()?;
            }
            "lambda2" => self.lambda2 = positive(key, parse_value(key, value)?)?,
            "gap_tolerance" => self.gap_tolerance = positive(key, parse_value(key, value)?)?,
            "max_iters" => self.max_iters = parse_value(key, value)?,
            "screen_balls" => {
                self.screen_balls = list(value)
                    .into_iter()
                    .map(|t| BallKind::parse(t).ok_or_else(|| format!("unknown ball `{t}`")))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "period" => {
                self.period = parse_value(key, value)?;
                if self.period == 0 {
                    return Err("`period` must be at least 1".into());
                }
            }
            "timings" => self.timings = parse_bool(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Applies `key=value` overrides, for example from the command line.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for (k, o) in overrides.iter().enumerate() {
            let o = o.as_ref();
            let (key, value) = o.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                message: format!("override `{o}` is not key=value"),
            })?;
            self.set(key, value).map_err(|message| Error::Parse {
                line: k + 1,
                message,
            })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (k, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty()
                || (line.starts_with('[') && line.ends_with(']') && !line.contains('='))
            {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                message: format!("expected key = value, got `{line}`"),
            })?;
            cfg.set(key, value).map_err(|message| Error::Parse {
                line: k + 1,
                message,
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    /// One source per instance: the data file, or `instances` synthetic
    /// specs with consecutive seeds.
    pub fn sources(&self) -> Vec<InstanceSource> {
        match &self.data {
            Some(path) => {
                let is_csv = path
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
                vec![if is_csv {
                    InstanceSource::Csv { path: path.clone() }
                } else {
                    InstanceSource::Libsvm {
                        path: path.clone(),
                        n_features: self.n_features,
                    }
                }]
            }
            None => (0..self.instances as u64)
                .map(|k| {
                    InstanceSource::Synthetic(SyntheticSpec {
                        seed: self.synthetic.seed.wrapping_add(k),
                        ..self.synthetic.clone()
                    })
                })
                .collect(),
        }
    }
}

/// Drops a `#` comment that is not inside quotes.
fn strip_comment(line: &str) -> &str {
    let mut quote: Option<char> = None;
    for (i, ch) in line.char_indices() {
        match (quote, ch) {
            (None, '"' | '\'') => quote = Some(ch),
            (Some(q), c) if c == q => quote = None,
            (None, '#') => return &line[..i],
            _ => {}
        }
    }
    line
}
