//! Run configuration as flat `key = value` text.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cutqaoa::error::{Error, Result};
use cutqaoa::separator::DEFAULT_BALANCE_FRACTION;
use cutqaoa::sim::NoiseModel;

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "CUTQAOA_OUT";

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    Generated { n: usize, m: usize, separator: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Cut,
    Uncut,
    ClassicalCut,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cut => "cut",
            Mode::Uncut => "uncut",
            Mode::ClassicalCut => "classical-cut",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cut" => Ok(Mode::Cut),
            "uncut" => Ok(Mode::Uncut),
            "classical-cut" | "classical" => Ok(Mode::ClassicalCut),
            other => Err(Error::InvalidArgument(format!("unknown mode {other:?}"))),
        }
    }
}

/// Backend estimating separator spin correlations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    /// Exhaustive up to 16 vertices, local search above.
    Auto,
    Exhaustive,
    LocalSearch { restarts: usize, keep: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub instance: InstanceSource,
    pub balance_fraction: f64,
    pub oracle: OracleKind,
    pub p: usize,
    pub dt: f64,
    pub budget: usize,
    pub mode: Mode,
    pub noise: Option<NoiseModel>,
    pub shots: usize,
    pub seed: u64,
    /// Shots per gate-noise trajectory in noisy uncut sampling.
    pub reuse: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            instance: InstanceSource::Generated { n: 10, m: 13, separator: 2, seed: 7 },
            balance_fraction: DEFAULT_BALANCE_FRACTION,
            oracle: OracleKind::Auto,
            p: 2,
            dt: 0.75,
            budget: 500,
            mode: Mode::Cut,
            noise: None,
            shots: 100_000,
            seed: 1,
            reuse: 200,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.shots == 0 {
            return bad("shot count N must be at least 1".into());
        }
        if self.p == 0 {
            return bad("p must be at least 1".into());
        }
        if self.mode == Mode::Cut && self.p != 2 {
            return bad(format!("cut mode requires p = 2, got {}", self.p));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(0.5..1.0).contains(&self.balance_fraction) {
            return bad(format!("balance_fraction {} outside [0.5, 1)", self.balance_fraction));
        }
        if self.reuse == 0 {
            return bad("reuse must be at least 1".into());
        }
        if let OracleKind::LocalSearch { restarts, keep } = self.oracle {
            if restarts == 0 || keep == 0 {
                return bad("local search needs restarts and keep of at least 1".into());
            }
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        Ok(())
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "instance" => self.instance = InstanceSource::File(PathBuf::from(value)),
            "generate" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                let [n, m, separator, seed] = parts[..] else {
                    return Err(Error::InvalidArgument(format!("generate expects n,m,separator,seed, got {value:?}")));
                };
                self.instance = InstanceSource::Generated {
                    n: parse(key, n)?,
                    m: parse(key, m)?,
                    separator: parse(key, separator)?,
                    seed: parse(key, seed)?,
                };
            }
            "balance_fraction" => self.balance_fraction = parse(key, value)?,
            "oracle" => {
                self.oracle = match value {
                    "auto" => OracleKind::Auto,
                    "exhaustive" => OracleKind::Exhaustive,
                    "local-search" => match self.oracle {
                        OracleKind::LocalSearch { .. } => self.oracle,
                        _ => OracleKind::LocalSearch { restarts: 200, keep: 32 },
                    },
                    other => return Err(Error::InvalidArgument(format!("unknown oracle {other:?}"))),
                }
            }
            "oracle_restarts" | "oracle_keep" => {
                let (mut restarts, mut keep) = match self.oracle {
                    OracleKind::LocalSearch { restarts, keep } => (restarts, keep),
                    _ => (200, 32),
                };
                if key == "oracle_restarts" {
                    restarts = parse(key, value)?;
                } else {
                    keep = parse(key, value)?;
                }
                self.oracle = OracleKind::LocalSearch { restarts, keep };
            }
            "p" => self.p = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "budget" => self.budget = parse(key, value)?,
            "mode" => self.mode = value.parse()?,
            "noise" => {
                self.noise = match value {
                    "none" | "off" => None,
                    "default" | "on" => Some(NoiseModel::default()),
                    other => return Err(Error::InvalidArgument(format!("noise must be none or default, got {other:?}"))),
                }
            }
            "p1" | "p2" | "p_ro" => {
                let mut noise = self.noise.unwrap_or_default();
                let v: f64 = parse(key, value)?;
                match key {
                    "p1" => noise.p1 = v,
                    "p2" => noise.p2 = v,
                    _ => noise.p_ro = v,
                }
                self.noise = Some(noise);
            }
            "shots" | "N" => self.shots = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "reuse" => self.reuse = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => return Err(Error::InvalidArgument(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Defaults overridden by every `key = value` line of `text`; `#` starts
    /// a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, message: format!("expected key = value, got {line:?}") })?;
            cfg.set(key, value).map_err(|e| match e {
                Error::InvalidArgument(message) => Error::Parse { line: i + 1, message },
                other => other,
            })?;
        }
        Ok(cfg)
    }

    /// Replaces the output directory with `$CUTQAOA_OUT` when set.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.out_dir = PathBuf::from(dir);
        }
    }

    /// Noise model with all-zero rates treated as absent.
    pub fn effective_noise(&self) -> Option<NoiseModel> {
        self.noise.filter(|nm| !nm.is_noiseless())
    }
}
