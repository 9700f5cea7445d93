//! Run configuration read from plain `key=value` files.
//!
//! Blank lines are skipped and `#` starts a comment. Keys are case sensitive;
//! numbers use Rust's `f64`/`u64` syntax. Later lines override earlier ones.

use std::fmt;
use std::path::Path;

use crate::error::{Result, YandError};
use crate::line_search::{ArmijoParams, BbVariant, ExactParams, LineSearchSpec, WolfeParams};
use crate::optimizer::{DirectionScaling, StoppingSpec, YandOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub tol_grad: f64,
    pub max_iter: usize,
    pub alpha0: f64,
    pub alpha_max: f64,
    pub beta: f64,
    pub c1: f64,
    pub c2: f64,
    pub sigma: f64,
    pub seed: u64,
    pub exact_tol: f64,
    pub scaling: DirectionScaling,
    /// Barzilai–Borwein initial step for Armijo backtracking.
    pub bb: Option<BbVariant>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tol_grad: 1e-4,
            max_iter: 200,
            alpha0: 1.0,
            alpha_max: 10.0,
            beta: 0.5,
            c1: 1e-4,
            c2: 0.9,
            sigma: 1e-4,
            seed: 42,
            exact_tol: 1e-10,
            scaling: DirectionScaling::Curvature,
            bb: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "tol_grad",
    "max_iter",
    "alpha0",
    "alpha_max",
    "beta",
    "c1",
    "c2",
    "sigma",
    "seed",
    "exact_tol",
    "scaling",
    "bb",
];

fn invalid(msg: String) -> YandError {
    YandError::InvalidParameters(msg)
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| invalid(format!("{key}: `{value}` is not a number")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|_| invalid(format!("{key}: `{value}` is not a nonnegative integer")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected key=value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "tol_grad" => self.tol_grad = parse_f64(key, value)?,
            "max_iter" => self.max_iter = parse_u64(key, value)? as usize,
            "alpha0" => self.alpha0 = parse_f64(key, value)?,
            "alpha_max" => self.alpha_max = parse_f64(key, value)?,
            "beta" => self.beta = parse_f64(key, value)?,
            "c1" => self.c1 = parse_f64(key, value)?,
            "c2" => self.c2 = parse_f64(key, value)?,
            "sigma" => self.sigma = parse_f64(key, value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            "exact_tol" => self.exact_tol = parse_f64(key, value)?,
            "scaling" => {
                self.scaling = match value {
                    "unit" => DirectionScaling::Unit,
                    "curvature" => DirectionScaling::Curvature,
                    _ => {
                        return Err(invalid(format!(
                            "scaling: expected unit or curvature, got `{value}`"
                        )))
                    }
                }
            }
            "bb" => {
                self.bb = match value {
                    "none" => None,
                    "bb1" => Some(BbVariant::BB1),
                    "bb2" => Some(BbVariant::BB2),
                    _ => {
                        return Err(invalid(format!(
                            "bb: expected none, bb1 or bb2, got `{value}`"
                        )))
                    }
                }
            }
            _ => return Err(invalid(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_grad > 0.0) {
            return Err(invalid("tol_grad must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter must be positive".into()));
        }
        for spec in [self.exact(), self.armijo(), self.wolfe()] {
            spec.validate()?;
        }
        Ok(())
    }

    pub fn stopping(&self) -> StoppingSpec {
        StoppingSpec {
            tol_grad: self.tol_grad,
            max_iter: self.max_iter,
        }
    }

    pub fn exact(&self) -> LineSearchSpec {
        LineSearchSpec::Exact(ExactParams {
            alpha_max: self.alpha_max,
            tol: self.exact_tol,
        })
    }

    pub fn armijo(&self) -> LineSearchSpec {
        LineSearchSpec::Armijo(ArmijoParams {
            sigma: self.sigma,
            beta: self.beta,
            alpha0: self.alpha0,
            use_bb: self.bb.is_some(),
            ..ArmijoParams::default()
        })
    }

    pub fn wolfe(&self) -> LineSearchSpec {
        LineSearchSpec::StrongWolfe(WolfeParams {
            c1: self.c1,
            c2: self.c2,
            alpha0: self.alpha0,
            alpha_max: self.alpha_max,
            ..WolfeParams::default()
        })
    }

    pub fn yand_options(&self) -> YandOptions {
        YandOptions {
            scaling: self.scaling,
            bb_variant: self.bb.unwrap_or(BbVariant::BB1),
            ..YandOptions::default()
        }
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tol_grad={}", fmt_sig17(self.tol_grad))?;
        writeln!(f, "max_iter={}", self.max_iter)?;
        writeln!(f, "alpha0={}", fmt_sig17(self.alpha0))?;
        writeln!(f, "alpha_max={}", fmt_sig17(self.alpha_max))?;
        writeln!(f, "beta={}", fmt_sig17(self.beta))?;
        writeln!(f, "c1={}", fmt_sig17(self.c1))?;
        writeln!(f, "c2={}", fmt_sig17(self.c2))?;
        writeln!(f, "sigma={}", fmt_sig17(self.sigma))?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "exact_tol={}", fmt_sig17(self.exact_tol))?;
        let scaling = match self.scaling {
            DirectionScaling::Unit => "unit",
            DirectionScaling::Curvature => "curvature",
        };
        writeln!(f, "scaling={scaling}")?;
        let bb = match self.bb {
            None => "none",
            Some(BbVariant::BB1) => "bb1",
            Some(BbVariant::BB2) => "bb2",
        };
        writeln!(f, "bb={bb}")
    }
}

/// Formats `x` with 17 significant digits (`NaN`, `inf` and `-inf` for non-finite values).
pub fn fmt_sig17(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}
