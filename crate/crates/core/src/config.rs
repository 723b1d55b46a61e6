//! Run configuration: defaults, `key = value` files, environment override.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::arc::{ScanOptions, DEFAULT_EVAL_TOL, DEFAULT_GRID, DEFAULT_MINIMA_THRESHOLD, DEFAULT_PRECISION, DEFAULT_REFINE_TOL};
use crate::error::{Error, Result};
use crate::generators::{DEFAULT_TRUNCATION, MAX_TRUNCATION};
use crate::qseries::{CoefficientDomain, MIN_PRECISION_BITS};

/// Environment variable consulted for the default precision.
pub const PRECISION_ENV: &str = "SERRE_ZEROS_PRECISION";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainChoice {
    Exact,
    Float,
}

/// Threshold for flagging local minima of `|F|` as suspected even zeros.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinimaThreshold {
    /// Relative to the local window maximum, at the default ratio.
    Adaptive,
    Relative(f64),
}

impl MinimaThreshold {
    pub fn ratio(self) -> f64 {
        match self {
            MinimaThreshold::Adaptive => DEFAULT_MINIMA_THRESHOLD,
            MinimaThreshold::Relative(r) => r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub precision_bits: u32,
    pub truncation: usize,
    pub grid: usize,
    pub refine_tol: f64,
    pub minima_threshold: MinimaThreshold,
    pub eval_tol: f64,
    /// Domain in which parsed forms are stored. Construction is always exact.
    pub domain: DomainChoice,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision_bits: DEFAULT_PRECISION,
            truncation: DEFAULT_TRUNCATION,
            grid: DEFAULT_GRID,
            refine_tol: DEFAULT_REFINE_TOL,
            minima_threshold: MinimaThreshold::Adaptive,
            eval_tol: DEFAULT_EVAL_TOL,
            domain: DomainChoice::Exact,
            out_dir: None,
        }
    }
}

impl RunConfig {
    /// Defaults with the precision taken from the environment when set.
    pub fn from_env() -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Ok(v) = std::env::var(PRECISION_ENV) {
            cfg.set("precision", &v).map_err(|e| Error::Config(format!("{PRECISION_ENV}: {e}")))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let mut cfg = RunConfig::from_env()?;
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_str(&text)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Sets one option by name. Dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("invalid value `{v}` for {key}"))
        }
        let key = key.replace('_', "-");
        match key.as_str() {
            "precision" | "precision-bits" => self.precision_bits = num(&key, value)?,
            "truncation" | "n" => self.truncation = num(&key, value)?,
            "grid" | "grid-size" => self.grid = num(&key, value)?,
            "refine-tol" => self.refine_tol = num(&key, value)?,
            "eval-tol" => self.eval_tol = num(&key, value)?,
            "minima-threshold" => {
                self.minima_threshold = if value == "adaptive" {
                    MinimaThreshold::Adaptive
                } else {
                    MinimaThreshold::Relative(num(&key, value)?)
                }
            }
            "domain" => {
                self.domain = match value {
                    "exact" => DomainChoice::Exact,
                    "float" => DomainChoice::Float,
                    _ => return Err(format!("domain must be `exact` or `float`, got `{value}`")),
                }
            }
            "out-dir" | "output" => self.out_dir = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < MIN_PRECISION_BITS {
            return Err(Error::InvalidPrecision(self.precision_bits));
        }
        if self.truncation == 0 || self.truncation > MAX_TRUNCATION {
            return Err(Error::Config(format!(
                "truncation must lie in 1..={MAX_TRUNCATION}, got {}",
                self.truncation
            )));
        }
        if self.grid < 8 {
            return Err(Error::Config(format!("grid must be at least 8, got {}", self.grid)));
        }
        for (name, v) in [
            ("refine-tol", self.refine_tol),
            ("eval-tol", self.eval_tol),
            ("minima-threshold", self.minima_threshold.ratio()),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn coefficient_domain(&self) -> CoefficientDomain {
        match self.domain {
            DomainChoice::Exact => CoefficientDomain::ExactRational,
            DomainChoice::Float => CoefficientDomain::BigFloat {
                precision_bits: self.precision_bits,
            },
        }
    }

    pub fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            grid: self.grid,
            refine_tol: self.refine_tol,
            minima_threshold: self.minima_threshold.ratio(),
            eval_tol: self.eval_tol,
        }
    }
}
