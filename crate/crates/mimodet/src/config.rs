//! Experiment configuration: a small key=value format plus defaults that
//! match the reference 4x4 16-QAM setup (M=16, X=2, L in {16, 5},
//! 100000 signals in fading blocks of 100).

use crate::detectors::{Algorithm, DetectorConfig};
use crate::harness::{DetectorSpec, ExperimentConfig};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("invalid value: {0}")]
    RangeError(String),
}

/// Overridable experiment knobs, before detector expansion.
#[derive(Debug, Clone)]
pub struct ConfigBuilder {
    pub t: usize,
    pub r: usize,
    pub order: usize,
    pub snr: Vec<f64>,
    pub signals: usize,
    pub fading_block: usize,
    pub seed: u64,
    pub workers: usize,
    pub m: usize,
    pub x: f64,
    pub l: Vec<usize>,
    pub n: usize,
    pub algorithms: Vec<String>,
}

impl Default for ConfigBuilder {
    fn default() -> Self {
        Self {
            t: 4,
            r: 4,
            order: 16,
            snr: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            signals: 100_000,
            fading_block: 100,
            seed: 1,
            workers: 0,
            m: 16,
            x: 2.0,
            l: vec![16, 5],
            n: 1,
            algorithms: vec![
                "ml".into(),
                "qrd-mld".into(),
                "qrd-mld-improved".into(),
                "dijkstra".into(),
            ],
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|p| p.trim())
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|_| format!("bad value '{p}'")))
        .collect()
}

impl ConfigBuilder {
    /// Parses the key=value config format. Unknown keys are errors; '#'
    /// starts a comment; an empty document yields the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or(ConfigError::ParseError {
                line,
                message: format!("expected key=value, got '{stripped}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |message: String| ConfigError::ParseError { line, message };
            match key {
                "t" => cfg.t = value.parse().map_err(|e| bad(format!("t: {e}")))?,
                "r" => cfg.r = value.parse().map_err(|e| bad(format!("r: {e}")))?,
                "order" => cfg.order = value.parse().map_err(|e| bad(format!("order: {e}")))?,
                "snr" => cfg.snr = parse_list(value).map_err(|e| bad(format!("snr: {e}")))?,
                "signals" => {
                    cfg.signals = value.parse().map_err(|e| bad(format!("signals: {e}")))?
                }
                "fading_block" => {
                    cfg.fading_block = value
                        .parse()
                        .map_err(|e| bad(format!("fading_block: {e}")))?
                }
                "seed" => cfg.seed = value.parse().map_err(|e| bad(format!("seed: {e}")))?,
                "workers" => {
                    cfg.workers = value.parse().map_err(|e| bad(format!("workers: {e}")))?
                }
                "M" | "m" => cfg.m = value.parse().map_err(|e| bad(format!("M: {e}")))?,
                "X" | "x" => cfg.x = value.parse().map_err(|e| bad(format!("X: {e}")))?,
                "L" | "l" => cfg.l = parse_list(value).map_err(|e| bad(format!("L: {e}")))?,
                "N" | "n" => cfg.n = value.parse().map_err(|e| bad(format!("N: {e}")))?,
                "algorithms" => {
                    cfg.algorithms = value
                        .split(',')
                        .map(|a| a.trim().to_string())
                        .filter(|a| !a.is_empty())
                        .collect()
                }
                _ => return Err(bad(format!("unknown key '{key}'"))),
            }
        }
        Ok(cfg)
    }

    /// Expands the builder into a validated [`ExperimentConfig`] with one
    /// detector entry per requested algorithm (and per L for Dijkstra).
    pub fn build(&self) -> Result<ExperimentConfig, ConfigError> {
        if self.r < self.t {
            return Err(ConfigError::RangeError(format!(
                "need r >= t, got t={}, r={}",
                self.t, self.r
            )));
        }
        if self.t == 0 {
            return Err(ConfigError::RangeError("t must be >= 1".into()));
        }
        if self.m == 0 {
            return Err(ConfigError::RangeError("M must be >= 1".into()));
        }
        if self.l.is_empty() || self.l.contains(&0) {
            return Err(ConfigError::RangeError("L values must be >= 1".into()));
        }
        if self.x < 0.0 {
            return Err(ConfigError::RangeError("X must be >= 0".into()));
        }
        if !matches!(self.order, 4 | 16 | 64) {
            return Err(ConfigError::RangeError(format!(
                "unsupported QAM order {}",
                self.order
            )));
        }
        let mut detectors = Vec::new();
        for alg in &self.algorithms {
            match alg.as_str() {
                "ml" => {
                    let mut c = DetectorConfig::new(Algorithm::BruteForceML);
                    c.n = self.n;
                    detectors.push(DetectorSpec::new("ml", c));
                }
                "qrd-mld" => {
                    let mut c = DetectorConfig::new(Algorithm::QrdMld);
                    c.m = self.m;
                    c.n = self.n;
                    detectors.push(DetectorSpec::new(format!("qrd-mld(M={})", self.m), c));
                }
                "qrd-mld-improved" => {
                    let mut c = DetectorConfig::new(Algorithm::QrdMldImproved);
                    c.m = self.m;
                    c.x = self.x;
                    c.n = self.n;
                    detectors.push(DetectorSpec::new(
                        format!("qrd-mld-improved(M={},X={})", self.m, self.x),
                        c,
                    ));
                }
                "dijkstra" => {
                    for &l in &self.l {
                        let mut c = DetectorConfig::new(Algorithm::DijkstraBounded);
                        c.l = l;
                        c.n = self.n;
                        detectors.push(DetectorSpec::new(format!("dijkstra(L={l})"), c));
                    }
                }
                "dijkstra-unbounded" => {
                    let mut c = DetectorConfig::new(Algorithm::DijkstraUnbounded);
                    c.n = self.n;
                    detectors.push(DetectorSpec::new("dijkstra-unbounded", c));
                }
                other => {
                    return Err(ConfigError::RangeError(format!(
                        "unknown algorithm '{other}'"
                    )))
                }
            }
        }
        Ok(ExperimentConfig {
            t: self.t,
            r: self.r,
            qam_order: self.order,
            snr_grid: self.snr.clone(),
            signals_total: self.signals,
            fading_block: self.fading_block,
            detectors,
            seed: self.seed,
            workers: self.workers,
        })
    }
}

/// Parses config text straight to a validated experiment config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    ConfigBuilder::parse(text)?.build()
}
