//! Flat key-value configuration covering every tunable in the pipeline.

use std::fmt;
use std::path::Path;

use crate::contour::HyperParams;

/// Error from configuration parsing or validation.
#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    /// A line is not `key = value` (after comment stripping).
    Syntax { line: usize },
    /// The key is not a known setting; catches misspelled thresholds.
    UnknownKey { line: usize, key: String },
    BadValue { line: usize, key: String, value: String },
    DuplicateKey { line: usize, key: String },
    /// Values parsed but violate a range constraint.
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "config I/O error: {e}"),
            ConfigError::Syntax { line } => write!(f, "line {line}: expected `key = value`"),
            ConfigError::UnknownKey { line, key } => write!(f, "line {line}: unknown key {key}"),
            ConfigError::BadValue { line, key, value } => {
                write!(f, "line {line}: bad value {value:?} for {key}")
            }
            ConfigError::DuplicateKey { line, key } => {
                write!(f, "line {line}: duplicate key {key}")
            }
            ConfigError::Invalid(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ConfigError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        ConfigError::Io(e)
    }
}

/// Every tunable of the pipeline and its evaluation.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct Config {
    pub hp: HyperParams,
    /// Gaussian smoothing width for edge detection.
    pub canny_sigma: f64,
    /// Gradient-magnitude quantile used as the weak-edge threshold.
    pub canny_low_quantile: f64,
    /// Gradient-magnitude quantile used as the strong-edge threshold.
    pub canny_high_quantile: f64,
    /// Detection boxes scoring below this are ignored.
    pub detector_floor: f64,
    /// Food boxes merge only when fully contained in a shared plate box,
    /// instead of the center-containment default.
    pub strict_containment: bool,
    /// Compare squared chord deviation against `d_chord`.
    pub squared_chord: bool,
    /// Compare squared center distance against `d_f`.
    pub squared_food_distance: bool,
    /// Chamfer terms as means (true) or raw sums (false).
    pub chamfer_normalized: bool,
    /// Perimeter samples per ellipse during evaluation.
    pub n_samples: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            hp: HyperParams::set_a(),
            canny_sigma: 2.5,
            canny_low_quantile: 0.70,
            canny_high_quantile: 0.90,
            detector_floor: 0.35,
            strict_containment: false,
            squared_chord: false,
            squared_food_distance: false,
            chamfer_normalized: true,
            n_samples: 360,
        }
    }
}

impl Config {
    /// Checks all value ranges; returns the first violation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.hp.validate().map_err(ConfigError::Invalid)?;
        if !self.canny_sigma.is_finite() || self.canny_sigma <= 0.0 {
            return Err(ConfigError::Invalid(format!(
                "canny_sigma must be positive, got {}",
                self.canny_sigma
            )));
        }
        let (lo, hi) = (self.canny_low_quantile, self.canny_high_quantile);
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(ConfigError::Invalid(format!(
                "canny quantiles must satisfy 0 <= low <= high <= 1, got {lo} and {hi}"
            )));
        }
        if !(0.0..=1.0).contains(&self.detector_floor) {
            return Err(ConfigError::Invalid(format!(
                "detector_floor must lie in [0, 1], got {}",
                self.detector_floor
            )));
        }
        if self.n_samples < 3 {
            return Err(ConfigError::Invalid(format!(
                "n_samples must be at least 3, got {}",
                self.n_samples
            )));
        }
        Ok(())
    }

    /// Serializes to the same flat text format `parse_config` reads.
    pub fn to_text(&self) -> String {
        let hp = &self.hp;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("g_m", hp.g_m.to_string());
        kv("s", hp.s.to_string());
        kv("epsilon", hp.epsilon.to_string());
        kv("l_min", hp.l_min.to_string());
        kv("d_chord", hp.d_chord.to_string());
        kv("h_gap", hp.h_gap.to_string());
        kv("m_score", hp.m_score.to_string());
        kv("a_p", hp.a_p.to_string());
        kv("d_f", hp.d_f.to_string());
        kv("canny_sigma", self.canny_sigma.to_string());
        kv("canny_low_quantile", self.canny_low_quantile.to_string());
        kv("canny_high_quantile", self.canny_high_quantile.to_string());
        kv("detector_floor", self.detector_floor.to_string());
        kv("strict_containment", self.strict_containment.to_string());
        kv("squared_chord", self.squared_chord.to_string());
        kv("squared_food_distance", self.squared_food_distance.to_string());
        kv("chamfer_normalized", self.chamfer_normalized.to_string());
        kv("n_samples", self.n_samples.to_string());
        s
    }
}

/// Reads a config file; keys not present keep their defaults.
pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Parses `key = value` lines with `#` comments into a validated config.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    let mut seen: Vec<String> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
        let (key, value) = (key.trim(), value.trim());
        if seen.iter().any(|k| k == key) {
            return Err(ConfigError::DuplicateKey { line, key: key.into() });
        }

        let bad = || ConfigError::BadValue { line, key: key.into(), value: value.into() };
        let real = || value.parse::<f64>().map_err(|_| bad());
        let count = || value.parse::<usize>().map_err(|_| bad());
        let flag = || value.parse::<bool>().map_err(|_| bad());

        match key {
            "g_m" => cfg.hp.g_m = real()?,
            "s" => cfg.hp.s = count()?,
            "epsilon" => cfg.hp.epsilon = real()?,
            "l_min" => cfg.hp.l_min = count()?,
            "d_chord" => cfg.hp.d_chord = real()?,
            "h_gap" => cfg.hp.h_gap = real()?,
            "m_score" => cfg.hp.m_score = real()?,
            "a_p" => cfg.hp.a_p = real()?,
            "d_f" => cfg.hp.d_f = real()?,
            "canny_sigma" => cfg.canny_sigma = real()?,
            "canny_low_quantile" => cfg.canny_low_quantile = real()?,
            "canny_high_quantile" => cfg.canny_high_quantile = real()?,
            "detector_floor" => cfg.detector_floor = real()?,
            "strict_containment" => cfg.strict_containment = flag()?,
            "squared_chord" => cfg.squared_chord = flag()?,
            "squared_food_distance" => cfg.squared_food_distance = flag()?,
            "chamfer_normalized" => cfg.chamfer_normalized = flag()?,
            "n_samples" => cfg.n_samples = count()?,
            _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
        }
        seen.push(key.to_string());
    }

    cfg.validate()?;
    Ok(cfg)
}
