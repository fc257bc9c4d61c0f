//! Experiment configuration and its `key = value` text format.
//!
//! ```text
//! # comments start with '#'
//! n_subcarriers = 128
//! alpha = 0.5
//! ber_target = 1e-4          # or a comma-separated list, one per subcarrier
//! target_sir_db = 10         # calibrates interference_scale; accepts inf / -inf
//! interference_start_index = centered
//! ```
//!
//! Missing keys take their defaults, unknown keys are rejected.

use std::fmt;
use std::str::FromStr;

use crate::allocator::{Rounding, TradeoffWeight};
use crate::baseline::{BitLevelSet, GreedyBaseline, MeanBer, DEFAULT_MAX_BITS};
use crate::channel::StartIndex;
use crate::error::{Error, Result};
use crate::model::BerTarget;

/// Which loader(s) an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlgorithmSelector {
    #[default]
    Proposed,
    Baseline,
    Both,
}

/// Which subcarriers the average SNR is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrAverage {
    /// Every subcarrier, nulled ones counting as zero.
    #[default]
    AllSubcarriers,
    ActiveOnly,
}

/// BER threshold, either shared or per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub enum BerSpec {
    Uniform(f64),
    PerSubcarrier(Vec<f64>),
}

impl Default for BerSpec {
    fn default() -> Self {
        BerSpec::Uniform(1e-4)
    }
}

/// Every parameter of a Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub n_subcarriers: usize,
    pub alpha: f64,
    pub ber_target: BerSpec,
    /// σ²_n in µW.
    pub noise_var: f64,
    pub n_taps: usize,
    pub decay: f64,
    pub n_affected: usize,
    pub beta: f64,
    /// κ in µW; `+inf` nulls every affected subcarrier.
    pub interference_scale: f64,
    /// When set, κ is calibrated to hit this average SIR instead.
    pub target_sir_db: Option<f64>,
    pub interference_start_index: StartIndex,
    pub n_trials: usize,
    pub master_seed: u64,
    pub algorithm: AlgorithmSelector,
    pub baseline_max_bits: u32,
    pub baseline_mean: MeanBer,
    pub rounding: Rounding,
    pub snr_average: SnrAverage,
    pub calibration_trials: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 128,
            alpha: 0.5,
            ber_target: BerSpec::default(),
            noise_var: 1e-3,
            n_taps: 5,
            decay: 0.2,
            n_affected: 40,
            beta: -0.25,
            interference_scale: 1.0,
            target_sir_db: None,
            interference_start_index: StartIndex::At(0),
            n_trials: 1000,
            master_seed: 1,
            algorithm: AlgorithmSelector::Proposed,
            baseline_max_bits: DEFAULT_MAX_BITS,
            baseline_mean: MeanBer::Weighted,
            rounding: Rounding::HalfUp,
            snr_average: SnrAverage::AllSubcarriers,
            calibration_trials: 200,
        }
    }
}

pub const MIN_ALPHA: f64 = 0.01;
pub const MAX_ALPHA: f64 = 0.99;

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if self.n_subcarriers == 0 {
            return fail("n_subcarriers must be positive".into());
        }
        if !(MIN_ALPHA..=MAX_ALPHA).contains(&self.alpha) {
            return fail(format!(
                "alpha must lie in [{MIN_ALPHA}, {MAX_ALPHA}], got {}",
                self.alpha
            ));
        }
        if !(self.noise_var.is_finite() && self.noise_var > 0.0) {
            return fail(format!(
                "noise_var must be positive, got {}",
                self.noise_var
            ));
        }
        match &self.ber_target {
            BerSpec::Uniform(t) => check_ber(*t)?,
            BerSpec::PerSubcarrier(ts) => {
                if ts.len() != self.n_subcarriers {
                    return fail(format!(
                        "ber_target lists {} values for {} subcarriers",
                        ts.len(),
                        self.n_subcarriers
                    ));
                }
                for &t in ts {
                    check_ber(t)?;
                }
            }
        }
        if self.n_taps == 0 || self.n_taps > self.n_subcarriers {
            return fail(format!(
                "n_taps must lie in [1, n_subcarriers], got {}",
                self.n_taps
            ));
        }
        if !(self.decay.is_finite() && self.decay >= 0.0) {
            return fail(format!("decay must be non-negative, got {}", self.decay));
        }
        if self.n_affected > self.n_subcarriers {
            return fail(format!(
                "n_affected {} exceeds n_subcarriers {}",
                self.n_affected, self.n_subcarriers
            ));
        }
        let start = self
            .interference_start_index
            .resolve(self.n_subcarriers, self.n_affected);
        if start + self.n_affected > self.n_subcarriers {
            return fail(format!(
                "interference block starting at {start} overruns {} subcarriers",
                self.n_subcarriers
            ));
        }
        if !self.beta.is_finite() {
            return fail("beta must be finite".into());
        }
        if self.interference_scale.is_nan() || self.interference_scale < 0.0 {
            return fail(format!(
                "interference_scale must be non-negative, got {}",
                self.interference_scale
            ));
        }
        if matches!(self.target_sir_db, Some(v) if v.is_nan()) {
            return fail("target_sir_db is NaN".into());
        }
        if self.n_trials == 0 || self.calibration_trials == 0 {
            return fail("trial counts must be positive".into());
        }
        if self.baseline_max_bits < 2 {
            return fail("baseline_max_bits must be at least 2".into());
        }
        Ok(())
    }

    pub fn weight(&self) -> Result<TradeoffWeight> {
        TradeoffWeight::new(self.alpha)
    }

    pub fn ber_targets(&self) -> Result<Vec<BerTarget>> {
        match &self.ber_target {
            BerSpec::Uniform(t) => Ok(vec![BerTarget::new(*t)?; self.n_subcarriers]),
            BerSpec::PerSubcarrier(ts) => ts.iter().map(|&t| BerTarget::new(t)).collect(),
        }
    }

    /// Mean-BER target of the baseline: the average of the per-subcarrier thresholds.
    pub fn mean_ber_target(&self) -> Result<BerTarget> {
        match &self.ber_target {
            BerSpec::Uniform(t) => BerTarget::new(*t),
            BerSpec::PerSubcarrier(ts) => BerTarget::new(ts.iter().sum::<f64>() / ts.len() as f64),
        }
    }

    pub fn baseline(&self) -> Result<GreedyBaseline> {
        Ok(GreedyBaseline::new(
            BitLevelSet::up_to(self.baseline_max_bits)?,
            self.baseline_mean,
        ))
    }

    /// Renders the configuration in the same text format [`parse_config`] reads.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            out.push_str(&format!("{key} = {}\n", self.value_of(key)));
        }
        out
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "n_subcarriers" => self.n_subcarriers.to_string(),
            "alpha" => self.alpha.to_string(),
            "ber_target" => match &self.ber_target {
                BerSpec::Uniform(t) => format!("{t:e}"),
                BerSpec::PerSubcarrier(ts) => ts
                    .iter()
                    .map(|t| format!("{t:e}"))
                    .collect::<Vec<_>>()
                    .join(","),
            },
            "noise_var" => format!("{:e}", self.noise_var),
            "n_taps" => self.n_taps.to_string(),
            "decay" => self.decay.to_string(),
            "n_affected" => self.n_affected.to_string(),
            "beta" => self.beta.to_string(),
            "interference_scale" => format!("{:e}", self.interference_scale),
            "target_sir_db" => self
                .target_sir_db
                .map_or_else(|| "none".to_string(), |v| v.to_string()),
            "interference_start_index" => match self.interference_start_index {
                StartIndex::At(i) => i.to_string(),
                StartIndex::Centered => "centered".into(),
            },
            "n_trials" => self.n_trials.to_string(),
            "master_seed" => self.master_seed.to_string(),
            "algorithm" => self.algorithm.to_string(),
            "baseline_max_bits" => self.baseline_max_bits.to_string(),
            "baseline_mean" => match self.baseline_mean {
                MeanBer::Weighted => "weighted".into(),
                MeanBer::Unweighted => "unweighted".into(),
            },
            "rounding" => match self.rounding {
                Rounding::HalfUp => "half-up".into(),
                Rounding::HalfDown => "half-down".into(),
            },
            "snr_average" => match self.snr_average {
                SnrAverage::AllSubcarriers => "all".into(),
                SnrAverage::ActiveOnly => "active".into(),
            },
            "calibration_trials" => self.calibration_trials.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "n_subcarriers" => self.n_subcarriers = num(value)?,
            "alpha" => self.alpha = num(value)?,
            "ber_target" => {
                let parts: Vec<f64> = value
                    .split(',')
                    .map(|s| num::<f64>(s.trim()))
                    .collect::<std::result::Result<_, _>>()?;
                self.ber_target = if parts.len() == 1 {
                    BerSpec::Uniform(parts[0])
                } else {
                    BerSpec::PerSubcarrier(parts)
                };
            }
            "noise_var" => self.noise_var = num(value)?,
            "n_taps" => self.n_taps = num(value)?,
            "decay" => self.decay = num(value)?,
            "n_affected" => self.n_affected = num(value)?,
            "beta" => self.beta = num(value)?,
            "interference_scale" => self.interference_scale = num(value)?,
            "target_sir_db" => {
                self.target_sir_db = if value.eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(num(value)?)
                }
            }
            "interference_start_index" => {
                self.interference_start_index = if value.eq_ignore_ascii_case("centered") {
                    StartIndex::Centered
                } else {
                    StartIndex::At(num(value)?)
                }
            }
            "n_trials" => self.n_trials = num(value)?,
            "master_seed" => self.master_seed = num(value)?,
            "algorithm" => self.algorithm = value.parse()?,
            "baseline_max_bits" => self.baseline_max_bits = num(value)?,
            "baseline_mean" => {
                self.baseline_mean = match value {
                    "weighted" => MeanBer::Weighted,
                    "unweighted" => MeanBer::Unweighted,
                    _ => return Err(format!("expected weighted|unweighted, got '{value}'")),
                }
            }
            "rounding" => {
                self.rounding = match value {
                    "half-up" => Rounding::HalfUp,
                    "half-down" => Rounding::HalfDown,
                    _ => return Err(format!("expected half-up|half-down, got '{value}'")),
                }
            }
            "snr_average" => {
                self.snr_average = match value {
                    "all" => SnrAverage::AllSubcarriers,
                    "active" => SnrAverage::ActiveOnly,
                    _ => return Err(format!("expected all|active, got '{value}'")),
                }
            }
            "calibration_trials" => self.calibration_trials = num(value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }
}

/// Recognized configuration keys, in canonical order.
pub const KEYS: [&str; 19] = [
    "n_subcarriers",
    "alpha",
    "ber_target",
    "noise_var",
    "n_taps",
    "decay",
    "n_affected",
    "beta",
    "interference_scale",
    "target_sir_db",
    "interference_start_index",
    "n_trials",
    "master_seed",
    "algorithm",
    "baseline_max_bits",
    "baseline_mean",
    "rounding",
    "snr_average",
    "calibration_trials",
];

fn check_ber(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 0.2) {
        return Err(Error::Validation(format!(
            "ber_target must lie in (0, 0.2), got {t}"
        )));
    }
    Ok(())
}

fn num<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| format!("cannot parse '{value}': {e}"))
}

impl FromStr for AlgorithmSelector {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "proposed" => Ok(Self::Proposed),
            "baseline" => Ok(Self::Baseline),
            "both" => Ok(Self::Both),
            _ => Err(format!("expected proposed|baseline|both, got '{s}'")),
        }
    }
}

impl fmt::Display for AlgorithmSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Proposed => "proposed",
            Self::Baseline => "baseline",
            Self::Both => "both",
        })
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<LinkConfig> {
    let mut config = LinkConfig::default();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 'key = value', got '{line}'"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty key or value".into(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
        config.set(key, value).map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
    }
    config.validate()?;
    Ok(config)
}
