//! Monte-Carlo trials, metric aggregation and parameter sweeps.
//!
//! A trial depends only on `(config, trial_index)`: its channel comes from a
//! dedicated random stream. Trials run on a worker pool and are reduced in
//! ascending index order, so results are bit-identical for any worker count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::calibrate::resolve_interference_scale;
use super::config::{AlgorithmSelector, LinkConfig, SnrAverage};
use crate::allocator::ProposedAllocator;
use crate::baseline::{uniform_power, GreedyBaseline};
use crate::channel::{
    draw_realization, interference_profile, trial_rng, ChannelParams, ChannelRealization,
    InterferenceProfile,
};
use crate::error::{Error, Result};
use crate::model::{cinr, to_db, BerTarget, Cinr, SubcarrierChannelState};

/// Loader run in a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Proposed,
    /// Greedy loading at this uniform per-subcarrier power (µW).
    Baseline {
        power: f64,
    },
}

impl Algorithm {
    pub fn tag(&self) -> AlgorithmTag {
        match self {
            Algorithm::Proposed => AlgorithmTag::Proposed,
            Algorithm::Baseline { .. } => AlgorithmTag::Baseline,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmTag {
    Proposed,
    Baseline,
}

impl fmt::Display for AlgorithmTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmTag::Proposed => "proposed",
            AlgorithmTag::Baseline => "baseline",
        })
    }
}

impl FromStr for AlgorithmTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "proposed" => Ok(AlgorithmTag::Proposed),
            "baseline" => Ok(AlgorithmTag::Baseline),
            _ => Err(format!("unknown algorithm tag '{s}'")),
        }
    }
}

/// Per-trial totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub total_bits: u64,
    /// µW.
    pub total_power: f64,
    /// Total power before rounding; zero for the baseline.
    pub continuous_power: f64,
    pub active: usize,
    /// Σ_i P_i·|H_i|²/σ²_n over all subcarriers.
    pub snr_sum: f64,
    /// Σ_i P_i·|H_i|²/σ²_u,i over the affected subcarriers.
    pub sir_sum: f64,
}

/// Averages of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub algorithm: AlgorithmTag,
    pub noise_var: f64,
    pub avg_snr_db: f64,
    /// Absent when no subcarrier is affected by interference.
    pub avg_sir_db: Option<f64>,
    pub avg_throughput: f64,
    pub avg_power: f64,
    pub active_fraction: f64,
    pub n_trials: usize,
    pub master_seed: u64,
}

/// Worker pool for trials.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    /// `workers = 0` uses one worker per available core.
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Evaluates `f` for trials `0..n`, returned in index order.
    pub fn map_trials<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool
            .install(|| (0..n as u64).into_par_iter().map(&f).collect())
    }
}

/// A configuration bound to a concrete interference scale.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: LinkConfig,
    params: ChannelParams,
    profile: InterferenceProfile,
    allocator: ProposedAllocator,
    baseline: GreedyBaseline,
    targets: Vec<BerTarget>,
    mean_target: BerTarget,
}

impl Experiment {
    /// Uses `config.interference_scale` as is; see [`Experiment::resolve`] for SIR targets.
    pub fn new(config: LinkConfig) -> Result<Self> {
        let scale = config.interference_scale;
        Self::with_scale(config, scale)
    }

    /// Calibrates the interference scale first when the config asks for a target SIR.
    pub fn resolve(config: LinkConfig, runner: &Runner) -> Result<Self> {
        let scale = resolve_interference_scale(&config, runner)?;
        Self::with_scale(config, scale)
    }

    pub fn with_scale(config: LinkConfig, scale: f64) -> Result<Self> {
        config.validate()?;
        let n = config.n_subcarriers;
        let params = ChannelParams::new(config.n_taps, config.decay, n)?;
        let profile = if config.n_affected == 0 {
            InterferenceProfile::none(n)
        } else {
            interference_profile(
                n,
                config.n_affected,
                config.beta,
                scale,
                config.interference_start_index,
            )?
        };
        let allocator = ProposedAllocator::new(config.weight()?).with_rounding(config.rounding);
        Ok(Self {
            baseline: config.baseline()?,
            targets: config.ber_targets()?,
            mean_target: config.mean_ber_target()?,
            config,
            params,
            profile,
            allocator,
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    pub fn profile(&self) -> &InterferenceProfile {
        &self.profile
    }

    pub fn allocator(&self) -> &ProposedAllocator {
        &self.allocator
    }

    pub fn targets(&self) -> &[BerTarget] {
        &self.targets
    }

    pub fn realization(&self, trial_index: u64) -> ChannelRealization {
        draw_realization(
            &self.params,
            &mut trial_rng(self.config.master_seed, trial_index),
        )
    }

    pub fn cinrs(&self, realization: &ChannelRealization) -> Vec<Cinr> {
        realization
            .gain_sq
            .iter()
            .zip(&self.profile.variances)
            .map(|(&g, &u)| {
                cinr(SubcarrierChannelState::new(g, self.config.noise_var, u))
                    .expect("validated channel state")
            })
            .collect()
    }

    /// Draws the trial's channel, loads it and records its totals.
    pub fn run_trial(&self, trial_index: u64, algorithm: Algorithm) -> TrialRecord {
        let realization = self.realization(trial_index);
        let cinrs = self.cinrs(&realization);
        let (allocation, continuous_power) = match algorithm {
            Algorithm::Proposed => {
                let detailed = self
                    .allocator
                    .allocate_detailed(&cinrs, &self.targets)
                    .expect("lengths match by construction");
                let cont = detailed.continuous_total_power();
                (detailed.allocation, cont)
            }
            Algorithm::Baseline { power } => {
                (self.baseline.allocate(&cinrs, power, self.mean_target), 0.0)
            }
        };

        let noise = self.config.noise_var;
        let mut snr_sum = 0.0;
        let mut sir_sum = 0.0;
        for (i, (&p, &g)) in allocation
            .power
            .iter()
            .zip(&realization.gain_sq)
            .enumerate()
        {
            snr_sum += p * g / noise;
            if self.profile.is_affected(i) {
                sir_sum += sir(p, g, self.profile.variances[i]);
            }
        }
        TrialRecord {
            trial_index,
            total_bits: allocation.total_bits,
            total_power: allocation.total_power,
            continuous_power,
            active: allocation.active_count(),
            snr_sum,
            sir_sum,
        }
    }

    pub fn run_trials(
        &self,
        algorithm: Algorithm,
        n_trials: usize,
        runner: &Runner,
    ) -> Vec<TrialRecord> {
        runner.map_trials(n_trials, |k| self.run_trial(k, algorithm))
    }

    /// Averages trial records into one sweep point.
    pub fn aggregate(&self, records: &[TrialRecord], tag: AlgorithmTag) -> Result<MetricsRecord> {
        aggregate(records, tag, &self.config)
    }
}

/// Instantaneous SIR of one affected subcarrier; unloaded subcarriers count as zero.
fn sir(power: f64, gain_sq: f64, interf_var: f64) -> f64 {
    if power == 0.0 {
        0.0
    } else if interf_var == 0.0 {
        f64::INFINITY
    } else {
        power * gain_sq / interf_var
    }
}

/// Reduces trial records, summing in ascending trial order.
pub fn aggregate(
    records: &[TrialRecord],
    tag: AlgorithmTag,
    config: &LinkConfig,
) -> Result<MetricsRecord> {
    if records.is_empty() {
        return Err(Error::InvalidInput("cannot aggregate zero trials".into()));
    }
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.trial_index);

    let n = sorted.len() as f64;
    let n_sub = config.n_subcarriers as f64;
    let (mut bits, mut power, mut active, mut snr, mut sir) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in &sorted {
        bits += r.total_bits as f64;
        power += r.total_power;
        active += r.active as f64;
        snr += r.snr_sum;
        sir += r.sir_sum;
    }
    let snr_den = match config.snr_average {
        SnrAverage::AllSubcarriers => n_sub * n,
        SnrAverage::ActiveOnly => active,
    };
    let avg_snr = if snr_den == 0.0 { 0.0 } else { snr / snr_den };
    let avg_sir_db = (config.n_affected > 0).then(|| to_db(sir / (config.n_affected as f64 * n)));
    Ok(MetricsRecord {
        algorithm: tag,
        noise_var: config.noise_var,
        avg_snr_db: to_db(avg_snr),
        avg_sir_db,
        avg_throughput: bits / n,
        avg_power: power / n,
        active_fraction: active / (n_sub * n),
        n_trials: sorted.len(),
        master_seed: config.master_seed,
    })
}

/// Paired proposed/baseline metrics at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparePoint {
    pub proposed: MetricsRecord,
    pub baseline: MetricsRecord,
    /// Uniform per-subcarrier power handed to the baseline (µW).
    pub baseline_power: f64,
}

fn at_noise(config: &LinkConfig, noise_var: f64) -> LinkConfig {
    LinkConfig {
        noise_var,
        ..config.clone()
    }
}

/// Runs both loaders on the same channels; the baseline spends the proposed
/// loader's average power spread evenly over all subcarriers.
pub fn compare_at(exp: &Experiment, runner: &Runner) -> Result<ComparePoint> {
    let n_trials = exp.config.n_trials;
    let proposed = exp.aggregate(
        &exp.run_trials(Algorithm::Proposed, n_trials, runner),
        AlgorithmTag::Proposed,
    )?;
    let baseline_power = uniform_power(proposed.avg_power, exp.config.n_subcarriers);
    let baseline = exp.aggregate(
        &exp.run_trials(
            Algorithm::Baseline {
                power: baseline_power,
            },
            n_trials,
            runner,
        ),
        AlgorithmTag::Baseline,
    )?;
    Ok(ComparePoint {
        proposed,
        baseline,
        baseline_power,
    })
}

/// One proposed-vs-baseline comparison per noise variance.
pub fn compare(
    config: &LinkConfig,
    noise_grid: &[f64],
    runner: &Runner,
) -> Result<Vec<ComparePoint>> {
    noise_grid
        .iter()
        .map(|&nv| compare_at(&Experiment::resolve(at_noise(config, nv), runner)?, runner))
        .collect()
}

/// Metrics per noise variance for the configured algorithm(s).
///
/// The x-coordinate of each point is its measured average SNR; the noise
/// variance is only the control knob.
pub fn sweep_noise(
    config: &LinkConfig,
    noise_grid: &[f64],
    runner: &Runner,
) -> Result<Vec<MetricsRecord>> {
    let mut out = Vec::new();
    for &nv in noise_grid {
        let exp = Experiment::resolve(at_noise(config, nv), runner)?;
        match config.algorithm {
            AlgorithmSelector::Proposed => {
                let records = exp.run_trials(Algorithm::Proposed, config.n_trials, runner);
                out.push(exp.aggregate(&records, AlgorithmTag::Proposed)?);
            }
            AlgorithmSelector::Baseline => out.push(compare_at(&exp, runner)?.baseline),
            AlgorithmSelector::Both => {
                let point = compare_at(&exp, runner)?;
                out.push(point.proposed);
                out.push(point.baseline);
            }
        }
    }
    Ok(out)
}

/// Proposed-loader metrics per weighting factor at the configured noise variance.
pub fn sweep_alpha(
    config: &LinkConfig,
    alphas: &[f64],
    runner: &Runner,
) -> Result<Vec<MetricsRecord>> {
    alphas
        .iter()
        .map(|&alpha| {
            let exp = Experiment::resolve(
                LinkConfig {
                    alpha,
                    ..config.clone()
                },
                runner,
            )?;
            let records = exp.run_trials(Algorithm::Proposed, config.n_trials, runner);
            exp.aggregate(&records, AlgorithmTag::Proposed)
        })
        .collect()
}

/// Logarithmic grid of `points` noise variances from `from` to `to` inclusive.
pub fn log_grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    assert!(from > 0.0 && to > 0.0 && points >= 2);
    let (a, b) = (from.log10(), to.log10());
    (0..points)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (points - 1) as f64))
        .collect()
}

/// Default noise grid: 1e-1 down to 1e-6 µW, two points per decade.
pub fn default_noise_grid() -> Vec<f64> {
    log_grid(1e-1, 1e-6, 11)
}
