//! Interference scale calibration against a target average SIR.
//!
//! The measured SIR falls by roughly 10 dB per decade of scale, so the search
//! runs on `log10(κ)`: a slope-guided step from the latest point, kept inside
//! the bracket once one is known and replaced by bisection when it would leave
//! it. Every evaluation reuses the same batch of trials, which makes the
//! measured SIR a deterministic function of κ.

use super::config::LinkConfig;
use super::experiment::{Algorithm, AlgorithmTag, Experiment, Runner};
use crate::error::{Error, Result};

/// Acceptable distance from the target, in dB.
pub const SIR_TOLERANCE_DB: f64 = 0.1;
/// Evaluation budget of one calibration.
pub const MAX_ITERATIONS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub scale: f64,
    pub achieved_sir_db: f64,
    pub iterations: usize,
}

/// Average SIR (dB) of the proposed loader on the calibration batch at scale κ.
pub fn measure_sir_db(config: &LinkConfig, scale: f64, runner: &Runner) -> Result<f64> {
    let exp = Experiment::with_scale(config.clone(), scale)?;
    let records = exp.run_trials(Algorithm::Proposed, config.calibration_trials, runner);
    let metrics = exp.aggregate(&records, AlgorithmTag::Proposed)?;
    metrics
        .avg_sir_db
        .ok_or_else(|| Error::InvalidInput("no affected subcarriers to calibrate".into()))
}

/// Finds κ such that the measured average SIR is within 0.1 dB of `target_sir_db`.
pub fn calibrate_interference_scale(
    config: &LinkConfig,
    target_sir_db: f64,
    runner: &Runner,
) -> Result<Calibration> {
    if config.n_affected == 0 {
        return Err(Error::InvalidInput(
            "SIR calibration needs at least one affected subcarrier".into(),
        ));
    }
    if target_sir_db.is_nan() {
        return Err(Error::InvalidInput("target SIR is NaN".into()));
    }
    if target_sir_db == f64::INFINITY {
        return Ok(Calibration {
            scale: 0.0,
            achieved_sir_db: f64::INFINITY,
            iterations: 0,
        });
    }
    if target_sir_db == f64::NEG_INFINITY {
        return Ok(Calibration {
            scale: f64::INFINITY,
            achieved_sir_db: f64::NEG_INFINITY,
            iterations: 0,
        });
    }

    // (log10 κ, SIR) with SIR above the target, and below it
    let mut above: Option<(f64, f64)> = None;
    let mut below: Option<(f64, f64)> = None;
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    let mut x = 0.0;

    for iteration in 1..=MAX_ITERATIONS {
        let sir = measure_sir_db(config, 10f64.powf(x), runner)?;
        let gap = sir - target_sir_db;
        if gap.abs() < best.2 {
            best = (x, sir, gap.abs());
        }
        if gap.abs() <= SIR_TOLERANCE_DB {
            return Ok(Calibration {
                scale: 10f64.powf(x),
                achieved_sir_db: sir,
                iterations: iteration,
            });
        }
        if gap > 0.0 {
            above = Some((x, sir));
        } else {
            below = Some((x, sir));
        }
        let step = if sir.is_finite() {
            x + gap / 10.0
        } else {
            // everything affected got nulled: back off hard
            x - 2.0
        };
        x = match (above, below) {
            (Some((lo, _)), Some((hi, _))) if !(step > lo.min(hi) && step < lo.max(hi)) => {
                0.5 * (lo + hi)
            }
            _ => step,
        };
    }
    Err(Error::Calibration {
        best_scale: 10f64.powf(best.0),
        achieved_sir_db: best.1,
        iterations: MAX_ITERATIONS,
    })
}

/// Interference scale to run with: calibrated when a target SIR is configured.
pub fn resolve_interference_scale(config: &LinkConfig, runner: &Runner) -> Result<f64> {
    match config.target_sir_db {
        Some(target) if config.n_affected > 0 => {
            let cal = calibrate_interference_scale(config, target, runner)?;
            log::debug!(
                "calibrated interference scale {:e} -> {:.3} dB after {} evaluations",
                cal.scale,
                cal.achieved_sir_db,
                cal.iterations
            );
            Ok(cal.scale)
        }
        _ => Ok(config.interference_scale),
    }
}
