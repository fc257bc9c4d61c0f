//! Frequency-selective Rayleigh channels and narrowband interference profiles.
//!
//! Taps are independent zero-mean complex Gaussians with an exponential power
//! delay profile `E|h(n)|² = σ_h²·e^(−nΞ)`, normalized so that every subcarrier
//! has unit average energy. Frequency responses come from a direct DFT, which
//! is cheap at the handful of taps used here.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Normalization `σ_h²` that makes the tap powers sum to one.
pub fn sigma_h_sq(n_taps: usize, decay: f64) -> f64 {
    assert!(n_taps >= 1, "channel needs at least one tap");
    assert!(decay >= 0.0, "decay must be non-negative");
    if decay == 0.0 {
        return 1.0 / n_taps as f64;
    }
    (-decay).exp_m1() / (-decay * n_taps as f64).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub n_taps: usize,
    pub decay: f64,
    pub n_subcarriers: usize,
}

impl ChannelParams {
    pub fn new(n_taps: usize, decay: f64, n_subcarriers: usize) -> Result<Self> {
        if n_taps == 0 || n_subcarriers == 0 {
            return Err(Error::InvalidInput(
                "tap count and subcarrier count must be positive".into(),
            ));
        }
        if n_taps > n_subcarriers {
            return Err(Error::InvalidInput(format!(
                "{n_taps} taps exceed {n_subcarriers} subcarriers"
            )));
        }
        if !(decay.is_finite() && decay >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "decay must be finite and non-negative, got {decay}"
            )));
        }
        Ok(Self {
            n_taps,
            decay,
            n_subcarriers,
        })
    }

    pub fn sigma_h_sq(&self) -> f64 {
        sigma_h_sq(self.n_taps, self.decay)
    }

    /// Expected power of each tap.
    pub fn tap_powers(&self) -> Vec<f64> {
        let s = self.sigma_h_sq();
        (0..self.n_taps)
            .map(|n| s * (-(n as f64) * self.decay).exp())
            .collect()
    }
}

/// One draw of the channel: taps, frequency response and its squared magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub taps: Vec<Complex64>,
    pub gains: Vec<Complex64>,
    pub gain_sq: Vec<f64>,
}

impl ChannelRealization {
    /// Builds the realization from time-domain taps via a direct DFT.
    pub fn from_taps(taps: Vec<Complex64>, n_subcarriers: usize) -> Self {
        let n = n_subcarriers as f64;
        let gains: Vec<Complex64> = (0..n_subcarriers)
            .map(|i| {
                taps.iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (k, &h)| {
                        // reduce k·i mod N before scaling so the phase stays exact for large N
                        let phase = -2.0 * PI * ((k * i) % n_subcarriers) as f64 / n;
                        acc + h * Complex64::from_polar(1.0, phase)
                    })
            })
            .collect();
        let gain_sq = gains.iter().map(|g| g.norm_sqr()).collect();
        Self {
            taps,
            gains,
            gain_sq,
        }
    }

    pub fn tap_energy(&self) -> f64 {
        self.taps.iter().map(|h| h.norm_sqr()).sum()
    }
}

/// Pair of independent standard normals by the Box-Muller transform.
fn standard_normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // 1 − U lies in (0, 1], keeping the logarithm finite
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Draws a channel whose tap `n` is complex Gaussian with variance `σ_h²·e^(−nΞ)`.
pub fn draw_realization<R: Rng + ?Sized>(
    params: &ChannelParams,
    rng: &mut R,
) -> ChannelRealization {
    let taps = params
        .tap_powers()
        .into_iter()
        .map(|power| {
            let (re, im) = standard_normal_pair(rng);
            Complex64::new(re, im) * (power / 2.0).sqrt()
        })
        .collect();
    ChannelRealization::from_taps(taps, params.n_subcarriers)
}

/// Independent random stream of one Monte-Carlo trial.
///
/// The stream depends only on `(master_seed, trial_index)`, never on how
/// trials are scheduled across workers.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Where the affected block of subcarriers begins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartIndex {
    At(usize),
    Centered,
}

impl Default for StartIndex {
    fn default() -> Self {
        StartIndex::At(0)
    }
}

impl StartIndex {
    pub fn resolve(self, n_subcarriers: usize, n_affected: usize) -> usize {
        match self {
            StartIndex::At(i) => i,
            StartIndex::Centered => n_subcarriers.saturating_sub(n_affected) / 2,
        }
    }
}

/// Per-subcarrier interference variances.
///
/// A scale of `+inf` is the strong-interference limit: affected subcarriers
/// get infinite variance and are always nulled.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceProfile {
    pub variances: Vec<f64>,
    pub n_affected: usize,
    pub shape_beta: f64,
    pub scale: f64,
    pub start_index: usize,
}

impl InterferenceProfile {
    pub fn none(n_subcarriers: usize) -> Self {
        Self {
            variances: vec![0.0; n_subcarriers],
            n_affected: 0,
            shape_beta: 0.0,
            scale: 0.0,
            start_index: 0,
        }
    }

    pub fn affected_range(&self) -> std::ops::Range<usize> {
        self.start_index..self.start_index + self.n_affected
    }

    pub fn is_affected(&self, index: usize) -> bool {
        self.affected_range().contains(&index)
    }
}

/// Contiguous block of `n_affected` subcarriers with variance `κ·e^(−β·x)`.
pub fn interference_profile(
    n_subcarriers: usize,
    n_affected: usize,
    beta: f64,
    scale: f64,
    start: StartIndex,
) -> Result<InterferenceProfile> {
    let start_index = start.resolve(n_subcarriers, n_affected);
    if n_affected > n_subcarriers || start_index + n_affected > n_subcarriers {
        return Err(Error::InvalidInput(format!(
            "interference block [{start_index}, {}) does not fit in {n_subcarriers} subcarriers",
            start_index + n_affected
        )));
    }
    if scale.is_nan() || scale < 0.0 {
        return Err(Error::InvalidInput(format!(
            "interference scale must be non-negative, got {scale}"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "beta must be finite, got {beta}"
        )));
    }
    let mut variances = vec![0.0; n_subcarriers];
    if scale > 0.0 {
        for x in 0..n_affected {
            variances[start_index + x] = scale * (-beta * x as f64).exp();
        }
    }
    Ok(InterferenceProfile {
        variances,
        n_affected,
        shape_beta: beta,
        scale,
        start_index,
    })
}
