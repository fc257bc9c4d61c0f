//! Closed-form joint bit and power loading.
//!
//! Each subcarrier minimizes `α·P − (1−α)·b` subject to its BER constraint.
//! The problem separates per subcarrier, and when the constraint binds the
//! stationary point has the closed form
//!
//! ```text
//!   Γ  = (1 − α) / (α · ln 2)
//!   b* = log2( Γ · 1.6 · C / −ln(5·t) )
//!   P* = Γ · (1 − 2^(−b*))
//! ```
//!
//! A subcarrier is loaded only when `b* ≥ 2` (the smallest square QAM), which
//! is equivalent to `C ≥ 4·(−ln(5·t)) / (1.6·Γ)`. Loaded subcarriers have their
//! bit count rounded to the nearest integer and their power recomputed so the
//! BER target is met with equality. Everything is O(N) and non-iterative.

use crate::error::{Error, Result};
use crate::model::{self, BerTarget, Cinr, BER_EXPONENT};

/// Smallest admissible constellation, in bits.
pub const MIN_QAM_BITS: u32 = 2;

/// Weight α of the power objective against the throughput objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffWeight {
    alpha: f64,
    gamma: f64,
}

impl TradeoffWeight {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            gamma: (1.0 - alpha) / (alpha * std::f64::consts::LN_2),
        })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `Γ = (1−α)/(α·ln 2)`, the supremum of the continuous per-subcarrier power.
    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Tie-breaking for continuous bit loads that sit exactly on `k + 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    #[default]
    HalfUp,
    HalfDown,
}

impl Rounding {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Rounding::HalfUp => (x + 0.5).floor(),
            Rounding::HalfDown => (x - 0.5).ceil(),
        }
    }
}

/// Continuous optimum of one subcarrier before rounding.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContinuousSolution {
    pub bits_cont: f64,
    pub power_cont: f64,
    pub active: bool,
}

impl ContinuousSolution {
    pub const NULLED: ContinuousSolution = ContinuousSolution {
        bits_cont: 0.0,
        power_cont: 0.0,
        active: false,
    };
}

/// Integer bit and power distribution over all subcarriers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Allocation {
    pub bits: Vec<u32>,
    pub power: Vec<f64>,
    /// Achieved BER per subcarrier; zero on nulled subcarriers.
    pub ber: Vec<f64>,
    pub total_bits: u64,
    pub total_power: f64,
}

impl Allocation {
    /// Builds an allocation and fills the totals, summing in index order.
    pub fn from_parts(bits: Vec<u32>, power: Vec<f64>, ber: Vec<f64>) -> Self {
        debug_assert_eq!(bits.len(), power.len());
        debug_assert_eq!(bits.len(), ber.len());
        let total_bits = bits.iter().map(|&b| u64::from(b)).sum();
        let total_power = power.iter().fold(0.0, |acc, &p| acc + p);
        Self {
            bits,
            power,
            ber,
            total_bits,
            total_power,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b > 0).count()
    }
}

/// Minimum CINR for which the continuous bit load reaches two bits.
pub fn cinr_threshold(weight: TradeoffWeight, target: BerTarget) -> Cinr {
    let value = 4.0 / BER_EXPONENT * target.neg_log_term() / weight.gamma();
    Cinr::new(value).expect("threshold is finite and positive")
}

/// Closed-form continuous optimum, or [`ContinuousSolution::NULLED`] below threshold.
pub fn continuous_solution(
    cinr: Cinr,
    weight: TradeoffWeight,
    target: BerTarget,
) -> ContinuousSolution {
    if cinr < cinr_threshold(weight, target) {
        return ContinuousSolution::NULLED;
    }
    let gamma = weight.gamma();
    let arg = gamma * BER_EXPONENT * cinr.get() / target.neg_log_term();
    // arg ≥ 4 up to an ulp when cinr sits exactly on the threshold
    let bits_cont = arg.log2().max(f64::from(MIN_QAM_BITS));
    let power_cont = gamma * (1.0 - arg.max(4.0).recip());
    ContinuousSolution {
        bits_cont,
        power_cont,
        active: true,
    }
}

/// Rounds a continuous solution and recomputes its power for the BER target.
pub fn round_solution(
    sol: ContinuousSolution,
    cinr: Cinr,
    target: BerTarget,
    rounding: Rounding,
) -> (u32, f64) {
    if !sol.active {
        return (0, 0.0);
    }
    let rounded = rounding.apply(sol.bits_cont);
    if rounded < f64::from(MIN_QAM_BITS) {
        // unreachable on the active region; mirrors the nulling branch of the algorithm
        return (0, 0.0);
    }
    let power = model::power_unchecked(rounded, cinr.get(), target);
    (rounded as u32, power)
}

/// Integer allocation of one subcarrier, rounding ties upward.
pub fn allocate_subcarrier(cinr: Cinr, weight: TradeoffWeight, target: BerTarget) -> (u32, f64) {
    let sol = continuous_solution(cinr, weight, target);
    round_solution(sol, cinr, target, Rounding::HalfUp)
}

/// Allocates every subcarrier independently with half-up rounding.
pub fn allocate(
    cinrs: &[Cinr],
    weight: TradeoffWeight,
    targets: &[BerTarget],
) -> Result<Allocation> {
    ProposedAllocator::new(weight).allocate(cinrs, targets)
}

/// Allocation together with the continuous optimum it was rounded from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetailedAllocation {
    pub continuous: Vec<ContinuousSolution>,
    pub allocation: Allocation,
}

impl DetailedAllocation {
    pub fn continuous_total_power(&self) -> f64 {
        self.continuous
            .iter()
            .fold(0.0, |acc, s| acc + s.power_cont)
    }
}

/// The closed-form allocator with its weight and rounding rule fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposedAllocator {
    pub weight: TradeoffWeight,
    pub rounding: Rounding,
}

impl ProposedAllocator {
    pub fn new(weight: TradeoffWeight) -> Self {
        Self {
            weight,
            rounding: Rounding::default(),
        }
    }

    pub fn with_rounding(mut self, rounding: Rounding) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn allocate(&self, cinrs: &[Cinr], targets: &[BerTarget]) -> Result<Allocation> {
        self.allocate_detailed(cinrs, targets).map(|d| d.allocation)
    }

    pub fn allocate_detailed(
        &self,
        cinrs: &[Cinr],
        targets: &[BerTarget],
    ) -> Result<DetailedAllocation> {
        if cinrs.is_empty() {
            return Err(Error::InvalidInput("no subcarriers to allocate".into()));
        }
        if cinrs.len() != targets.len() {
            return Err(Error::InvalidInput(format!(
                "{} CINRs but {} BER targets",
                cinrs.len(),
                targets.len()
            )));
        }
        let n = cinrs.len();
        let mut continuous = Vec::with_capacity(n);
        let mut bits = Vec::with_capacity(n);
        let mut power = Vec::with_capacity(n);
        let mut ber = Vec::with_capacity(n);
        for (&c, &t) in cinrs.iter().zip(targets) {
            let sol = continuous_solution(c, self.weight, t);
            let (b, p) = round_solution(sol, c, t, self.rounding);
            continuous.push(sol);
            bits.push(b);
            power.push(p);
            ber.push(if b > 0 {
                model::ber_unchecked(p, f64::from(b), c.get())
            } else {
                0.0
            });
        }
        Ok(DetailedAllocation {
            continuous,
            allocation: Allocation::from_parts(bits, power, ber),
        })
    }
}
