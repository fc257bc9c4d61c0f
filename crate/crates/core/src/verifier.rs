//! First-order optimality checks for the closed-form allocation.
//!
//! With slack variables `Y²` turning each BER inequality into an equality,
//! the per-subcarrier Lagrangian is
//!
//! ```text
//!   L(P, b, Y, λ) = α·P − (1−α)·b + λ·(0.2·exp(−1.6·C·P/(2^b − 1)) − t + Y²)
//! ```
//!
//! At the closed-form point the BER constraint binds (`Y = 0`), and the
//! multiplier recovered from `∂L/∂P = 0` is strictly positive. This module
//! evaluates `λ`, the stationarity and feasibility residuals, and a brute-force
//! grid minimizer that is independent of the closed form.
//!
//! Only the binding-constraint branch is certified. The `λ = 0` branch leaves
//! an underdetermined system with no unique solution and has no counterpart
//! here.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocator::{cinr_threshold, continuous_solution, ContinuousSolution, TradeoffWeight};
use crate::error::{Error, Result};
use crate::model::{self, BerTarget, Cinr, BER_EXPONENT, BER_PREFACTOR};

/// Absolute tolerance for analytic residuals at the closed-form optimum.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Agreement tolerance between central differences and analytic derivatives.
pub const FINITE_DIFF_TOL: f64 = 1e-5;
/// Step used for central differences.
pub const FINITE_DIFF_STEP: f64 = 1e-6;

/// Multiplier and residuals of the optimality conditions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub lambda: f64,
    /// `∂L/∂P`.
    pub stationarity_p: f64,
    /// `∂L/∂b`.
    pub stationarity_b: f64,
    /// `BER(P, b) − t`; positive means infeasible.
    pub constraint: f64,
    /// `Y²` needed to close the constraint; zero when it binds or is violated.
    pub slack: f64,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity_p
            .abs()
            .max(self.stationarity_b.abs())
            .max(self.constraint.abs())
            .max(self.slack)
    }

    pub fn is_optimal(&self, tol: f64) -> bool {
        self.lambda > 0.0 && self.max_residual() < tol
    }
}

/// `λ = α / (0.2 · (1.6·C/(2^b−1)) · exp(−1.6·C·P/(2^b−1)))`.
pub fn lagrange_multiplier(
    cinr: Cinr,
    bits: f64,
    power: f64,
    weight: TradeoffWeight,
) -> Result<f64> {
    if bits.is_nan() || bits <= 0.0 || cinr.get() <= 0.0 {
        return Err(Error::Domain(format!(
            "multiplier needs bits > 0 and cinr > 0, got bits={bits}, cinr={}",
            cinr.get()
        )));
    }
    let denom = bits.exp2() - 1.0;
    let slope = BER_PREFACTOR * BER_EXPONENT * cinr.get() / denom
        * (-BER_EXPONENT * cinr.get() * power / denom).exp();
    if slope == 0.0 || !slope.is_finite() {
        return Err(Error::Domain(format!(
            "BER slope degenerate at bits={bits}, power={power}"
        )));
    }
    Ok(weight.alpha() / slope)
}

/// Lagrangian of one subcarrier with `Y = 0`.
pub fn lagrangian(
    cinr: Cinr,
    bits: f64,
    power: f64,
    lambda: f64,
    weight: TradeoffWeight,
    target: BerTarget,
) -> f64 {
    let a = weight.alpha();
    a * power - (1.0 - a) * bits
        + lambda * (model::ber_unchecked(power, bits, cinr.get()) - target.get())
}

fn partials(cinr: f64, bits: f64, power: f64, lambda: f64, alpha: f64) -> (f64, f64) {
    let two_b = bits.exp2();
    let denom = two_b - 1.0;
    let e = (-BER_EXPONENT * cinr * power / denom).exp();
    let d_power = alpha - BER_PREFACTOR * lambda * BER_EXPONENT * cinr / denom * e;
    let d_bits = -(1.0 - alpha)
        + BER_PREFACTOR * std::f64::consts::LN_2 * lambda * BER_EXPONENT * cinr * power * two_b
            / (denom * denom)
            * e;
    (d_power, d_bits)
}

/// Residuals at an arbitrary point, with `λ` recovered from `∂L/∂P = 0`.
pub fn kkt_residuals_at(
    cinr: Cinr,
    bits: f64,
    power: f64,
    weight: TradeoffWeight,
    target: BerTarget,
) -> Result<KktReport> {
    let lambda = lagrange_multiplier(cinr, bits, power, weight)?;
    let (stationarity_p, stationarity_b) =
        partials(cinr.get(), bits, power, lambda, weight.alpha());
    let constraint = model::ber_unchecked(power, bits, cinr.get()) - target.get();
    Ok(KktReport {
        lambda,
        stationarity_p,
        stationarity_b,
        constraint,
        slack: (-constraint).max(0.0),
    })
}

/// Residuals at a closed-form solution. Nulled subcarriers are not covered.
pub fn kkt_residuals(
    cinr: Cinr,
    sol: &ContinuousSolution,
    weight: TradeoffWeight,
    target: BerTarget,
) -> Result<KktReport> {
    if !sol.active {
        return Err(Error::NotApplicable(
            "optimality conditions only apply to active subcarriers".into(),
        ));
    }
    kkt_residuals_at(cinr, sol.bits_cont, sol.power_cont, weight, target)
}

/// Central-difference gradient `(∂L/∂P, ∂L/∂b)` with `λ` held fixed.
pub fn numerical_gradient(
    cinr: Cinr,
    bits: f64,
    power: f64,
    lambda: f64,
    weight: TradeoffWeight,
    target: BerTarget,
    step: f64,
) -> (f64, f64) {
    let l = |b: f64, p: f64| lagrangian(cinr, b, p, lambda, weight, target);
    let d_power = (l(bits, power + step) - l(bits, power - step)) / (2.0 * step);
    let d_bits = (l(bits + step, power) - l(bits - step, power)) / (2.0 * step);
    (d_power, d_bits)
}

/// Grid minimizer returned by [`grid_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptimum {
    pub bits: f64,
    pub power: f64,
    pub objective: f64,
    pub step: f64,
}

/// Weighted objective `α·P − (1−α)·b`. Nulling a subcarrier scores zero.
pub fn objective(weight: TradeoffWeight, power: f64, bits: f64) -> f64 {
    weight.alpha() * power - (1.0 - weight.alpha()) * bits
}

/// Brute-force minimizer of the weighted objective over `b ∈ [2, b_max]`.
///
/// For a fixed `b` the objective falls as `P` falls, until the BER constraint
/// binds, so only the binding manifold `P(b)` needs to be searched. Ties go to
/// the lowest `b`.
pub fn grid_oracle(
    cinr: Cinr,
    weight: TradeoffWeight,
    target: BerTarget,
    b_max: f64,
    steps: usize,
) -> Result<GridOptimum> {
    if steps < 1000 {
        return Err(Error::InvalidInput(format!(
            "grid oracle needs at least 1000 steps, got {steps}"
        )));
    }
    if !(b_max.is_finite() && b_max > 2.0) {
        return Err(Error::InvalidInput(format!(
            "b_max must exceed 2, got {b_max}"
        )));
    }
    if cinr.get() <= 0.0 {
        return Err(Error::Infeasible(
            "zero CINR has no finite-power point".into(),
        ));
    }
    let lo = 2.0;
    let step = (b_max - lo) / (steps - 1) as f64;
    let mut best = GridOptimum {
        bits: f64::NAN,
        power: f64::NAN,
        objective: f64::INFINITY,
        step,
    };
    for k in 0..steps {
        let bits = lo + step * k as f64;
        // P(b) = (2^b − 1)·(−ln 5t)/(1.6·C), written out rather than shared with the allocator
        let power = (bits.exp2() - 1.0) * -(5.0 * target.get()).ln() / (1.6 * cinr.get());
        let obj = objective(weight, power, bits);
        if obj < best.objective {
            best = GridOptimum {
                bits,
                power,
                objective: obj,
                step,
            };
        }
    }
    Ok(best)
}

/// Outcome of one check in the verification battery.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Random `(C, α, t)` triple with `C` at or above the activation threshold.
#[derive(Debug, Clone, Copy)]
pub struct ActiveCase {
    pub cinr: Cinr,
    pub weight: TradeoffWeight,
    pub target: BerTarget,
}

/// Draws an active case with `α ∈ [0.1, 0.9]`, `t ∈ [1e-6, 1e-3]` log-uniform and
/// `C` between one and `2^octaves` times the threshold.
pub fn random_active_case<R: Rng + ?Sized>(rng: &mut R, octaves: f64) -> ActiveCase {
    let weight = TradeoffWeight::new(rng.random_range(0.1..=0.9)).expect("alpha in range");
    let target =
        BerTarget::new(10f64.powf(rng.random_range(-6.0..=-3.0))).expect("target in range");
    let th = cinr_threshold(weight, target).get();
    let cinr = Cinr::new(th * rng.random_range(0.0..=octaves).exp2()).expect("finite cinr");
    ActiveCase {
        cinr,
        weight,
        target,
    }
}

/// Sizes of the verification battery.
#[derive(Debug, Clone, Copy)]
pub struct BatteryConfig {
    pub seed: u64,
    pub kkt_cases: usize,
    pub oracle_steps: usize,
    pub oracle_b_max: f64,
    pub doubling_cases: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            kkt_cases: 100,
            oracle_steps: 100_000,
            oracle_b_max: 10.0,
            doubling_cases: 1000,
        }
    }
}

/// Runs every optimality and consistency check and reports each outcome.
pub fn run_battery(cfg: &BatteryConfig) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // b* stays at most 8 so the grid upper bound of 10 never clips it
    let cases: Vec<ActiveCase> = (0..cfg.kkt_cases)
        .map(|_| random_active_case(&mut rng, 6.0))
        .collect();
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    let mut min_lambda = f64::INFINITY;
    let mut worst_rel_ber = 0.0f64;
    for case in &cases {
        let sol = continuous_solution(case.cinr, case.weight, case.target);
        match kkt_residuals(case.cinr, &sol, case.weight, case.target) {
            Ok(r) => {
                worst = worst.max(r.max_residual());
                min_lambda = min_lambda.min(r.lambda);
                worst_rel_ber = worst_rel_ber.max(r.constraint.abs() / case.target.get());
            }
            Err(_) => {
                worst = f64::INFINITY;
            }
        }
    }
    out.push(CheckOutcome {
        name: "kkt-residuals",
        passed: worst < RESIDUAL_TOL,
        detail: format!("max residual {worst:.3e} over {} cases", cases.len()),
    });
    out.push(CheckOutcome {
        name: "multiplier-positive",
        passed: min_lambda > 0.0,
        detail: format!("min lambda {min_lambda:.6e}"),
    });
    out.push(CheckOutcome {
        name: "constraint-active",
        passed: worst_rel_ber < 1e-12,
        detail: format!("max relative BER gap {worst_rel_ber:.3e}"),
    });

    let mut worst_fd = 0.0f64;
    for case in &cases {
        let sol = continuous_solution(case.cinr, case.weight, case.target);
        // at the optimum and off it, so agreement is not just 0 == 0
        for &(db, scale) in &[(0.0, 1.0), (0.1, 1.0), (0.0, 1.05)] {
            let bits = sol.bits_cont + db;
            let power = sol.power_cont * scale;
            let Ok(r) = kkt_residuals_at(case.cinr, bits, power, case.weight, case.target) else {
                worst_fd = f64::INFINITY;
                continue;
            };
            let (gp, gb) = numerical_gradient(
                case.cinr,
                bits,
                power,
                r.lambda,
                case.weight,
                case.target,
                FINITE_DIFF_STEP,
            );
            let gap = (gp - r.stationarity_p)
                .abs()
                .max((gb - r.stationarity_b).abs());
            worst_fd = worst_fd.max(gap);
        }
    }
    out.push(CheckOutcome {
        name: "finite-difference-gradient",
        passed: worst_fd < FINITE_DIFF_TOL,
        detail: format!("max |numeric - analytic| {worst_fd:.3e}"),
    });

    let mut worst_grid = 0.0f64;
    let mut grid_step = 0.0;
    let mut grid_ok = true;
    for case in &cases {
        let sol = continuous_solution(case.cinr, case.weight, case.target);
        match grid_oracle(
            case.cinr,
            case.weight,
            case.target,
            cfg.oracle_b_max,
            cfg.oracle_steps,
        ) {
            Ok(g) => {
                grid_step = g.step;
                let gap = (g.bits - sol.bits_cont).abs();
                worst_grid = worst_grid.max(gap);
                grid_ok &= gap <= g.step;
            }
            Err(_) => grid_ok = false,
        }
    }
    out.push(CheckOutcome {
        name: "grid-oracle-agreement",
        passed: grid_ok,
        detail: format!("max |grid - closed form| {worst_grid:.3e} (step {grid_step:.3e})"),
    });

    let mut worst_doubling = 0.0f64;
    let mut worst_forms = 0.0f64;
    let mut worst_roundtrip = 0.0f64;
    for _ in 0..cfg.doubling_cases {
        let case = random_active_case(&mut rng, 10.0);
        let s1 = continuous_solution(case.cinr, case.weight, case.target);
        let doubled = Cinr::new(2.0 * case.cinr.get()).expect("finite");
        let s2 = continuous_solution(doubled, case.weight, case.target);
        worst_doubling = worst_doubling.max((s2.bits_cont - s1.bits_cont - 1.0).abs());
        let via_bits = case.weight.gamma() * (1.0 - (-s1.bits_cont).exp2());
        worst_forms = worst_forms.max((via_bits / s1.power_cont - 1.0).abs());
        let bits = rng.random_range(2..=14u32);
        let p = model::power_unchecked(f64::from(bits), case.cinr.get(), case.target);
        let back = model::ber_unchecked(p, f64::from(bits), case.cinr.get());
        worst_roundtrip = worst_roundtrip.max((back / case.target.get() - 1.0).abs());
    }
    out.push(CheckOutcome {
        name: "bit-doubling-law",
        passed: worst_doubling < 1e-12,
        detail: format!("max |b(2C) - b(C) - 1| {worst_doubling:.3e}"),
    });
    out.push(CheckOutcome {
        name: "power-forms-agree",
        passed: worst_forms < 1e-12,
        detail: format!("max relative gap {worst_forms:.3e}"),
    });
    out.push(CheckOutcome {
        name: "ber-power-round-trip",
        passed: worst_roundtrip < 1e-12,
        detail: format!("max relative gap {worst_roundtrip:.3e}"),
    });

    out
}
