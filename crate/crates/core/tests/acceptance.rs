//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line each and exits non-zero if any fails.
//!
//! Run with `cargo test -p loadsim-core --test acceptance`.

use std::time::{Duration, Instant};

use loadsim_core::baseline::{mean_ber, MeanBer};
use loadsim_core::harness::{
    compare, csv_string, log_grid, sweep_alpha, sweep_noise, Algorithm, Experiment, LinkConfig,
    MetricsRecord, Runner,
};
use loadsim_core::verifier::{kkt_residuals, random_active_case, RESIDUAL_TOL};
use loadsim_core::{
    allocate, allocate_subcarrier, continuous_solution, draw_realization, greedy_allocate,
    grid_oracle, trial_rng, weighted_mean_ber, BerTarget, BitLevelSet, ChannelParams, Cinr,
    TradeoffWeight,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c(v: f64) -> Cinr {
    Cinr::new(v).unwrap()
}

fn t(v: f64) -> BerTarget {
    BerTarget::new(v).unwrap()
}

fn runner() -> Runner {
    Runner::new(0).unwrap()
}

/// 1. KKT residuals, multiplier sign, active constraint and grid-oracle agreement.
fn closed_form_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_res, mut min_lambda, mut worst_ber, mut worst_grid) =
        (0.0f64, f64::MAX, 0.0f64, 0.0f64);
    let mut step = 0.0;
    let mut grid_ok = true;
    for _ in 0..100 {
        let case = random_active_case(&mut rng, 6.0);
        let sol = continuous_solution(case.cinr, case.weight, case.target);
        let r =
            kkt_residuals(case.cinr, &sol, case.weight, case.target).map_err(|e| e.to_string())?;
        worst_res = worst_res.max(
            r.stationarity_p
                .abs()
                .max(r.stationarity_b.abs())
                .max(r.constraint.abs()),
        );
        min_lambda = min_lambda.min(r.lambda);
        worst_ber = worst_ber.max((r.constraint / case.target.get()).abs());
        let g = grid_oracle(case.cinr, case.weight, case.target, 10.0, 100_000)
            .map_err(|e| e.to_string())?;
        step = g.step;
        let gap = (g.bits - sol.bits_cont).abs();
        worst_grid = worst_grid.max(gap);
        grid_ok &= gap <= g.step;
    }
    let elapsed = start.elapsed();
    check(
        worst_res < RESIDUAL_TOL
            && min_lambda > 0.0
            && worst_ber < 1e-12
            && grid_ok
            && elapsed < Duration::from_secs(10),
        format!(
            "max residual {worst_res:.2e}, min lambda {min_lambda:.3e}, max rel BER gap {worst_ber:.2e}, \
             max grid gap {worst_grid:.2e} (step {step:.2e}), {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

/// 2. Point goldens, each within 1e-3 relative.
fn point_goldens() -> Outcome {
    let w = TradeoffWeight::new(0.5).unwrap();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let s = continuous_solution(c(40.0), w, t(1e-4));
    let (b40, p40) = allocate_subcarrier(c(40.0), w, t(1e-4));
    let (b13, p13) = allocate_subcarrier(c(13.1716), w, t(1e-4));
    let ok = rel(s.bits_cont, 3.6026) < 1e-3
        && b40 == 4
        && rel(p40, 1.78146) < 1e-3
        && b13 == 2
        && rel(p13, 1.08201) < 1e-3;
    check(
        ok,
        format!(
            "b*(40)={:.5}, alloc(40)=({b40}, {p40:.5}), alloc(13.1716)=({b13}, {p13:.5})",
            s.bits_cont
        ),
    )
}

/// 3. Bit-doubling law and the continuous power bound N·Γ.
fn doubling_and_power_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let case = random_active_case(&mut rng, 12.0);
        let s1 = continuous_solution(case.cinr, case.weight, case.target);
        let s2 = continuous_solution(c(2.0 * case.cinr.get()), case.weight, case.target);
        worst = worst.max((s2.bits_cont - s1.bits_cont - 1.0).abs());
    }
    let cfg = LinkConfig {
        n_affected: 0,
        noise_var: 1e-6,
        ..LinkConfig::default()
    };
    let exp = Experiment::new(cfg.clone()).unwrap();
    let bound = cfg.n_subcarriers as f64 * cfg.weight().unwrap().gamma();
    let records = exp.run_trials(Algorithm::Proposed, 1000, &runner());
    let max_cont = records
        .iter()
        .map(|r| r.continuous_power)
        .fold(0.0, f64::max);
    check(
        worst <= 1e-12 && max_cont < bound,
        format!("max |b(2C)-b(C)-1| {worst:.2e}; max continuous power {max_cont:.6} < N*Gamma {bound:.6}"),
    )
}

/// 4. Channel statistics over 1e4 realizations.
fn channel_statistics() -> Outcome {
    let start = Instant::now();
    let params = ChannelParams::new(5, 0.2, 128).unwrap();
    let n_real = 10_000;
    let mut sums = vec![0.0; 128];
    let mut worst_parseval = 0.0f64;
    for k in 0..n_real {
        let r = draw_realization(&params, &mut trial_rng(99, k));
        for (s, g) in sums.iter_mut().zip(&r.gain_sq) {
            *s += g;
        }
        let freq = r.gain_sq.iter().sum::<f64>() / 128.0;
        worst_parseval = worst_parseval.max((freq / r.tap_energy() - 1.0).abs());
    }
    let means: Vec<f64> = sums.iter().map(|s| s / n_real as f64).collect();
    let lo = means.iter().cloned().fold(f64::MAX, f64::min);
    let hi = means.iter().cloned().fold(f64::MIN, f64::max);
    let elapsed = start.elapsed();
    check(
        lo >= 0.97 && hi <= 1.03 && worst_parseval < 1e-9 && elapsed < Duration::from_secs(30),
        format!(
            "per-subcarrier mean |H|^2 in [{lo:.4}, {hi:.4}], max Parseval gap {worst_parseval:.2e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn fig_grid() -> Vec<f64> {
    log_grid(1e-1, 1e-6, 11)
}

fn no_interference() -> LinkConfig {
    LinkConfig {
        n_affected: 0,
        n_trials: 1000,
        ..LinkConfig::default()
    }
}

fn curve(records: &[MetricsRecord]) -> String {
    records
        .iter()
        .map(|r| {
            format!(
                "({:.1} dB, {:.1} b, {:.2} uW, {:.3})",
                r.avg_snr_db, r.avg_throughput, r.avg_power, r.active_fraction
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// 5. Power saturates once every subcarrier is in use while throughput keeps rising.
fn power_saturation() -> Outcome {
    let records =
        sweep_noise(&no_interference(), &fig_grid(), &runner()).map_err(|e| e.to_string())?;
    let Some(first) = records.iter().position(|r| r.active_fraction > 0.99) else {
        return Err(format!(
            "active fraction never exceeds 0.99: {}",
            curve(&records)
        ));
    };
    let tail = &records[first..];
    if tail.len() < 2 {
        return Err(format!(
            "only one saturated grid point: {}",
            curve(&records)
        ));
    }
    let pmin = tail.iter().map(|r| r.avg_power).fold(f64::MAX, f64::min);
    let pmax = tail.iter().map(|r| r.avg_power).fold(f64::MIN, f64::max);
    let spread = (pmax - pmin) / pmin;
    let rising = tail
        .windows(2)
        .all(|w| w[1].avg_throughput > w[0].avg_throughput);
    check(
        spread < 0.05 && rising,
        format!(
            "{} saturated points from {:.1} dB: power spread {:.2}%, throughput {:.1} -> {:.1}",
            tail.len(),
            tail[0].avg_snr_db,
            100.0 * spread,
            tail[0].avg_throughput,
            tail[tail.len() - 1].avg_throughput
        ),
    )
}

/// 6. Interference never raises average throughput or power at matched noise.
fn interference_lowers_curves() -> Outcome {
    let grid = fig_grid();
    let clean = sweep_noise(&no_interference(), &grid, &runner()).map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    let mut ok = true;
    let variants: [(&str, LinkConfig); 5] = [
        (
            "scale 1e-4",
            LinkConfig {
                interference_scale: 1e-4,
                ..LinkConfig::default()
            },
        ),
        ("scale 1", LinkConfig::default()),
        (
            "SIR 20 dB",
            LinkConfig {
                target_sir_db: Some(20.0),
                ..LinkConfig::default()
            },
        ),
        (
            "SIR 10 dB",
            LinkConfig {
                target_sir_db: Some(10.0),
                ..LinkConfig::default()
            },
        ),
        (
            "SIR 0 dB",
            LinkConfig {
                target_sir_db: Some(0.0),
                ..LinkConfig::default()
            },
        ),
    ];
    for (name, cfg) in variants {
        let cfg = LinkConfig {
            n_trials: 1000,
            ..cfg
        };
        let hit = sweep_noise(&cfg, &grid, &runner()).map_err(|e| format!("{name}: {e}"))?;
        let mut worst_thr = f64::MIN;
        let mut worst_pow = f64::MIN;
        for (a, b) in hit.iter().zip(&clean) {
            worst_thr = worst_thr.max(a.avg_throughput - b.avg_throughput);
            worst_pow = worst_pow.max(a.avg_power - b.avg_power);
        }
        ok &= worst_thr <= 0.0 && worst_pow <= 0.0;
        lines.push(format!(
            "{name}: max excess thr {worst_thr:.3}, power {worst_pow:.4}"
        ));
    }
    check(ok, lines.join("; "))
}

/// 7. Raising alpha lowers both power and throughput.
fn alpha_tradeoff() -> Outcome {
    let cfg = LinkConfig {
        noise_var: 1e-3,
        ..no_interference()
    };
    let alphas = [0.1, 0.3, 0.5, 0.7, 0.9];
    let records = sweep_alpha(&cfg, &alphas, &runner()).map_err(|e| e.to_string())?;
    let ok = records
        .windows(2)
        .all(|w| w[1].avg_power <= w[0].avg_power && w[1].avg_throughput <= w[0].avg_throughput);
    check(
        ok,
        alphas
            .iter()
            .zip(&records)
            .map(|(a, r)| format!("a={a}: {:.1} b / {:.2} uW", r.avg_throughput, r.avg_power))
            .collect::<Vec<_>>()
            .join(", "),
    )
}

/// 8. Proposed beats the uniform-power baseline at low SNR; the baseline plateaus at high SNR.
fn baseline_comparison() -> Outcome {
    let grid = [0.3, 0.1, 0.03, 0.01, 1e-3, 1e-4, 1e-5, 1e-6];
    let points = compare(&no_interference(), &grid, &runner()).map_err(|e| e.to_string())?;
    let mut low_ok = true;
    let mut low_points = 0;
    for p in &points {
        if p.proposed.avg_snr_db < 15.0 {
            low_points += 1;
            low_ok &= p.proposed.avg_throughput > p.baseline.avg_throughput;
        }
    }
    let n = points.len();
    let growth = |a: f64, b: f64| (b - a) / a;
    let base_growth = growth(
        points[n - 2].baseline.avg_throughput,
        points[n - 1].baseline.avg_throughput,
    );
    let prop_growth = growth(
        points[n - 2].proposed.avg_throughput,
        points[n - 1].proposed.avg_throughput,
    );
    let detail = points
        .iter()
        .map(|p| {
            format!(
                "({:.1} dB: {:.1} vs {:.1})",
                p.proposed.avg_snr_db, p.proposed.avg_throughput, p.baseline.avg_throughput
            )
        })
        .collect::<Vec<_>>()
        .join(" ");
    check(
        low_ok && low_points > 0 && base_growth < 0.02 && prop_growth > 0.02,
        format!(
            "{low_points} points below 15 dB; top growth baseline {:.2}% / proposed {:.2}%; {detail}",
            100.0 * base_growth,
            100.0 * prop_growth
        ),
    )
}

fn exhaustive_best(cinrs: &[Cinr], power: f64, target: f64, levels: &[u32]) -> u64 {
    let mut best = 0;
    for &b0 in levels {
        for &b1 in levels {
            let bits = [b0, b1];
            if weighted_mean_ber(&bits, power, cinrs) <= target {
                best = best.max(u64::from(b0 + b1));
            }
        }
    }
    best
}

/// 9. Greedy baseline feasibility and bound by exhaustive search.
fn baseline_correctness() -> Outcome {
    let levels = BitLevelSet::new(vec![0, 2, 4]).unwrap();
    let worked = greedy_allocate(&[c(30.0), c(8.0)], 1.0, t(1e-4), &levels);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = worked.bits == vec![2, 0];
    let mut equal = 0;
    let mut total = 0;
    for _ in 0..20 {
        let pair = [
            c(rng.random_range(0.0..60.0)),
            c(rng.random_range(0.0..60.0)),
        ];
        for &power in &[0.25, 1.0, 4.0] {
            let a = greedy_allocate(&pair, power, t(1e-4), &levels);
            let feasible = mean_ber(MeanBer::Weighted, &a.bits, power, &pair) <= 1e-4;
            let best = exhaustive_best(&pair, power, 1e-4, levels.levels());
            ok &= feasible && a.total_bits <= best;
            equal += usize::from(a.total_bits == best);
            total += 1;
        }
    }
    check(
        ok,
        format!(
            "worked example -> {:?}; {equal}/{total} random instances match the exhaustive optimum",
            worked.bits
        ),
    )
}

fn fit_exponent(sizes: &[usize], times: &[f64]) -> f64 {
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Best-of-batches time per call, batches sized to about 20 ms.
fn time_per_call(mut f: impl FnMut()) -> f64 {
    let mut reps = 1usize;
    loop {
        let s = Instant::now();
        for _ in 0..reps {
            f();
        }
        if s.elapsed() > Duration::from_millis(20) || reps > 1 << 24 {
            break;
        }
        reps *= 2;
    }
    (0..9)
        .map(|_| {
            let s = Instant::now();
            for _ in 0..reps {
                f();
            }
            s.elapsed().as_secs_f64() / reps as f64
        })
        .fold(f64::MAX, f64::min)
}

fn exponential_cinrs(n: usize, seed: u64) -> Vec<Cinr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| c(-(1.0 - rng.random::<f64>()).ln() * 1e3))
        .collect()
}

/// 10. Allocator time is linear in N; the greedy baseline is not.
fn complexity() -> Outcome {
    let w = TradeoffWeight::new(0.5).unwrap();
    let sizes = [128, 1024, 8192];
    let times: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let cinrs = exponential_cinrs(n, n as u64);
            let targets = vec![t(1e-4); n];
            time_per_call(|| {
                std::hint::black_box(allocate(std::hint::black_box(&cinrs), w, &targets).unwrap());
            })
        })
        .collect();
    let slope = fit_exponent(&sizes, &times);

    // zero power: every subcarrier walks all the way down, one scan per step
    let base_sizes = [128, 512, 2048];
    let levels = BitLevelSet::default();
    let base_times: Vec<f64> = base_sizes
        .iter()
        .map(|&n| {
            let cinrs = exponential_cinrs(n, 3);
            time_per_call(|| {
                std::hint::black_box(greedy_allocate(&cinrs, 0.0, t(1e-4), &levels));
            })
        })
        .collect();
    let base_slope = fit_exponent(&base_sizes, &base_times);
    check(
        (slope - 1.0).abs() <= 0.15 && base_slope > 1.3,
        format!(
            "allocator exponent {slope:.3} (times {:?} us); baseline exponent {base_slope:.3}",
            times
                .iter()
                .map(|t| (t * 1e6 * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        ),
    )
}

/// 11. Sweep output is byte-identical across worker counts.
fn determinism() -> Outcome {
    let cfg = LinkConfig {
        n_trials: 300,
        target_sir_db: Some(10.0),
        algorithm: loadsim_core::harness::AlgorithmSelector::Both,
        ..LinkConfig::default()
    };
    let grid = log_grid(1e-1, 1e-4, 4);
    let a =
        csv_string(&sweep_noise(&cfg, &grid, &Runner::new(1).unwrap()).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let b =
        csv_string(&sweep_noise(&cfg, &grid, &Runner::new(4).unwrap()).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    check(
        a == b,
        format!(
            "1 vs 4 workers: {} bytes each, identical = {}",
            a.len(),
            a == b
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("1 closed-form correctness", closed_form_correctness),
        ("2 derived point goldens", point_goldens),
        (
            "3 bit doubling and continuous power bound",
            doubling_and_power_bound,
        ),
        ("4 channel statistics", channel_statistics),
        ("5 power saturation", power_saturation),
        ("6 interference lowers curves", interference_lowers_curves),
        ("7 alpha tradeoff", alpha_tradeoff),
        ("8 proposed vs uniform-power baseline", baseline_comparison),
        ("9 baseline correctness", baseline_correctness),
        ("10 complexity", complexity),
        ("11 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
