use approx::assert_relative_eq;
use loadsim_core::harness::calibrate::{
    calibrate_interference_scale, measure_sir_db, SIR_TOLERANCE_DB,
};
use loadsim_core::harness::{
    compare, csv_string, parse_config, read_csv, sweep_noise, write_channel_csv, Algorithm,
    AlgorithmSelector, Experiment, LinkConfig, Runner,
};

fn clean() -> LinkConfig {
    LinkConfig {
        n_affected: 0,
        noise_var: 1e-3,
        ..LinkConfig::default()
    }
}

// Totals reproduced by scripts/closed_form_oracle.py from the dumped channels.
#[test]
fn run_trial_goldens() {
    let exp = Experiment::new(clean()).unwrap();
    let r0 = exp.run_trial(0, Algorithm::Proposed);
    assert_eq!(r0.total_bits, 940);
    assert_relative_eq!(r0.total_power, 1.838614420410e2, max_relative = 1e-11);
    let r7 = exp.run_trial(7, Algorithm::Proposed);
    assert_eq!(r7.total_bits, 1005);
    assert_relative_eq!(r7.total_power, 1.789398863737e2, max_relative = 1e-11);
}

#[test]
fn channel_dump_matches_realization() {
    let exp = Experiment::new(LinkConfig::default()).unwrap();
    let mut buf = Vec::new();
    write_channel_csv(&exp, [0, 1], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 128);
    let r1 = exp.realization(1);
    let row: Vec<&str> = text.lines().nth(129 + 5).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert_eq!(row[1], "5");
    assert_eq!(row[2].parse::<f64>().unwrap(), r1.gains[5].re);
    assert_eq!(row[3].parse::<f64>().unwrap(), r1.gains[5].im);
    assert_eq!(row[5].parse::<f64>().unwrap(), exp.profile().variances[5]);
}

#[test]
fn calibration_hits_ten_db() {
    let runner = Runner::new(0).unwrap();
    let cfg = LinkConfig::default();
    let cal = calibrate_interference_scale(&cfg, 10.0, &runner).unwrap();
    assert!(
        (cal.achieved_sir_db - 10.0).abs() <= SIR_TOLERANCE_DB,
        "{cal:?}"
    );
    assert_eq!(
        measure_sir_db(&cfg, cal.scale, &runner).unwrap(),
        cal.achieved_sir_db
    );
}

#[test]
fn throughput_monotone_in_measured_snr() {
    let cfg = LinkConfig {
        n_trials: 300,
        ..clean()
    };
    let recs = sweep_noise(
        &cfg,
        &loadsim_core::harness::default_noise_grid(),
        &Runner::new(0).unwrap(),
    )
    .unwrap();
    for w in recs.windows(2) {
        assert!(w[1].avg_snr_db > w[0].avg_snr_db);
        assert!(w[1].avg_throughput >= w[0].avg_throughput);
    }
}

#[test]
fn infinite_interference_nulls_the_block() {
    let cfg = LinkConfig {
        interference_scale: f64::INFINITY,
        n_trials: 50,
        ..LinkConfig::default()
    };
    let exp = Experiment::new(cfg).unwrap();
    let r = exp.realization(4);
    let alloc = exp
        .allocator()
        .allocate(&exp.cinrs(&r), exp.targets())
        .unwrap();
    assert!(alloc.bits[..40].iter().all(|&b| b == 0));
    assert!(alloc.power[..40].iter().all(|&p| p == 0.0));
}

#[test]
fn compare_uses_the_proposed_budget() {
    let cfg = LinkConfig {
        n_trials: 200,
        ..clean()
    };
    let points = compare(&cfg, &[1e-2, 1e-4], &Runner::new(2).unwrap()).unwrap();
    for p in &points {
        assert_relative_eq!(
            p.baseline_power * 128.0,
            p.proposed.avg_power,
            max_relative = 1e-12
        );
        assert!(p.baseline.avg_power <= p.proposed.avg_power * (1.0 + 1e-12));
        assert_eq!(p.proposed.noise_var, p.baseline.noise_var);
    }
}

#[test]
fn sweep_csv_round_trip_and_worker_independence() {
    let cfg = LinkConfig {
        n_trials: 120,
        algorithm: AlgorithmSelector::Both,
        target_sir_db: Some(5.0),
        ..LinkConfig::default()
    };
    let grid = [1e-2, 1e-3];
    let one = sweep_noise(&cfg, &grid, &Runner::new(1).unwrap()).unwrap();
    let many = sweep_noise(&cfg, &grid, &Runner::new(3).unwrap()).unwrap();
    let text = csv_string(&one).unwrap();
    assert_eq!(text, csv_string(&many).unwrap());
    assert_eq!(read_csv(text.as_bytes()).unwrap(), one);
    assert_eq!(one.len(), 4);
}

#[test]
fn config_text_round_trip() {
    let cfg = LinkConfig {
        alpha: 0.3,
        target_sir_db: Some(-3.5),
        algorithm: AlgorithmSelector::Both,
        ..LinkConfig::default()
    };
    assert_eq!(parse_config(&cfg.to_config_text()).unwrap(), cfg);
    assert_eq!(parse_config("").unwrap(), LinkConfig::default());
    assert!(parse_config("alpha = 1.5").is_err());
}
