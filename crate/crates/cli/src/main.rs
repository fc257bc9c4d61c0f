mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use loadsim_core::harness::calibrate::calibrate_interference_scale;
use loadsim_core::harness::{
    compare, emit_csv, emit_plot_data, sweep_alpha, sweep_noise, write_channel_csv, Experiment,
    LinkConfig, MetricsRecord, Runner,
};
use loadsim_core::verifier::{run_battery, BatteryConfig};

use args::{AllocateArgs, CalibrateArgs, Cli, Command, CompareArgs, SweepArgs, VerifyArgs};

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_records(records: &[MetricsRecord], out: Option<&Path>) -> anyhow::Result<()> {
    let mut w = output(out)?;
    emit_csv(records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn plots(records: &[MetricsRecord], dir: Option<&Path>, stem: &str) -> anyhow::Result<()> {
    if let Some(dir) = dir {
        for p in emit_plot_data(records, dir, stem)? {
            log::info!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn allocate(a: AllocateArgs) -> anyhow::Result<ExitCode> {
    let cfg = a.common.link_config()?;
    let runner = Runner::new(a.common.workers)?;
    let exp = Experiment::resolve(cfg, &runner)?;
    let r = exp.realization(a.trial);
    let cinrs = exp.cinrs(&r);
    let detail = exp.allocator().allocate_detailed(&cinrs, exp.targets())?;
    let variances = &exp.profile().variances;

    let mut w = output(a.common.out.as_deref())?;
    writeln!(
        w,
        "# trial {} seed {} noise_var {:e} uW scale {:e} uW",
        a.trial,
        exp.config().master_seed,
        exp.config().noise_var,
        exp.profile().scale
    )?;
    writeln!(
        w,
        "{:>5} {:>12} {:>12} {:>12} {:>9} {:>4} {:>12}",
        "index", "gain_sq", "interf_var", "cinr", "b_cont", "b", "power_uw"
    )?;
    let alloc = &detail.allocation;
    for i in 0..alloc.len() {
        let sol = &detail.continuous[i];
        let b_cont = if sol.active {
            format!("{:.4}", sol.bits_cont)
        } else {
            "-".into()
        };
        writeln!(
            w,
            "{:>5} {:>12.5e} {:>12.5e} {:>12.5e} {:>9} {:>4} {:>12.5e}",
            i,
            r.gain_sq[i],
            variances[i],
            cinrs[i].get(),
            b_cont,
            alloc.bits[i],
            alloc.power[i]
        )?;
    }
    writeln!(
        w,
        "# total_bits {} total_power_uw {:e} active {}/{}",
        alloc.total_bits,
        alloc.total_power,
        alloc.active_count(),
        alloc.len()
    )?;
    w.flush()?;

    if let Some(path) = &a.dump_channels {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_channel_csv(&exp, [a.trial], BufWriter::new(f))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(a: SweepArgs) -> anyhow::Result<ExitCode> {
    let mut cfg: LinkConfig = a.common.link_config()?;
    if let Some(alg) = a.algorithm {
        cfg.algorithm = alg;
    }
    let runner = Runner::new(a.common.workers)?;
    let records = match &a.alpha_grid {
        Some(alphas) => sweep_alpha(&cfg, alphas, &runner)?,
        None => sweep_noise(&cfg, &a.grid.noise_grid()?, &runner)?,
    };
    write_records(&records, a.common.out.as_deref())?;
    plots(&records, a.grid.plot_dir.as_deref(), "sweep")?;
    Ok(ExitCode::SUCCESS)
}

fn compare_cmd(a: CompareArgs) -> anyhow::Result<ExitCode> {
    let cfg = a.common.link_config()?;
    let runner = Runner::new(a.common.workers)?;
    let points = compare(&cfg, &a.grid.noise_grid()?, &runner)?;
    for p in &points {
        log::info!(
            "noise {:e}: baseline power {:e} uW per subcarrier",
            p.proposed.noise_var,
            p.baseline_power
        );
    }
    let records: Vec<MetricsRecord> = points
        .iter()
        .flat_map(|p| [p.proposed, p.baseline])
        .collect();
    write_records(&records, a.common.out.as_deref())?;
    plots(&records, a.grid.plot_dir.as_deref(), "compare")?;
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> anyhow::Result<ExitCode> {
    let cfg = BatteryConfig {
        seed: a.seed,
        kkt_cases: a.cases,
        ..BatteryConfig::default()
    };
    let outcomes = run_battery(&cfg);
    let mut failed = 0;
    for o in &outcomes {
        println!(
            "{} {}: {}",
            if o.passed { "ok  " } else { "FAIL" },
            o.name,
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    println!("{} checks, {failed} failed", outcomes.len());
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn calibrate(a: CalibrateArgs) -> anyhow::Result<ExitCode> {
    let cfg = a.common.link_config()?;
    let target = a
        .target_db
        .or(cfg.target_sir_db)
        .context("no target SIR: pass --target-db or --sir-db")?;
    let runner = Runner::new(a.common.workers)?;
    let cal = calibrate_interference_scale(&cfg, target, &runner)?;
    let mut w = output(a.common.out.as_deref())?;
    writeln!(
        w,
        "target_sir_db,interference_scale_uw,achieved_sir_db,iterations"
    )?;
    writeln!(
        w,
        "{target:e},{:e},{:e},{}",
        cal.scale, cal.achieved_sir_db, cal.iterations
    )?;
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Allocate(a) => allocate(a),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Calibrate(a) => calibrate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
