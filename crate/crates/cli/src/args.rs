use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use loadsim_core::harness::{log_grid, AlgorithmSelector, LinkConfig};

#[derive(Debug, Parser)]
#[command(
    name = "loadsim",
    version,
    about = "Joint bit and power loading simulator for OFDM links"
)]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Allocate one channel realization and print the per-subcarrier table.
    Allocate(AllocateArgs),
    /// Sweep the noise variance (or alpha) and emit metrics CSV.
    Sweep(SweepArgs),
    /// Proposed loader against the uniform-power greedy baseline.
    Compare(CompareArgs),
    /// Run the optimality verification battery.
    Verify(VerifyArgs),
    /// Calibrate the interference scale for a target average SIR.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Monte-Carlo trials per point.
    #[arg(long, value_name = "K")]
    pub trials: Option<usize>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Target average SIR in dB (`inf`, `-inf` or `none` allowed).
    #[arg(long, value_name = "DB", allow_hyphen_values = true)]
    pub sir_db: Option<String>,
    /// Number of interfered subcarriers.
    #[arg(long, value_name = "N")]
    pub nu: Option<usize>,
    /// Noise variance in µW.
    #[arg(long, value_name = "UW")]
    pub noise_var: Option<f64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Any other configuration key, as KEY=VALUE.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl Common {
    /// Defaults, then the config file, then `--set`, then the named flags.
    pub fn link_config(&self) -> anyhow::Result<LinkConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
                loadsim_core::harness::parse_config(&text)
                    .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
            }
            None => LinkConfig::default(),
        };
        let mut assign = |key: &str, value: String| -> anyhow::Result<()> {
            cfg.set(key, &value)
                .map_err(|e| anyhow::anyhow!("{key}: {e}"))
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow::anyhow!("expected KEY=VALUE, got `{kv}`"))?;
            let k = k.trim();
            if !loadsim_core::harness::config::KEYS.contains(&k) {
                anyhow::bail!("unknown configuration key `{k}`");
            }
            assign(k, v.trim().to_string())?;
        }
        if let Some(v) = self.trials {
            assign("n_trials", v.to_string())?;
        }
        if let Some(v) = self.seed {
            assign("master_seed", v.to_string())?;
        }
        if let Some(v) = self.alpha {
            assign("alpha", v.to_string())?;
        }
        if let Some(v) = &self.sir_db {
            assign("target_sir_db", v.clone())?;
        }
        if let Some(v) = self.nu {
            assign("n_affected", v.to_string())?;
        }
        if let Some(v) = self.noise_var {
            assign("noise_var", v.to_string())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Which trial's channel to use.
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Also dump the channel of this trial as CSV.
    #[arg(long, value_name = "PATH")]
    pub dump_channels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Sweep alpha over these values at the configured noise variance instead.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    /// proposed, baseline or both.
    #[arg(long)]
    pub algorithm: Option<AlgorithmSelector>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Noise variances in µW: `a,b,c` or `from:to:points` (log spaced).
    #[arg(long, value_name = "GRID")]
    pub noise_grid: Option<String>,
    /// Also write one whitespace-separated data file per curve here.
    #[arg(long, value_name = "DIR")]
    pub plot_dir: Option<PathBuf>,
}

impl GridArgs {
    pub fn noise_grid(&self) -> anyhow::Result<Vec<f64>> {
        match &self.noise_grid {
            None => Ok(loadsim_core::harness::default_noise_grid()),
            Some(s) => parse_grid(s),
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random cases for the KKT and oracle checks.
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Target average SIR in dB; falls back to --sir-db.
    #[arg(long, value_name = "DB", allow_hyphen_values = true)]
    pub target_db: Option<f64>,
}

pub fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let num = |t: &str| -> anyhow::Result<f64> {
        t.trim()
            .parse::<f64>()
            .map_err(|e| anyhow::anyhow!("bad grid value `{t}`: {e}"))
    };
    let grid = if let [from, to, points] = s.split(':').collect::<Vec<_>>()[..] {
        let points: usize = points
            .trim()
            .parse()
            .map_err(|e| anyhow::anyhow!("bad point count `{points}`: {e}"))?;
        let (from, to) = (num(from)?, num(to)?);
        if points < 2 || from <= 0.0 || to <= 0.0 {
            anyhow::bail!("log grid needs positive bounds and at least 2 points");
        }
        log_grid(from, to, points)
    } else {
        s.split(',').map(num).collect::<anyhow::Result<Vec<_>>>()?
    };
    if grid.is_empty() || grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        anyhow::bail!("noise grid values must be finite and positive");
    }
    Ok(grid)
}
