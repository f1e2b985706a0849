use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "phack",
    version,
    about = "False positive and replication rates under significance testing with P-hacking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// FPR, RR and the outcome table for one parameter set.
    Rates(RatesArgs),
    /// Estimate the hacking rate from replication counts.
    Fit(FitArgs),
    /// Write one figure sweep as CSV (and optionally SVG).
    Sweep(SweepArgs),
    /// Monte Carlo check of the closed forms.
    Simulate(SimulateArgs),
    /// Recompute every published number and write all figures.
    Reproduce(ReproduceArgs),
}

/// Prior odds `A:B` in favor of H1; `1:10` means one true effect per ten nulls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Odds {
    pub in_favor: f64,
    pub against: f64,
}

impl FromStr for Odds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected A:B, got {s:?}"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad odds term {t:?}: {e}"))
        };
        Ok(Odds {
            in_favor: parse(a)?,
            against: parse(b)?,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// Significance cutoff of the sound tests [default: 0.05]
    #[arg(long, visible_alias = "cutoff")]
    pub alpha: Option<f64>,
    /// Type-II error rate at the cutoff
    #[arg(long, conflicts_with = "power")]
    pub beta: Option<f64>,
    /// Power at the cutoff [default: 0.8]
    #[arg(long)]
    pub power: Option<f64>,
    /// Proportion of tested nulls that are true
    #[arg(long, conflicts_with = "prior_odds")]
    pub phi: Option<f64>,
    /// Prior odds A:B in favor of H1 [default: 1:10]
    #[arg(long, value_name = "A:B")]
    pub prior_odds: Option<Odds>,
}

#[derive(Debug, Clone, Args)]
pub struct HackingArgs {
    /// Hacking rate [default: 0]
    #[arg(long)]
    pub h: Option<f64>,
    /// Persistence of hacked P-values at the cutoff [default: 1]
    #[arg(long, conflicts_with = "pi")]
    pub psi: Option<f64>,
    /// Persistence parameter; alone it gives the lower bound on persistence
    #[arg(long)]
    pub pi: Option<f64>,
    /// Naive CDF value at the cutoff, interpolated against --pi
    #[arg(long, requires = "pi")]
    pub naive_cdf: Option<f64>,
    /// Cutoff at which every hacked P-value is significant [default: 0.05, or --alpha if larger]
    #[arg(long)]
    pub baseline_alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecordFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    pub hacking: HackingArgs,
    #[arg(long, value_enum, default_value_t = RecordFormat::Json)]
    pub format: RecordFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    PsychRep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    PooledEquation,
    NormalShift,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Replication data as TOML
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Fit each P-value stratum separately and report the range
    #[arg(long)]
    pub stratified: bool,
    /// How a stratum's replication rate depends on h
    #[arg(long, value_enum, default_value = "pooled-equation", requires = "stratified")]
    pub stratum_model: ModelArg,
    #[command(flatten)]
    pub design: DesignArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    pub figure: u8,
    /// Hacking rate for figures 3 and 5
    #[arg(long)]
    pub h: Option<f64>,
    /// Naive CDF for figure 3 (omit for the lower bound)
    #[arg(long)]
    pub naive_cdf: Option<f64>,
    #[arg(long, env = "PHACK_OUT_DIR", default_value = "figures")]
    pub out: PathBuf,
    /// Also render SVG
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of simulated tests
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    pub hacking: HackingArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, env = "PHACK_OUT_DIR", default_value = "figures")]
    pub out: PathBuf,
    /// Treat documented gaps as failures
    #[arg(long)]
    pub strict: bool,
}
