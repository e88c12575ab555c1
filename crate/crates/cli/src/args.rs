use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use superbunch::theory::{Boundary, ObjectModel};

#[derive(Debug, Parser)]
#[command(name = "superbunch", version, about = "Temporal ghost imaging with superbunching pseudothermal light")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a ghost image and write (bin, g2, stderr, object_amplitude).
    Simulate(SimulateArgs),
    /// Evaluate the theoretical image for given bandwidths or in the white-noise limit.
    Theory(TheoryArgs),
    /// Mean and SD of the g²(0) estimator over a grid of stage counts and block sizes.
    Stats(StatsArgs),
    /// Histogram of source intensities.
    Histogram(HistogramArgs),
    /// Run every study with default parameters into one directory.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Number of cascaded ground-glass stages N.
    #[arg(long, default_value_t = 1)]
    pub rg_count: u32,
    /// Mean intensity μ.
    #[arg(long, default_value_t = 1.0)]
    pub mean_intensity: f64,
}

#[derive(Debug, Args)]
pub struct ObjectArgs {
    /// Object JSON file; defaults to the built-in 100-bin double slit.
    #[arg(long)]
    pub object: Option<PathBuf>,
    /// Expected period length in bins; must match the object.
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub object: ObjectArgs,
    /// Number of periods M.
    #[arg(long, default_value_t = 100_000)]
    pub periods: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output CSV; a JSON sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    Truncated,
}

impl From<BoundaryArg> for Boundary {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Periodic => Boundary::Periodic,
            BoundaryArg::Truncated => Boundary::Truncated,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    BinSampled,
    PiecewiseConstant,
}

impl From<ModelArg> for ObjectModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::BinSampled => ObjectModel::BinSampled,
            ModelArg::PiecewiseConstant => ObjectModel::PiecewiseConstant,
        }
    }
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[arg(long, default_value_t = 1)]
    pub rg_count: u32,
    #[command(flatten)]
    pub object: ObjectArgs,
    /// Independent-bin closed form instead of the kernel convolution.
    #[arg(long, conflicts_with_all = ["bands", "fwhm"])]
    pub white_noise: bool,
    /// Stage bandwidths in radians per bin, one per stage.
    #[arg(long, value_delimiter = ',', conflicts_with = "fwhm")]
    pub bands: Option<Vec<f64>>,
    /// Equal bandwidths giving this kernel FWHM in bins (default 1).
    #[arg(long)]
    pub fwhm: Option<f64>,
    /// Quadrature step in bins (piecewise-constant model).
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = BoundaryArg::Periodic)]
    pub boundary: BoundaryArg,
    #[arg(long, value_enum, default_value_t = ModelArg::BinSampled)]
    pub model: ModelArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    pub rg_counts: Vec<u32>,
    /// Block sizes n.
    #[arg(long, value_delimiter = ',', default_value = "20000")]
    pub samples_per_run: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub mean_intensity: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangeMax {
    /// Up to the largest sample.
    Auto,
    Value(f64),
}

impl std::str::FromStr for RangeMax {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(RangeMax::Auto);
        }
        s.parse().map(RangeMax::Value).map_err(|_| format!("expected a number or 'auto', got '{s}'"))
    }
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[arg(long, default_value_t = 1)]
    pub rg_count: u32,
    #[arg(long, default_value_t = 5000.0)]
    pub mean_intensity: f64,
    #[arg(long, default_value_t = 50_000)]
    pub samples: usize,
    #[arg(long, default_value_t = superbunch::analysis::DEFAULT_HISTOGRAM_BINS)]
    pub bins: usize,
    /// Upper edge of the last bin, or `auto` for the sample maximum (default 10μ).
    #[arg(long)]
    pub range_max: Option<RangeMax>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory; defaults to `reproduce-seed<SEED>` in the output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Periods per image.
    #[arg(long, default_value_t = 100_000)]
    pub periods: u64,
    /// Seeds per stage count for the visibility table.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    /// Runs per cell of the SD-vs-stage-count study.
    #[arg(long, default_value_t = 50)]
    pub stage_study_runs: usize,
    /// Runs per cell of the SD-vs-block-size study.
    #[arg(long, default_value_t = 1000)]
    pub block_study_runs: usize,
}
