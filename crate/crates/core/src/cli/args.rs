use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::explain::OrderStrategy;
use crate::norm::Norm;
use crate::oracle::OracleSpec;

#[derive(Debug, Parser)]
#[command(name = "dxp", version, about = "Distance-restricted explanations of classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one CXp.
    Cxp(CxpArgs),
    /// Compute one AXp.
    Axp(AxpArgs),
    /// Enumerate AXps and CXps.
    Enumerate(EnumerateArgs),
    /// Compute a cardinality-minimum CXp.
    MinCxp(Common),
    /// Feature attribution from the enumerated CXps.
    Ffa(FfaArgs),
    /// Time the CXp algorithms against a latency-wrapped oracle.
    Bench(BenchArgs),
    /// Run the exhaustive oracle as a line-protocol backend on stdin/stdout.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    /// Deletion: one call per feature.
    Linear,
    Dicho,
    Swift,
}

impl Algo {
    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Linear => "linear",
            Algo::Dicho => "dicho",
            Algo::Swift => "swift",
        }
    }
}

/// `H x W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub height: usize,
    pub width: usize,
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("bad shape {s:?}; expected HxW"));
        let (h, w) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let height = h.trim().parse().map_err(|_| bad())?;
        let width = w.trim().parse().map_err(|_| bad())?;
        if height == 0 || width == 0 {
            return Err(bad());
        }
        Ok(Shape { height, width })
    }
}

#[derive(Debug, Clone, Args)]
pub struct Ball {
    #[arg(long, short = 'e')]
    pub epsilon: f64,
    #[arg(long, short = 'n', default_value = "linf")]
    pub norm: Norm,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Model document (JSON).
    #[arg(long, short = 'm')]
    pub model: PathBuf,
    /// Instance document with `point` and `label`.
    #[arg(long, short = 'i')]
    pub instance: PathBuf,
    #[command(flatten)]
    pub ball: Ball,
    /// auto, exhaustive, linear or external:<command>.
    #[arg(long, default_value = "auto")]
    pub oracle: OracleSpec,
    /// Per-query timeout for external oracles, in milliseconds.
    #[arg(long)]
    pub oracle_timeout_ms: Option<u64>,
    /// natural, sensitivity or file=PATH.
    #[arg(long, default_value = "natural")]
    pub order: OrderStrategy,
    /// Write records here instead of stdout.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Skip re-checking results with an independent exhaustive oracle.
    #[arg(long)]
    pub no_verify: bool,
    /// Leave wall times and other timing-dependent counters out of the output.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long, short = 'a', value_enum, default_value = "dicho")]
    pub algo: Algo,
    /// Concurrent probes for swift.
    #[arg(long, short = 'q', default_value_t = 4)]
    pub workers: usize,
    /// Feature-disjunction threshold in [0, 1] for swift; off when absent.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start from all features instead of those changed by the first witness.
    #[arg(long)]
    pub no_witness_seed: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CxpArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AxpArgs {
    #[command(flatten)]
    pub common: Common,
    /// Weak AXp to shrink, 1-based and comma separated; all features when absent.
    #[arg(long, value_delimiter = ',')]
    pub from: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct Limits {
    /// Stop after this many explanations.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Stop after this many CXps.
    #[arg(long)]
    pub limit_cxp: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub limits: Limits,
}

#[derive(Debug, Clone, Args)]
pub struct FfaArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub limits: Limits,
    /// Image shape for the heatmap.
    #[arg(long, requires = "heatmap")]
    pub shape: Option<Shape>,
    /// Where to write the graymap.
    #[arg(long, requires = "shape")]
    pub heatmap: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Model document; use --synthetic instead for a generated linear model.
    #[arg(long, short = 'm', requires = "instance", conflicts_with = "synthetic")]
    pub model: Option<PathBuf>,
    #[arg(long, short = 'i')]
    pub instance: Option<PathBuf>,
    /// Generated linear model with this many features.
    #[arg(long, required_unless_present = "model")]
    pub synthetic: Option<usize>,
    /// Bias of the generated model as a fraction of its total weight.
    #[arg(long, default_value_t = 0.05)]
    pub fraction: f64,
    #[command(flatten)]
    pub ball: Ball,
    #[arg(long, default_value = "auto")]
    pub oracle: OracleSpec,
    #[arg(long, default_value = "natural")]
    pub order: OrderStrategy,
    /// Fixed latency per oracle call, in milliseconds.
    #[arg(long, default_value_t = 0)]
    pub delay_ms: u64,
    #[arg(long, short = 'q', default_value_t = 16)]
    pub workers: usize,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Algorithms to run, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "linear,dicho,swift")]
    pub algos: Vec<Algo>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, short = 'm')]
    pub model: PathBuf,
    /// Latency added to every check, in milliseconds.
    #[arg(long, default_value_t = 0)]
    pub delay_ms: u64,
}
