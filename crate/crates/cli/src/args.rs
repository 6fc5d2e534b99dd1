use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bruin",
    version,
    about = "Ruin probabilities of two correlated Brownian surplus processes",
    after_help = "Options may also come from a key=value file given with --config; \
                  flags on the command line take precedence. BRUIN_SEED sets the \
                  default seed."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact joint Gaussian tail against its closed-form asymptotic.
    #[command(args_override_self = true)]
    Tail {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo ruin probabilities.
    #[command(args_override_self = true)]
    Simulate {
        #[arg(long, value_enum, default_value_t = SimKind::Simultaneous)]
        kind: SimKind,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Limiting constants of the Parisian and sojourn asymptotics.
    #[command(args_override_self = true)]
    Constant {
        #[arg(long, value_enum, default_value_t = ApproxKind::Parisian)]
        kind: ApproxKind,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Asymptotic approximation: constant times Gaussian tail.
    #[command(args_override_self = true)]
    Approx {
        #[arg(long, value_enum, default_value_t = ApproxKind::Parisian)]
        kind: ApproxKind,
        #[arg(long, value_enum, default_value_t = TailArg::Exact)]
        tail: TailArg,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Conditional survival of the sojourn ruin time near the horizon.
    #[command(args_override_self = true)]
    Ruintime {
        #[arg(long = "L1")]
        l1: Option<f64>,
        #[arg(long = "L2")]
        l2: Option<f64>,
        /// Comma-separated distances from the horizon, in scaled units.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        x: Vec<f64>,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Closed-form and Monte Carlo bounds.
    #[command(args_override_self = true)]
    Bounds {
        #[arg(long, value_enum, default_value_t = BoundKind::Simultaneous)]
        kind: BoundKind,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Runs the acceptance suite.
    #[command(args_override_self = true)]
    Validate {
        /// Comma-separated criterion ids; all when omitted.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        criteria: Vec<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Simultaneous,
    Parisian,
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproxKind {
    Parisian,
    Cumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    Exact,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Simultaneous,
    Parisian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// Initial capital of the first portfolio.
    #[arg(long)]
    pub u: Option<f64>,
    /// Capital ratio of the second portfolio.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// Time horizon.
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// Parisian window in time units.
    #[arg(long = "H")]
    pub h: Option<f64>,
    /// Parisian window in scaled units, H = S / u^2.
    #[arg(long = "S")]
    pub s: Option<f64>,
    /// Sojourn budget in scaled units.
    #[arg(long = "L")]
    pub l: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct McArgs {
    #[arg(long)]
    pub n_paths: Option<u64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub batch_size: Option<u64>,
    #[arg(long)]
    pub ci_level: Option<f64>,
    #[arg(long)]
    pub t_trunc: Option<f64>,
    #[arg(long)]
    pub truncation_check_paths: Option<u64>,
    /// Worker threads, 0 for all cores. Results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// One swept parameter, e.g. `u=2,3,4`; one of u, S, L, H, rho.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Fill wall_time_ms; otherwise it is 0 so outputs stay reproducible.
    #[arg(long)]
    pub timing: bool,
    /// key=value file with default flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}
