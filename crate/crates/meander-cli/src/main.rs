mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "meander",
    version,
    about = "Exact meander constants, Masur-Veech volumes and square-tiled surface counts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// RNG seed for sampling commands.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Largest origami size the oracle may enumerate.
    #[arg(long, global = true)]
    pub budget_max_squares: Option<usize>,
    /// Largest band width the oracle may enumerate exhaustively.
    #[arg(long, global = true)]
    pub budget_max_width: Option<usize>,
    /// Fractional digits in decimal renderings.
    #[arg(long, default_value_t = 6, global = true)]
    pub digits: usize,
    /// File of exact Abelian volumes, lines `g num/den pi_exp`.
    #[arg(long, global = true)]
    pub volume_table: Option<PathBuf>,
}

impl Global {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Intersection number <tau_{d_1} ... tau_{d_n}>_g.
    Correlator {
        genus: u32,
        #[arg(required = true)]
        indices: Vec<u32>,
    },
    /// Masur-Veech volume of Q_{g,n}.
    Volume {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        bigons: u32,
    },
    /// Volume, single-band contributions and meander constant of Q_{g,n}.
    Constants {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        bigons: u32,
    },
    /// Abelian counterparts in the principal stratum H(1^{2g-2}).
    Abelian {
        #[arg(long)]
        genus: u32,
    },
    /// Separating over non-separating ratio; the large-n limit without `--bigons`.
    RatioSepNonsep {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        bigons: Option<u32>,
    },
    /// Brute-force square-tiled surface enumeration.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Asymptotic forms; `asym list`, `asym <name> --params ...`, `asym check <name> --range a..b`.
    Asym(AsymArgs),
    /// Reference tables.
    Tables {
        #[arg(value_enum)]
        table: TableName,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// One-horizontal-band Abelian origamis of 1..=K squares.
    Abelian {
        #[arg(long)]
        max_squares: usize,
        #[arg(long, value_enum, default_value_t = Counting::Unlabeled)]
        counting: Counting,
    },
    /// One-horizontal-band quadratic surfaces of width 1..=W.
    Quadratic {
        #[arg(long)]
        max_width: usize,
        /// Uniformly sample this many pairings per width instead of enumerating.
        #[arg(long)]
        sample: Option<u64>,
        /// Confidence level of the sampling intervals.
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Oriented meanders of genus g with at most N crossings.
    Oriented {
        #[arg(long)]
        crossings: usize,
        #[arg(long)]
        genus: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Counting {
    Raw,
    Unlabeled,
    Labeled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TableName {
    SepNonsep,
    TwoCorrelators,
    ProbabilityExample,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct AsymArgs {
    #[command(subcommand)]
    pub action: Option<AsymAction>,
    /// Registered form name.
    pub name: Option<String>,
    /// Comma-separated `key=value` parameters.
    #[arg(long, default_value = "")]
    pub params: String,
}

#[derive(Debug, Subcommand)]
pub enum AsymAction {
    /// List registered forms.
    List,
    /// Compare a form with its exact counterpart over a parameter range.
    Check {
        name: String,
        /// Inclusive range `a..b`.
        #[arg(long)]
        range: String,
        /// Parameter swept by the range.
        #[arg(long, default_value = "n")]
        var: String,
        #[arg(long, default_value = "")]
        params: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
