//! `censmax`: exact, asymptotic and simulated laws of the largest censored
//! and uncensored survival times, and the `Q_n` sufficient-follow-up test.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "censmax", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Output destination and encoding shared by the table-producing commands.
#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Lifetime {
    /// Unit-rate exponential truncated at 4.61 and renormalized.
    Truncexp,
    /// Unit-rate exponential; identical to `truncexp` below 4.61 up to the
    /// renormalizing constant.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CdfStatistic {
    M,
    Mu,
    JointMuM,
    Diff,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QuantileStatistic {
    M,
    Mu,
    Diff,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// 95% quantiles of M(n) - M_u(n) under uniform censoring U[0, tau_G],
    /// unscaled, scaled by b_n, and their limit.
    Table1 {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        tau_g: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "50,100,500,5000,20000")]
        n: Vec<u64>,
        #[arg(long, default_value_t = 0.7)]
        p: f64,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value = "truncexp")]
        lifetime: Lifetime,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact cdf of a statistic on a grid, for plotting.
    Cdf {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum)]
        statistic: CdfStatistic,
        /// Grid points per axis.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Upper end of the grid (default: the support end of the statistic;
        /// 5 for the ratio).
        #[arg(long)]
        upper: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact quantiles of M(n), M_u(n) or M(n) - M_u(n).
    Quantile {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum)]
        statistic: QuantileStatistic,
        #[arg(long, value_delimiter = ',', default_value = "0.95")]
        level: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Replication summaries (M, M_u, counts, Q_n) of simulated samples, or
    /// one simulated `time,event` dataset with `--sample`.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Emit a single sample as `time,event` rows instead of summaries.
        #[arg(long)]
        sample: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Statistical check of the split of the sample at M_u(n).
    VerifySplit {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Conditioning bin for M_u(n) (default: its 0.45 to 0.55 exact
        /// quantiles).
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        t_bin: Option<Vec<f64>>,
        /// Additionally condition on M(n) in this bin.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        m_bin: Option<Vec<f64>>,
        /// Number of censored observations above M_u(n).
        #[arg(long, default_value_t = 1)]
        r: u64,
        #[arg(long, default_value_t = 1_000_000)]
        reps: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Shift of the lower-group reference (nonzero makes the null false).
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Q_n test of sufficient follow-up against a fully specified null model
    /// with tau_G < tau_F.
    FollowupTest {
        /// `time,event` CSV (event 1 = observed, 0 = censored).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `text` prints a report followed by `key=value` lines.
        #[arg(long, value_enum, default_value = "text")]
        format: FollowupFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FollowupFormat {
    Text,
    Csv,
    JsonLines,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("censmax: {err:#}");
            let code = match (err.downcast_ref::<censmax::Error>(), err.downcast_ref::<std::io::Error>()) {
                (Some(e), _) => e.exit_code(),
                (None, Some(_)) => 3,
                (None, None) => 1,
            };
            ExitCode::from(code as u8)
        }
    }
}
