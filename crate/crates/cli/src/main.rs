use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndf_cli::commands::{self, PointCount};
use ndf_cli::config::{FlagConfig, RunConfig};
use ndf_cli::output::{write_atomic, Format, Report};
use ndf_cli::{exit, CliError};
use ndf_core::optimizer::InitStrategy;

#[derive(Parser)]
#[command(
    name = "ndf",
    version,
    about = "Nested spherical designs: build, extend, certify"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file; falls back to $NDF_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed [default: 42].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Design tolerance for the residual and the monomial oracle.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a point set file as a spherical design.
    Verify {
        file: PathBuf,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Add free points to a fixed set until the union is a design.
    Extend {
        /// Fixed points; omitted means an empty fixed set.
        fixed: Option<PathBuf>,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, required_unless_present = "auto_n", conflicts_with = "auto_n")]
        n: Option<usize>,
        #[arg(long)]
        auto_n: bool,
        /// Upper limit for --auto-n.
        #[arg(long, default_value_t = 10_000)]
        max_n: usize,
        #[arg(long, value_enum)]
        init: Option<Init>,
        /// Directory for free.txt, union.txt and result.json.
        #[arg(long)]
        out: PathBuf,
        /// Also write trace.csv.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form point-count bounds.
    Bounds {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        t1: Option<usize>,
        /// Size of the fixed set.
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Area-regular partition of the 2-sphere.
    Partition {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Flow of a random boundary polynomial.
    FlowDemo {
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        degree: usize,
        /// Number of trajectories.
        #[arg(long, default_value_t = 16)]
        starts: usize,
        /// Directory for trace.csv, endpoints.txt and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized Marcinkiewicz-Zygmund sweep on an area-regular partition.
    MzCheck {
        /// Largest polynomial degree.
        #[arg(long)]
        degree: usize,
        /// Number of partition cells.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        cases: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    EqualArea,
    Spiral,
    Random,
}

fn config(common: &Common) -> Result<RunConfig, CliError> {
    let flags = FlagConfig {
        tol: common.tol,
        seed: common.seed,
    };
    RunConfig::resolve(common.config.as_deref(), &flags)
}

fn emit(report: &Report, format: Format, out: Option<&PathBuf>) -> Result<u8, CliError> {
    let text = report.render(format);
    match out {
        Some(path) => write_atomic(path, &text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::usage(format!("cannot write stdout: {e}")))?;
        }
    }
    Ok(if report.positive {
        exit::OK
    } else {
        exit::NEGATIVE
    })
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Verify {
            file,
            degree,
            dim,
            out,
            common,
        } => {
            let cfg = config(&common)?;
            let r = commands::verify(&commands::VerifyArgs { file, degree, dim }, &cfg)?;
            emit(&r, common.format, out.as_ref())
        }
        Command::Extend {
            fixed,
            degree,
            dim,
            n,
            auto_n,
            max_n,
            init,
            out,
            trace,
            common,
        } => {
            let cfg = config(&common)?;
            let count = match (n, auto_n) {
                (Some(n), false) => PointCount::Fixed(n),
                _ => PointCount::Auto { cap: max_n },
            };
            let init = init.map(|i| match i {
                Init::EqualArea => InitStrategy::EqualAreaCenters,
                Init::Spiral => InitStrategy::Spiral,
                Init::Random => InitStrategy::Random(cfg.seed),
            });
            let args = commands::ExtendArgs {
                fixed,
                degree,
                dim,
                count,
                init,
                out,
                trace,
            };
            let r = commands::extend(&args, &cfg)?;
            emit(&r, common.format, None)
        }
        Command::Bounds {
            dim,
            degree,
            t1,
            m,
            out,
            common,
        } => {
            let cfg = config(&common)?;
            let r = commands::bounds(&commands::BoundsArgs { dim, degree, t1, m }, &cfg)?;
            emit(&r, common.format, out.as_ref())
        }
        Command::Partition {
            dim,
            n,
            out,
            common,
        } => {
            let cfg = config(&common)?;
            let r = commands::partition(&commands::PartitionArgs { dim, n }, &cfg)?;
            emit(&r, common.format, out.as_ref())
        }
        Command::FlowDemo {
            dim,
            degree,
            starts,
            out,
            common,
        } => {
            let cfg = config(&common)?;
            let r = commands::flow_demo(
                &commands::FlowArgs {
                    dim,
                    degree,
                    starts,
                    out,
                },
                &cfg,
            )?;
            emit(&r, common.format, None)
        }
        Command::MzCheck {
            degree,
            n,
            cases,
            out,
            common,
        } => {
            let cfg = config(&common)?;
            let r = commands::mz_check(&commands::MzArgs { degree, n, cases }, &cfg)?;
            emit(&r, common.format, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ndf: {e}");
            ExitCode::from(e.code)
        }
    }
}
