//! `wlab`: run verification suites and experiments, or solve a problem file.
//!
//! Exit status is 0 when every case passes, 1 when some case fails and 2 for
//! usage or configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wlab::experiments::{run_experiment, EXPERIMENTS};
use wlab::problem::{solve_file, write_solution, ProblemKind};
use wlab::report::SuiteReport;
use wlab::suites::{run_suite, SuiteConfig, SUITES};

#[derive(Parser)]
#[command(name = "wlab", version, about = "Weighted half-space analysis lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite.
    Verify {
        suite: String,
        /// JSON suite config: `seed`, `fields`, `paths`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; the series CSV is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a trend experiment.
    Experiment {
        name: String,
        /// JSON experiment config; omitted keys take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a problem file and write the trajectory.
    Solve {
        kind: Kind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// List suites and experiments.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Parabolic,
    Elliptic,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] wlab::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(wlab::Error::Solve(_)) => 1,
            _ => 2,
        }
    }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes the report (or prints it) and returns whether it passed.
fn emit(report: &SuiteReport, out: Option<&Path>) -> Result<bool, CliError> {
    match out {
        Some(path) => {
            report.write_files(path)?;
            for case in report.cases.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: lhs = {:e}, rhs = {:e}", case.name, case.lhs, case.rhs);
            }
            let a = &report.aggregate;
            println!(
                "{}: {} cases, {} failures, {} marginal, max ratio {:.4}",
                report.suite, a.cases, a.failures, a.marginal, a.max_ratio
            );
        }
        None => print!("{}", report.to_json()?),
    }
    Ok(report.passed())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Verify { suite, config, seed, out } => {
            if !SUITES.contains(&suite.as_str()) {
                return Err(CliError::Usage(format!("unknown suite {suite}; expected one of {}", SUITES.join(", "))));
            }
            let mut cfg: SuiteConfig = match &config {
                Some(path) => serde_json::from_str(&read_config(path)?)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
                None => SuiteConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            emit(&run_suite(&suite, &cfg)?, out.as_deref())
        }
        Command::Experiment { name, config, seed, out } => {
            if !EXPERIMENTS.contains(&name.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown experiment {name}; expected one of {}",
                    EXPERIMENTS.join(", ")
                )));
            }
            let text = config.as_deref().map(read_config).transpose()?;
            emit(&run_experiment(&name, text.as_deref(), seed)?, out.as_deref())
        }
        Command::Solve { kind, config, out } => {
            let kind = match kind {
                Kind::Parabolic => ProblemKind::Parabolic,
                Kind::Elliptic => ProblemKind::Elliptic,
            };
            let solution = solve_file(kind, &config)?;
            let files = write_solution(&solution, &out)?;
            println!("{}", serde_json::to_string_pretty(&solution.summary).map_err(wlab::Error::from)?);
            eprintln!("wrote {} files to {}", files.len(), out.display());
            Ok(true)
        }
        Command::List => {
            println!("suites: {}", SUITES.join(", "));
            println!("experiments: {}", EXPERIMENTS.join(", "));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
