use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use strichartz_cli::{init_workers, run, CliError, ExperimentConfig, Suite};

/// Verification suites for Weyl sums and Strichartz norms on generic 2-tori.
///
/// Exit status is 0 when the run has no violations, 1 when it has some and
/// 2 on errors. The worker count comes from STRICHARTZ_WORKERS.
#[derive(Parser)]
#[command(name = "strichartz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel suprema against the Weyl, dispersive and envelope bounds.
    KernelSweep(Flags),
    /// Successive minima and Davenport ratios.
    Minima(Flags),
    /// Closed-form representation counts against brute force.
    PallVerify(Flags),
    /// Meet-in-the-middle moment counts against enumeration.
    Omega(Flags),
    /// Space-time norms of indicator-ball data.
    Strichartz(Flags),
    /// Smallest refocusing times.
    Refocus(Flags),
}

#[derive(Args)]
struct Flags {
    /// Config file (flat `key = value`), or a JSON report to rerun.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Bound on A' and B' for pall-verify.
    #[arg(long)]
    bound: Option<i64>,
}

impl Command {
    fn split(self) -> (Suite, Flags) {
        match self {
            Command::KernelSweep(f) => (Suite::KernelSweep, f),
            Command::Minima(f) => (Suite::Minima, f),
            Command::PallVerify(f) => (Suite::PallVerify, f),
            Command::Omega(f) => (Suite::Omega, f),
            Command::Strichartz(f) => (Suite::Strichartz, f),
            Command::Refocus(f) => (Suite::Refocus, f),
        }
    }
}

fn build_config(suite: Suite, flags: Flags) -> Result<ExperimentConfig, CliError> {
    let mut config = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let config = ExperimentConfig::load(&text).map_err(|e| match e {
                CliError::Config(c) => CliError::Usage(format!("{}: {c}", path.display())),
                other => other,
            })?;
            if config.suite != suite {
                return Err(CliError::Usage(format!(
                    "{} configures suite '{}', not '{suite}'",
                    path.display(),
                    config.suite
                )));
            }
            config
        }
        None => ExperimentConfig::defaults(suite),
    };
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(out) = flags.out {
        config.out = out;
    }
    if let Some(n) = flags.n {
        config.n = n;
    }
    if let Some(t_max) = flags.t_max {
        config.t_max = t_max;
    }
    if let Some(p) = flags.p {
        config.p = p;
    }
    if let Some(bound) = flags.bound {
        config.bound = bound;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (suite, flags) = cli.command.split();
    let result = init_workers().and_then(|()| {
        let config = build_config(suite, flags)?;
        let output = run(&config)?;
        output.write()?;
        Ok(output)
    });
    match result {
        Ok(output) => {
            for line in output.summary() {
                println!("{line}");
            }
            if output.report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
