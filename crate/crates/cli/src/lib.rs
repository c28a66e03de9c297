//! Batch driver for the verification suites: loads a flat config, runs the
//! suite on a worker pool and writes `<out>/<suite>.csv` and
//! `<out>/<suite>.json`.

pub mod config;
pub mod error;
pub mod report;
pub mod suites;

use std::fs;
use std::path::PathBuf;

pub use config::{ExperimentConfig, Suite};
pub use error::{CliError, ConfigError};
pub use report::{emit_report, Report, SuiteResults, Violation};

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "STRICHARTZ_WORKERS";

/// Sizes the global worker pool from [`WORKERS_ENV`], if set.
pub fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

/// Everything a run produces.
pub struct RunOutput {
    pub report: Report,
    pub csv: Vec<u8>,
    pub notes: Vec<String>,
}

impl RunOutput {
    pub fn json(&self) -> Result<String, CliError> {
        Ok(serde_json::to_string_pretty(&self.report)? + "\n")
    }

    pub fn csv_path(&self) -> PathBuf {
        self.report.config.out.join(format!("{}.csv", self.report.suite))
    }

    pub fn json_path(&self) -> PathBuf {
        self.report.config.out.join(format!("{}.json", self.report.suite))
    }

    /// Writes the CSV and JSON files, creating the output directory.
    pub fn write(&self) -> Result<(), CliError> {
        let dir = &self.report.config.out;
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let csv_path = self.csv_path();
        fs::write(&csv_path, &self.csv).map_err(|e| CliError::io(&csv_path, e))?;
        let json_path = self.json_path();
        fs::write(&json_path, self.json()?).map_err(|e| CliError::io(&json_path, e))?;
        Ok(())
    }

    /// Console summary lines.
    pub fn summary(&self) -> Vec<String> {
        let r = &self.report;
        let mut lines = vec![format!(
            "{}: seed {}, {} checks, {} violations",
            r.suite,
            r.seed,
            r.checks,
            r.violations.len()
        )];
        lines.extend(self.notes.iter().cloned());
        lines.extend(r.fitted_exponents.iter().map(|(k, v)| format!("fitted {k} = {v:.4}")));
        lines.extend(r.max_ratios.iter().map(|(k, v)| format!("max ratio {k} = {v:.4}")));
        lines.extend(r.violations.iter().take(20).map(|v| {
            format!("violation: {}", serde_json::to_string(v).unwrap_or_default())
        }));
        lines.push(format!("wrote {} and {}", self.csv_path().display(), self.json_path().display()));
        lines
    }
}

/// Runs the suite without touching the file system.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    config
        .validate()
        .map_err(|(key, m)| ConfigError::general(format!("{key}: {m}")))?;
    let out = suites::run_suite(config)?;
    Ok(RunOutput {
        report: emit_report(config, &out.results),
        csv: out.csv,
        notes: out.results.notes,
    })
}
