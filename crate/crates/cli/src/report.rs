use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Suite};

pub const SCHEMA_VERSION: u32 = 1;

/// One failed check, located by its sample coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub seed: u64,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// `(A', B', C')` for representation-count checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub query: Option<[i64; 3]>,
    pub value: f64,
    pub limit: f64,
}

impl Violation {
    /// A check not tied to one sample.
    pub fn global(check: &str, seed: u64, value: f64, limit: f64) -> Self {
        Violation {
            check: check.to_string(),
            seed,
            n: None,
            t: None,
            p: None,
            t_end: None,
            query: None,
            value,
            limit,
        }
    }

    pub fn new(check: &str, seed: u64, n: u32, value: f64, limit: f64) -> Self {
        Violation {
            n: Some(n),
            ..Self::global(check, seed, value, limit)
        }
    }

    pub fn for_query(check: &str, seed: u64, query: [i64; 3], value: f64, limit: f64) -> Self {
        Violation {
            query: Some(query),
            ..Self::global(check, seed, value, limit)
        }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn at_exponent(mut self, p: f64, t_end: f64) -> Self {
        self.p = Some(p);
        self.t_end = Some(t_end);
        self
    }
}

/// Suite results before serialisation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteResults {
    pub checks: u64,
    pub fitted_exponents: BTreeMap<String, f64>,
    pub max_ratios: BTreeMap<String, f64>,
    pub violations: Vec<Violation>,
    /// Extra lines for the console summary.
    pub notes: Vec<String>,
}

impl SuiteResults {
    /// Counts a check of `value <= limit`, recording a violation on failure.
    pub fn check_le(&mut self, value: f64, limit: f64, violation: impl FnOnce() -> Violation) {
        self.checks += 1;
        if !(value <= limit) {
            let mut v = violation();
            v.value = value;
            v.limit = limit;
            self.violations.push(v);
        }
    }

    pub fn ratio(&mut self, name: &str, value: f64) {
        let slot = self.max_ratios.entry(name.to_string()).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(value);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub suite: Suite,
    pub seed: u64,
    pub checks: u64,
    pub fitted_exponents: BTreeMap<String, f64>,
    pub max_ratios: BTreeMap<String, f64>,
    pub violations: Vec<Violation>,
    pub config: ExperimentConfig,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn emit_report(config: &ExperimentConfig, results: &SuiteResults) -> Report {
    Report {
        schema_version: SCHEMA_VERSION,
        suite: config.suite,
        seed: config.seed,
        checks: results.checks,
        fitted_exponents: results.fitted_exponents.clone(),
        max_ratios: results.max_ratios.clone(),
        violations: results.violations.clone(),
        config: config.clone(),
    }
}
