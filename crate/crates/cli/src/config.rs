//! Flat `key = value` experiment configs.
//!
//! ```text
//! # kernel sup sweep
//! suite = kernel-sweep
//! seed = 7
//! n = [8, 16, 32]
//! t = [0.001, 0.1, 10]
//! tol.weyl_c = 8
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use strichartz_core::numeric::log_space;

use crate::error::{CliError, ConfigError};

/// Largest per-query tuple count accepted by the `omega` suite.
pub const MAX_OMEGA_ENUMERATION: f64 = 5e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    KernelSweep,
    Minima,
    PallVerify,
    Omega,
    Strichartz,
    Refocus,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::KernelSweep,
        Suite::Minima,
        Suite::PallVerify,
        Suite::Omega,
        Suite::Strichartz,
        Suite::Refocus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::KernelSweep => "kernel-sweep",
            Suite::Minima => "minima",
            Suite::PallVerify => "pall-verify",
            Suite::Omega => "omega",
            Suite::Strichartz => "strichartz",
            Suite::Refocus => "refocus",
        }
    }

    /// Tolerances the suite checks, with their defaults.
    pub fn default_tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Suite::KernelSweep => &[("weyl_c", 8.0), ("dispersive_c", 10.0), ("envelope_c", 2.0)],
            Suite::Minima => &[("davenport_c", 20.0)],
            Suite::PallVerify => &[("square_divisor_c", 200.0)],
            Suite::Omega => &[],
            Suite::Strichartz => &[("ratio_c", 10.0)],
            Suite::Refocus => &[("exponent_lo", 3.0), ("exponent_hi", 5.0)],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    pub seed: u64,
    /// Grid sizes `N`.
    pub n: Vec<u32>,
    /// Kernel times for `kernel-sweep`, durations `T` for `strichartz`.
    pub t: Vec<f64>,
    /// Largest time; `t` entries above it are dropped, and `minima` draws
    /// its times from `(0, t_max]`.
    pub t_max: f64,
    pub p: Vec<f64>,
    /// Numbers of points for `omega`.
    pub q: Vec<usize>,
    /// Forms per `N` (or random queries per `(q, N)` for `omega`).
    pub samples: usize,
    /// Bound on `A'` and `B'` for `pall-verify`.
    pub bound: i64,
    /// Search limit for `refocus`.
    pub q_max: u64,
    pub tol: BTreeMap<String, f64>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Defaults sized to finish well within ten minutes on a desktop.
    pub fn defaults(suite: Suite) -> Self {
        let tol = suite
            .default_tolerances()
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect();
        let mut c = ExperimentConfig {
            suite,
            seed: 0,
            n: vec![8, 16, 32],
            t: vec![1.0],
            t_max: 1000.0,
            p: vec![6.0, 8.0],
            q: vec![2, 3],
            samples: 4,
            bound: 50,
            q_max: 10_000_000,
            tol,
            out: PathBuf::from("results"),
        };
        match suite {
            Suite::KernelSweep => c.t = log_space(1e-3, 1e3, 25),
            Suite::Minima => {
                c.samples = 20;
                c.t_max = 100.0;
            }
            Suite::Omega => {
                c.n = vec![2, 3, 4];
                c.samples = 50;
            }
            Suite::Refocus => {
                c.n = vec![4, 6, 8];
                c.samples = 20;
            }
            Suite::PallVerify | Suite::Strichartz => {}
        }
        c
    }

    /// Parses config text. `suite` may appear on any line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(usize, String, Value)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, "expected 'key = value'"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::at(line, "missing key"));
            }
            if entries.iter().any(|(_, k, _)| k == key) {
                return Err(ConfigError::at(line, format!("duplicate key '{key}'")));
            }
            let value = Value::parse(value.trim()).map_err(|m| ConfigError::at(line, format!("{key}: {m}")))?;
            entries.push((line, key.to_string(), value));
        }
        let suite = match entries.iter().find(|(_, k, _)| k == "suite") {
            Some((line, _, v)) => v
                .scalar()
                .and_then(|s| s.parse::<Suite>())
                .map_err(|m| ConfigError::at(*line, m))?,
            None => return Err(ConfigError::general("missing key 'suite'")),
        };
        let mut config = ExperimentConfig::defaults(suite);
        let mut lines = BTreeMap::new();
        for (line, key, value) in &entries {
            config.set(key, value).map_err(|m| ConfigError::at(*line, format!("{key}: {m}")))?;
            lines.insert(key.as_str(), *line);
        }
        config.validate().map_err(|(key, m)| match lines.get(key) {
            Some(&line) => ConfigError::at(line, format!("{key}: {m}")),
            None => ConfigError::general(format!("{key}: {m}")),
        })?;
        Ok(config)
    }

    /// Loads config text, or the `config` object of a JSON report.
    pub fn load(text: &str) -> Result<Self, CliError> {
        if text.trim_start().starts_with('{') {
            let report: serde_json::Value = serde_json::from_str(text)?;
            let config = report
                .get("config")
                .ok_or_else(|| ConfigError::general("JSON document has no 'config' field"))?;
            let config: ExperimentConfig = serde_json::from_value(config.clone())?;
            config
                .validate()
                .map_err(|(key, m)| ConfigError::general(format!("{key}: {m}")))?;
            return Ok(config);
        }
        Ok(Self::parse(text)?)
    }

    fn set(&mut self, key: &str, value: &Value) -> Result<(), String> {
        if let Some(name) = key.strip_prefix("tol.") {
            if !self.tol.contains_key(name) {
                let known: Vec<_> = self.tol.keys().map(String::as_str).collect();
                return Err(format!("unknown tolerance for {} (known: {known:?})", self.suite));
            }
            self.tol.insert(name.to_string(), parse_scalar(value.scalar()?)?);
            return Ok(());
        }
        match key {
            "suite" => {}
            "seed" => self.seed = parse_scalar(value.scalar()?)?,
            "n" => self.n = value.list()?,
            "t" => self.t = value.list()?,
            "t_max" => self.t_max = parse_scalar(value.scalar()?)?,
            "p" => self.p = value.list()?,
            "q" => self.q = value.list()?,
            "samples" => self.samples = parse_scalar(value.scalar()?)?,
            "bound" => self.bound = parse_scalar(value.scalar()?)?,
            "q_max" => self.q_max = parse_scalar(value.scalar()?)?,
            "out" => self.out = PathBuf::from(value.scalar()?),
            _ => return Err("unknown key".to_string()),
        }
        Ok(())
    }

    /// Checks the invariants; the error names the offending key.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let fail = |key, m: &str| Err((key, m.to_string()));
        if self.n.is_empty() {
            return fail("n", "list must be nonempty");
        }
        if self.n.iter().any(|&n| n < 2) {
            return fail("n", "values must be >= 2");
        }
        if self.n.iter().any(|&n| n > 128) {
            return fail("n", "values must be <= 128");
        }
        if self.t.is_empty() {
            return fail("t", "list must be nonempty");
        }
        if self.t.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return fail("t", "values must be positive");
        }
        if self.suite == Suite::Strichartz && self.t.iter().any(|&t| t < 1.0) {
            return fail("t", "durations must be >= 1");
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return fail("t_max", "must be positive");
        }
        if self.suite != Suite::Minima && self.times().is_empty() {
            return fail("t_max", "drops every entry of t");
        }
        if self.p.is_empty() {
            return fail("p", "list must be nonempty");
        }
        if self.p.iter().any(|p| !(2.0..=64.0).contains(p)) {
            return fail("p", "values must lie in [2, 64]");
        }
        if self.q.is_empty() {
            return fail("q", "list must be nonempty");
        }
        if self.q.iter().any(|&q| q == 0 || q > 4) {
            return fail("q", "values must lie in 1..=4");
        }
        if self.suite == Suite::Omega {
            // Reference enumeration visits (2N - 1)^(2(q - 1)) tuples per query.
            let q = *self.q.iter().max().expect("checked nonempty") as i32;
            let n = *self.n.iter().max().expect("checked nonempty") as f64;
            if (2.0 * n - 1.0).powi(2 * (q - 1)) > MAX_OMEGA_ENUMERATION {
                return fail("n", "too large for the reference enumeration at this q");
            }
        }
        if self.samples == 0 {
            return fail("samples", "must be >= 1");
        }
        if !(1..=1000).contains(&self.bound) {
            return fail("bound", "must lie in 1..=1000");
        }
        if self.q_max == 0 {
            return fail("q_max", "must be >= 1");
        }
        if self.tol.values().any(|v| !v.is_finite()) {
            return fail("tol", "tolerances must be finite");
        }
        if self.out.as_os_str().is_empty() {
            return fail("out", "path must be nonempty");
        }
        Ok(())
    }

    /// `t` restricted to `t <= t_max`.
    pub fn times(&self) -> Vec<f64> {
        self.t.iter().copied().filter(|&t| t <= self.t_max).collect()
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tol[name]
    }

    /// The config as text accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        fn list<T: fmt::Display>(xs: &[T]) -> String {
            let items: Vec<_> = xs.iter().map(|x| x.to_string()).collect();
            format!("[{}]", items.join(", "))
        }
        let mut s = format!(
            "suite = {}\nseed = {}\nn = {}\nt = {}\nt_max = {}\np = {}\nq = {}\nsamples = {}\nbound = {}\nq_max = {}\nout = {}\n",
            self.suite,
            self.seed,
            list(&self.n),
            list(&self.t),
            self.t_max,
            list(&self.p),
            list(&self.q),
            self.samples,
            self.bound,
            self.q_max,
            self.out.display()
        );
        for (k, v) in &self.tol {
            s.push_str(&format!("tol.{k} = {v}\n"));
        }
        s
    }
}

enum Value {
    Scalar(String),
    List(Vec<String>),
}

impl Value {
    fn parse(s: &str) -> Result<Self, String> {
        if let Some(inner) = s.strip_prefix('[') {
            let inner = inner.strip_suffix(']').ok_or("unterminated list")?.trim();
            if inner.is_empty() {
                return Ok(Value::List(Vec::new()));
            }
            let items: Vec<String> = inner.split(',').map(|x| x.trim().to_string()).collect();
            if items.iter().any(String::is_empty) {
                return Err("empty list item".to_string());
            }
            return Ok(Value::List(items));
        }
        if s.is_empty() {
            return Err("missing value".to_string());
        }
        Ok(Value::Scalar(s.to_string()))
    }

    fn scalar(&self) -> Result<&str, String> {
        match self {
            Value::Scalar(s) => Ok(s),
            Value::List(_) => Err("expected a single value, found a list".to_string()),
        }
    }

    /// A bare scalar is read as a one-element list.
    fn list<T: FromStr>(&self) -> Result<Vec<T>, String> {
        match self {
            Value::Scalar(s) => Ok(vec![parse_scalar(s)?]),
            Value::List(items) => items.iter().map(|s| parse_scalar(s)).collect(),
        }
    }
}

fn parse_scalar<T: FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("invalid value '{s}'"))
}
