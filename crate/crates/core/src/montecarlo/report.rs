//! Study reports and their JSON / CSV renderings.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::stats::RateFit;
use crate::levy_models::LimitClassification;
use crate::rng::SPLIT_SCHEME;

/// One `(ε, quantity)` comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub eps: f64,
    pub quantity: String,
    pub estimate: f64,
    pub se: f64,
    pub oracle: Option<f64>,
    pub oracle_se: Option<f64>,
    pub n: usize,
}

impl StudyRow {
    /// `|estimate - oracle|` with the joint standard error.
    pub fn deviation(&self) -> Option<(f64, f64)> {
        let o = self.oracle?;
        let ose = self.oracle_se.unwrap_or(0.0);
        Some(((self.estimate - o).abs(), self.se.hypot(ose)))
    }
}

/// Named test statistic, optionally tied to one grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestStatistic {
    pub name: String,
    pub eps: Option<f64>,
    pub value: f64,
    pub p_value: Option<f64>,
}

/// Pass/fail item. Only `required` checks enter the overall verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub required: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub library_version: String,
    pub stream_scheme: String,
}

impl Provenance {
    pub fn new(seed: u64, config_hash: String) -> Self {
        Self {
            seed,
            config_hash,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            stream_scheme: SPLIT_SCHEME.to_string(),
        }
    }
}

/// Deterministic work counters (no wall-clock data, so reports are reproducible).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WorkSummary {
    pub paths_per_eps: Vec<usize>,
    pub escalation_rounds: u32,
    pub oracle_paths: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub model: String,
    pub classification: Option<LimitClassification<f64>>,
    pub eps_grid: Vec<f64>,
    pub rows: Vec<StudyRow>,
    pub rate_fit: Option<RateFit>,
    /// Exponent the fitted slope is compared against.
    pub rate_target: Option<f64>,
    pub statistics: Vec<TestStatistic>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub verdict: String,
    pub work: WorkSummary,
    pub provenance: Provenance,
}

impl StudyReport {
    pub fn new(study: &str, model: String, eps_grid: Vec<f64>, provenance: Provenance) -> Self {
        Self {
            study: study.into(),
            model,
            classification: None,
            eps_grid,
            rows: Vec::new(),
            rate_fit: None,
            rate_target: None,
            statistics: Vec::new(),
            checks: Vec::new(),
            passed: false,
            verdict: String::new(),
            work: WorkSummary::default(),
            provenance,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, required: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            required,
            detail: detail.into(),
        });
    }

    pub fn stat(&mut self, name: impl Into<String>, eps: Option<f64>, value: f64, p_value: Option<f64>) {
        self.statistics.push(TestStatistic {
            name: name.into(),
            eps,
            value,
            p_value,
        });
    }

    /// Sets `passed` from the required checks; `verdict` gets a default text
    /// when none was set.
    pub fn finish(&mut self) {
        self.passed = self.checks.iter().filter(|c| c.required).all(|c| c.passed);
        if self.verdict.is_empty() {
            let failed: Vec<&str> = self
                .checks
                .iter()
                .filter(|c| c.required && !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            self.verdict = if failed.is_empty() {
                "pass".into()
            } else {
                format!("fail: {}", failed.join(", "))
            };
        }
    }

    pub fn rows_for<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a StudyRow> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Flat CSV, one row per `(ε, quantity)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("study,eps,quantity,estimate,se,oracle,oracle_se,n\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                self.study,
                r.eps,
                csv_field(&r.quantity),
                r.estimate,
                r.se,
                opt(r.oracle),
                opt(r.oracle_se),
                r.n
            );
        }
        s
    }

    /// Tidy long-format CSV for plotting: estimate with ±1.96 SE band and oracle.
    pub fn to_plot_data(&self) -> String {
        let mut s = String::from("study,eps,quantity,series,value\n");
        for r in &self.rows {
            let q = csv_field(&r.quantity);
            let mut push = |series: &str, v: f64| {
                let _ = writeln!(s, "{},{},{},{},{}", self.study, r.eps, q, series, v);
            };
            push("estimate", r.estimate);
            push("lower", r.estimate - 1.96 * r.se);
            push("upper", r.estimate + 1.96 * r.se);
            if let Some(o) = r.oracle {
                push("oracle", o);
            }
        }
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Hash of a serializable configuration plus a model description.
pub fn config_hash<C: Serialize>(config: &C, model: &str) -> String {
    let mut bytes = serde_json::to_vec(config).expect("config serialization");
    bytes.push(b'\n');
    bytes.extend_from_slice(model.as_bytes());
    sha256_hex(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_and_verdict() {
        let mut r = StudyReport::new("demo", "m".into(), vec![0.1], Provenance::new(1, "h".into()));
        r.rows.push(StudyRow {
            eps: 0.1,
            quantity: "tau^1*pow_cap(2)".into(),
            estimate: 1.0,
            se: 0.1,
            oracle: Some(1.05),
            oracle_se: None,
            n: 10,
        });
        r.check("a", true, true, "");
        r.check("b", false, false, "");
        r.finish();
        assert!(r.passed);
        assert_eq!(r.verdict, "pass");
        let csv = r.to_csv();
        assert_eq!(csv.lines().nth(1).unwrap(), "demo,0.1,tau^1*pow_cap(2),1,0.1,1.05,,10");
        assert_eq!(r.to_plot_data().lines().count(), 5);
        let (d, se) = r.rows[0].deviation().unwrap();
        assert!((d - 0.05).abs() < 1e-12 && se == 0.1);
    }
}
