//! Structured pass/fail records.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Index of the sample point the check ran on, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    /// Non-finite residuals are written as `null`.
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_nan")]
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Passes when `residual < tolerance`; a NaN residual always fails.
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckRecord { name: name.into(), sample: None, residual, tolerance, pass: residual < tolerance }
    }

    /// A boolean verdict, recorded as residual 0 (pass) or 1 (fail) against tolerance 0.5.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        CheckRecord::new(name, if ok { 0.0 } else { 1.0 }, 0.5)
    }

    pub fn at(mut self, sample: usize) -> Self {
        self.sample = Some(sample);
        self
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl Summary {
    pub fn of(records: &[CheckRecord]) -> Summary {
        let passed = records.iter().filter(|r| r.pass).count();
        Summary { total: records.len(), passed, failed: records.len() - passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    /// Metric file path, or `berwald-moor:<n>`.
    pub metric: String,
    pub points: Vec<Vec<f64>>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    pub engine_version: String,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
}

impl CheckReport {
    pub fn new(
        metric: String,
        points: Vec<Vec<f64>>,
        checks: Vec<CheckRecord>,
        seed: Option<u64>,
        tolerances: Tolerances,
    ) -> CheckReport {
        let summary = Summary::of(&checks);
        CheckReport {
            metric,
            points,
            checks,
            summary,
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            tolerances,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|r| !r.pass)
    }
}
