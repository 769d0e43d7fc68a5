//! Structured verification reports serialized to JSON.

use serde::Serialize;

/// One named residual check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// A batch of residual checks plus free-form numeric notes.
#[derive(Debug, Clone, Serialize, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Informational values that are reported but not gated.
    pub notes: std::collections::BTreeMap<String, f64>,
}

impl VerifyReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, residual: f64, tol: f64) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        self.checks.push(Check { name: name.into(), residual, tol, pass: residual <= tol });
    }

    /// A boolean check recorded as residual 0 or 1.
    pub fn push_bool(&mut self, name: impl Into<String>, ok: bool) {
        self.push(name, if ok { 0.0 } else { 1.0 }, 0.5);
    }

    pub fn note(&mut self, name: impl Into<String>, value: f64) {
        self.notes.insert(name.into(), value);
    }

    pub fn merge(&mut self, other: VerifyReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().fold(0.0f64, |acc, c| acc.max(c.residual))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_fail_aggregation() {
        let mut r = VerifyReport::new();
        r.push("a", 1e-15, 1e-12);
        assert!(r.passed());
        r.push("b", 1.0, 1e-12);
        assert!(!r.passed());
        assert_eq!(r.max_residual(), 1.0);
    }

    #[test]
    fn nan_residual_fails() {
        let mut r = VerifyReport::new();
        r.push("nan", f64::NAN, 1e-12);
        assert!(!r.passed());
    }
}
