//! Report records shared by every inequality checker and suite runner.

use serde::{Deserialize, Serialize};

/// Outcome of one measured-inequality check. `lhs` and `rhs` record the
/// worst-case pair over the sample family, `fitted_c` the least constant
/// making `lhs <= C * rhs` across the family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub inequality_id: String,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(rename = "fitted_C")]
    pub fitted_c: f64,
    pub samples: usize,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub fn new(id: impl Into<String>) -> Self {
        EstimateReport {
            inequality_id: id.into(),
            lhs: 0.0,
            rhs: 0.0,
            fitted_c: 0.0,
            samples: 0,
            pass: false,
            notes: Vec::new(),
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    /// Fill `lhs`, `rhs`, `fitted_c`, `samples` from measured pairs by the
    /// least-max rule: the reported constant is the largest ratio, and the
    /// reported sides are the pair attaining it. Pairs whose right side is
    /// zero are skipped unless the left side is meaningfully nonzero, in
    /// which case the fit is infinite.
    pub fn fit_least_max(&mut self, pairs: &[(f64, f64)]) {
        self.samples = pairs.len();
        let mut best = f64::NEG_INFINITY;
        for &(lhs, rhs) in pairs {
            if rhs == 0.0 {
                if lhs.abs() > 1e-300 {
                    best = f64::INFINITY;
                    self.lhs = lhs;
                    self.rhs = rhs;
                }
                continue;
            }
            let c = lhs / rhs;
            if c > best {
                best = c;
                self.lhs = lhs;
                self.rhs = rhs;
            }
        }
        self.fitted_c = if best == f64::NEG_INFINITY { 0.0 } else { best };
    }
}

/// All values within `tol` (relative) of their mean; the reading of
/// "stable within +-tol" used across the checkers.
pub fn stable_within(values: &[f64], tol: f64) -> bool {
    if values.is_empty() {
        return false;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if !mean.is_finite() || mean == 0.0 {
        return false;
    }
    values
        .iter()
        .all(|v| v.is_finite() && (v - mean).abs() <= tol * mean.abs())
}

/// Least-squares slope of `log(y)` against `log(x)`; the growth-trend
/// estimate used by the transport checks.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Result of one verification suite: a named bundle of reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub runtime_seconds: f64,
    pub reports: Vec<EstimateReport>,
}

impl SuiteResult {
    pub fn new(suite: impl Into<String>) -> Self {
        SuiteResult {
            suite: suite.into(),
            passed: true,
            runtime_seconds: 0.0,
            reports: Vec::new(),
        }
    }

    pub fn push(&mut self, report: EstimateReport) {
        self.passed &= report.pass;
        self.reports.push(report);
    }
}
