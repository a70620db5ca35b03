use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::DistSpec;
use crate::power::{power_with_mcc, PowerQuery, PowerTest};
use crate::{Error, Result};

/// Significance level at which excess significance is judged.
pub const ALPHA_ESR: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChasingResult {
    /// Observed number of significant tests.
    pub observed: usize,
    /// Expected number, the sum of the tests' powers.
    pub expected: f64,
    pub n: usize,
    pub a: f64,
    pub p_value: f64,
    /// More significant results than expected, at `ALPHA_ESR`.
    pub excess: bool,
}

/// Excess-significance test from (power, significant) pairs.
pub fn sig_chasing(tests: &[(f64, bool)]) -> Result<ChasingResult> {
    let n = tests.len();
    if n == 0 {
        return Err(Error::InsufficientData("no tests for the excess-significance test".into()));
    }
    if tests.iter().any(|(p, _)| !(0.0..=1.0).contains(p)) {
        return Err(Error::Invalid("power outside [0, 1]".into()));
    }
    let observed = tests.iter().filter(|t| t.1).count();
    let expected: f64 = tests.iter().map(|t| t.0).sum();
    from_counts(observed, expected, n)
}

fn from_counts(observed: usize, expected: f64, n: usize) -> Result<ChasingResult> {
    let nf = n as f64;
    if !(expected > 0.0 && expected < nf) {
        return Err(Error::Degenerate(format!("expected count {expected} not inside (0, {n})")));
    }
    let diff2 = (observed as f64 - expected).powi(2);
    let a = diff2 / expected + diff2 / (nf - expected);
    let p_value = if a == 0.0 { 1.0 } else { DistSpec::chi2(1.0).sf(a)? };
    Ok(ChasingResult {
        observed,
        expected,
        n,
        a,
        p_value,
        excess: p_value < ALPHA_ESR && observed as f64 > expected,
    })
}

/// One test as seen by the chasing curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChasingInput {
    pub design: PowerTest,
    /// Threshold effect on the design's scale.
    pub effect: f64,
    pub p_value: f64,
    /// Family size for the Bonferroni level.
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChasingCurve {
    pub alpha_grid: Vec<f64>,
    pub observed: Vec<usize>,
    pub expected: Vec<f64>,
    /// `None` where the expected count is 0 or n.
    pub a_values: Vec<Option<f64>>,
    pub p_values: Vec<Option<f64>>,
    pub n: usize,
    pub mcc_applied: bool,
}

impl ChasingCurve {
    /// Smallest p over grid points within `[lo, hi]`.
    pub fn min_p_between(&self, lo: f64, hi: f64) -> Option<f64> {
        self.alpha_grid
            .iter()
            .zip(&self.p_values)
            .filter(|(a, _)| (lo..=hi).contains(*a))
            .filter_map(|(_, p)| *p)
            .min_by(f64::total_cmp)
    }
}

/// 0.005, 0.010, …, 0.200.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=40).map(|i| i as f64 * 0.005).collect()
}

/// The excess-significance test repeated over a grid of significance levels.
/// With `mcc`, each test is judged (and its power computed) at alpha / m.
pub fn chasing_curve(tests: &[ChasingInput], alpha_grid: &[f64], mcc: bool) -> Result<ChasingCurve> {
    if tests.is_empty() {
        return Err(Error::InsufficientData("no tests for the chasing curve".into()));
    }
    if alpha_grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::Invalid("alpha grid must lie inside (0, 1)".into()));
    }
    let points: Vec<(usize, f64)> = alpha_grid
        .par_iter()
        .map(|&alpha| {
            let mut observed = 0;
            let mut expected = 0.0;
            for t in tests {
                let m = if mcc { t.m } else { 1 };
                if t.p_value < alpha / m as f64 {
                    observed += 1;
                }
                let q = PowerQuery { test: t.design, effect: t.effect, alpha, m };
                let r = power_with_mcc(&q)?;
                expected += r.power_mcc;
            }
            Ok((observed, expected))
        })
        .collect::<Result<_>>()?;
    let n = tests.len();
    let mut curve = ChasingCurve {
        alpha_grid: alpha_grid.to_vec(),
        observed: Vec::with_capacity(points.len()),
        expected: Vec::with_capacity(points.len()),
        a_values: Vec::with_capacity(points.len()),
        p_values: Vec::with_capacity(points.len()),
        n,
        mcc_applied: mcc,
    };
    for (o, e) in points {
        let r = from_counts(o, e, n).ok();
        curve.observed.push(o);
        curve.expected.push(e);
        curve.a_values.push(r.map(|r| r.a));
        curve.p_values.push(r.map(|r| r.p_value));
    }
    Ok(curve)
}
