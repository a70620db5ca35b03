use serde::{Deserialize, Serialize};

use super::{Comparator, ReportedTest, Statistic, Tails};
use crate::numeric::{domain, DistSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyStatus {
    Consistent,
    ComputationError,
    /// A computation error that also flips significance at `alpha_ref`.
    DecisionError,
    OneTailedConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyVerdict {
    pub p_recomputed: f64,
    pub status: ConsistencyStatus,
    pub alpha_ref: f64,
}

impl ConsistencyVerdict {
    pub fn is_error(&self) -> bool {
        matches!(
            self.status,
            ConsistencyStatus::ComputationError | ConsistencyStatus::DecisionError
        )
    }
}

fn need(df: Option<f64>, what: &str) -> Result<f64> {
    df.ok_or_else(|| Error::Invalid(format!("{what} requires degrees of freedom")))
}

/// p-value implied by the statistic: two-tailed for t, Z and r unless the
/// report says one-tailed; upper tail for chi-square and F.
pub fn recompute_p(test: &ReportedTest) -> Result<f64> {
    let v = test.value;
    if !v.is_finite() {
        return Err(domain("statistic must be finite").into());
    }
    let two_sided = |sf: f64| match test.tails {
        Tails::One => sf,
        _ => (2.0 * sf).min(1.0),
    };
    let p = match test.statistic {
        Statistic::Z => two_sided(DistSpec::normal().sf(v.abs())?),
        Statistic::T => two_sided(DistSpec::t(need(test.df1, "t")?).sf(v.abs())?),
        Statistic::R => {
            let df = need(test.df1, "r")?;
            if v.abs() >= 1.0 {
                return Err(domain(format!("correlation {v} outside (-1, 1)")).into());
            }
            let t = v.abs() * (df / (1.0 - v * v)).sqrt();
            two_sided(DistSpec::t(df).sf(t)?)
        }
        Statistic::Chi2 => DistSpec::chi2(need(test.df1, "chi-square")?).sf(v)?,
        Statistic::F => {
            let dist = DistSpec::f(need(test.df1, "F")?, need(test.df2, "F")?);
            dist.sf(v)?
        }
    };
    Ok(p.clamp(0.0, 1.0))
}

/// Whether `p` is compatible with the reported p-value clause.
fn agrees(test: &ReportedTest, p: f64, alpha: f64) -> bool {
    let Some(rep) = test.p_reported else {
        return test.p_comparator == Comparator::Ns && p >= alpha;
    };
    match test.p_comparator {
        Comparator::Eq => {
            // Work in units of the last reported digit so the interval ends
            // are exact.
            let d = test.p_decimals.unwrap_or_else(|| super::decimals_of(rep));
            let scale = 10f64.powi(d as i32);
            let (p, rep) = (p * scale, (rep * scale).round());
            rep - 0.5 <= p && p < rep + 0.5
        }
        Comparator::Lt => p < rep,
        Comparator::Gt => p > rep,
        Comparator::Ns => p >= alpha,
    }
}

/// Significance claimed by the report; `None` when the clause cannot say.
fn reported_significant(test: &ReportedTest, alpha: f64) -> Option<bool> {
    match (test.p_comparator, test.p_reported) {
        (Comparator::Ns, _) => Some(false),
        (Comparator::Eq, Some(p)) => Some(p <= alpha),
        (Comparator::Lt, Some(p)) => (p <= alpha).then_some(true),
        (Comparator::Gt, Some(p)) => (p >= alpha).then_some(false),
        (_, None) => None,
    }
}

/// Classify a report against its recomputed p-value.
///
/// A report that is inconsistent as a two-tailed test but consistent once
/// the p-value is halved is classed as one-tailed consistent, unless the
/// report explicitly says two-tailed.
pub fn check_consistency(test: &ReportedTest, alpha_ref: f64) -> Result<ConsistencyVerdict> {
    if !(alpha_ref > 0.0 && alpha_ref < 1.0) {
        return Err(Error::Invalid(format!("alpha {alpha_ref} outside (0, 1)")));
    }
    test.validate()?;
    let p = recompute_p(test)?;
    let verdict = |status| ConsistencyVerdict { p_recomputed: p, status, alpha_ref };
    if agrees(test, p, alpha_ref) {
        return Ok(verdict(ConsistencyStatus::Consistent));
    }
    let symmetric = matches!(test.statistic, Statistic::T | Statistic::Z | Statistic::R);
    if symmetric && test.tails == Tails::Unstated && agrees(test, p / 2.0, alpha_ref) {
        return Ok(verdict(ConsistencyStatus::OneTailedConsistent));
    }
    let flipped = reported_significant(test, alpha_ref).is_some_and(|s| s != (p < alpha_ref));
    Ok(verdict(if flipped {
        ConsistencyStatus::DecisionError
    } else {
        ConsistencyStatus::ComputationError
    }))
}
