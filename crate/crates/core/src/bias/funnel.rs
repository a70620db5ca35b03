use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tau_to_r;
use crate::effect::EffectEstimate;
use crate::numeric::{kendall_tau_b, NumericError};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunnelPoint {
    pub paper_id: String,
    pub log_or: f64,
    pub se: f64,
    /// Mean over the paper's tests rather than a single test.
    pub aggregated: bool,
    /// Tests behind the point.
    pub n_tests: usize,
}

/// Funnel points, either one per estimate or the per-paper mean of log OR
/// and of SE (papers in id order).
pub fn build_funnel(estimates: &[EffectEstimate], per_paper: bool) -> Result<Vec<FunnelPoint>> {
    if estimates.is_empty() {
        return Err(Error::InsufficientData("funnel of no estimates".into()));
    }
    if !per_paper {
        return Ok(estimates
            .iter()
            .map(|e| FunnelPoint {
                paper_id: e.paper_id.clone(),
                log_or: e.log_or,
                se: e.se_log_or,
                aggregated: false,
                n_tests: 1,
            })
            .collect());
    }
    let mut by_paper: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for e in estimates {
        by_paper.entry(&e.paper_id).or_default().push((e.log_or, e.se_log_or));
    }
    Ok(by_paper
        .into_iter()
        .map(|(id, mut v)| {
            // Fixed summation order keeps the means independent of input order.
            v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let n = v.len() as f64;
            FunnelPoint {
                paper_id: id.to_string(),
                log_or: v.iter().map(|p| p.0).sum::<f64>() / n,
                se: v.iter().map(|p| p.1).sum::<f64>() / n,
                aggregated: true,
                n_tests: v.len(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeggVariant {
    /// Variance-stabilised deviates against variances.
    #[default]
    Standardized,
    /// Raw effects against standard errors, for sensitivity checks.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeggResult {
    pub tau: f64,
    pub p_value: f64,
    pub z: f64,
    pub n: usize,
    /// `sin(πτ/2)`.
    pub r_pearson: f64,
    pub variant: BeggVariant,
    /// All effects identical, so no rank relation exists; tau is reported
    /// as 0 with p = 1.
    pub degenerate: bool,
}

pub fn begg_mazumdar(points: &[FunnelPoint]) -> Result<BeggResult> {
    begg_mazumdar_with(points, BeggVariant::Standardized)
}

/// Rank correlation between standardised effects and their variances.
pub fn begg_mazumdar_with(points: &[FunnelPoint], variant: BeggVariant) -> Result<BeggResult> {
    let n = points.len();
    if n < 3 {
        return Err(NumericError::InsufficientData { needed: 3, got: n }.into());
    }
    if points.iter().any(|p| !(p.se > 0.0) || !p.se.is_finite() || !p.log_or.is_finite()) {
        return Err(Error::Invalid("funnel points need finite effects and positive SEs".into()));
    }
    let es: Vec<f64> = points.iter().map(|p| p.log_or).collect();
    let degenerate = |variant| BeggResult {
        tau: 0.0,
        p_value: 1.0,
        z: 0.0,
        n,
        r_pearson: 0.0,
        variant,
        degenerate: true,
    };
    if es.iter().all(|&e| e == es[0]) {
        return Ok(degenerate(variant));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = match variant {
        BeggVariant::Raw => (es, points.iter().map(|p| p.se).collect()),
        BeggVariant::Standardized => {
            let v: Vec<f64> = points.iter().map(|p| p.se * p.se).collect();
            let sw: f64 = v.iter().map(|vi| 1.0 / vi).sum();
            let mean = es.iter().zip(&v).map(|(e, vi)| e / vi).sum::<f64>() / sw;
            let t = es
                .iter()
                .zip(&v)
                .map(|(e, vi)| (e - mean) / (vi - 1.0 / sw).max(0.0).sqrt())
                .collect();
            (t, v)
        }
    };
    match kendall_tau_b(&x, &y) {
        Ok(k) => Ok(BeggResult {
            tau: k.tau,
            p_value: k.p_value,
            z: k.z,
            n,
            r_pearson: tau_to_r(k.tau),
            variant,
            degenerate: false,
        }),
        // Equal SEs: no funnel to be asymmetric.
        Err(NumericError::UndefinedCorrelation(_)) => Ok(degenerate(variant)),
        Err(e) => Err(e.into()),
    }
}
