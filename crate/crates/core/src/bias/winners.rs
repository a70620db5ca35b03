use serde::{Deserialize, Serialize};

use super::tau_to_r;
use crate::effect::{d_from_logor, EffectEstimate, Interval};
use crate::numeric::{huber_iwls, kendall_tau_b, normal_quantile, HuberOptions, NumericError, RobustFit};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinnersCurse {
    pub n: usize,
    /// Kendall's tau between power and |log OR|; `None` when all effects
    /// (or all powers) are tied.
    pub tau: Option<f64>,
    pub p_value: Option<f64>,
    pub r_pearson: Option<f64>,
    pub fit: RobustFit,
    /// Fitted |log OR| at power = 1 with its 95% interval.
    pub es_at_full_power: f64,
    pub es_interval: Interval,
    /// The same on the d scale.
    pub d_at_full_power: f64,
    pub d_interval: Interval,
}

/// Relation between a priori power and observed effect magnitude, and the
/// robust-regression extrapolation to an ideally powered study.
pub fn winners_curse(estimates: &[EffectEstimate], powers: &[f64]) -> Result<WinnersCurse> {
    if estimates.len() != powers.len() {
        return Err(Error::Invalid(format!(
            "{} estimates but {} powers",
            estimates.len(),
            powers.len()
        )));
    }
    let n = estimates.len();
    if n < 4 {
        return Err(NumericError::InsufficientData { needed: 4, got: n }.into());
    }
    let es: Vec<f64> = estimates.iter().map(|e| e.log_or.abs()).collect();
    let (tau, p_value) = match kendall_tau_b(powers, &es) {
        Ok(k) => (Some(k.tau), Some(k.p_value)),
        Err(NumericError::UndefinedCorrelation(_)) => (None, None),
        Err(e) => return Err(e.into()),
    };
    let fit = huber_iwls(powers, &es, HuberOptions::default())?;
    let z = normal_quantile(0.975);
    let at = fit.predict(1.0);
    let half = z * fit.predict_se(1.0);
    let es_interval = Interval { lo: at - half, hi: at + half };
    Ok(WinnersCurse {
        n,
        tau,
        p_value,
        r_pearson: tau.map(tau_to_r),
        fit,
        es_at_full_power: at,
        es_interval,
        d_at_full_power: d_from_logor(at),
        d_interval: Interval { lo: d_from_logor(es_interval.lo), hi: d_from_logor(es_interval.hi) },
    })
}

#[cfg(test)]
mod tests {
    use super::super::funnel::tests::est;
    use super::*;

    #[test]
    fn constant_effects() {
        let e: Vec<_> = (0..8).map(|_| est("a", 0.4, 0.2)).collect();
        let p: Vec<f64> = (0..8).map(|i| 0.1 + 0.1 * i as f64).collect();
        let w = winners_curse(&e, &p).unwrap();
        assert_eq!(w.tau, None);
        assert!(w.fit.slope.abs() < 1e-12);
        assert!((w.es_at_full_power - 0.4).abs() < 1e-12);
    }

    #[test]
    fn curse_shows_as_negative_slope() {
        let p: Vec<f64> = (0..20).map(|i| 0.1 + 0.04 * i as f64).collect();
        let e: Vec<_> = p
            .iter()
            .enumerate()
            .map(|(i, pw)| est("a", 1.6 - 1.1 * pw + 0.02 * ((i % 3) as f64 - 1.0), 0.2))
            .collect();
        let w = winners_curse(&e, &p).unwrap();
        assert!(w.tau.unwrap() < -0.8);
        assert!((w.fit.intercept - 1.6).abs() < 0.05 && (w.fit.slope + 1.1).abs() < 0.05);
        assert!(w.es_interval.contains(0.5));
        assert!((w.d_at_full_power * crate::effect::LOGIT_SCALE - w.es_at_full_power).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_or_misaligned() {
        let e: Vec<_> = (0..3).map(|i| est("a", i as f64, 0.2)).collect();
        assert!(winners_curse(&e, &[0.1, 0.2, 0.3]).is_err());
        assert!(winners_curse(&e, &[0.1, 0.2]).is_err());
    }
}
