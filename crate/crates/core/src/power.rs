//! A priori power of t, Z, χ² and one-way F tests against fixed effect-size
//! thresholds. There is deliberately no entry point taking an observed
//! effect: power is only ever computed for a hypothesised threshold.

use serde::{Deserialize, Serialize};

use crate::apa::Statistic;
use crate::corpus::{CodedTest, Design};
use crate::effect::{d_from_r, Level, ThresholdTable};
use crate::numeric::{normal_cdf, normal_quantile, DistSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub power: f64,
    /// Power at alpha / m.
    pub power_mcc: f64,
    pub ncp: f64,
    pub critical_value: f64,
    pub critical_value_mcc: f64,
    pub alpha: f64,
    pub m: u32,
}

/// Design of a test, as far as power is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum PowerTest {
    /// Two-tailed independent-samples t-test; effect is d.
    TTwoSample { n1: f64, n2: f64 },
    /// Two-tailed paired t-test on n pairs with pre/post correlation r;
    /// effect is d (standardised by the per-occasion SD).
    Paired { n: f64, r: f64 },
    /// Two-tailed two-sample Z-test; effect is d.
    Z { n1: f64, n2: f64 },
    /// Upper-tail χ² test; effect is w.
    Chi2 { n: f64, df: f64 },
    /// One-way ANOVA with k groups of n_per; effect is f.
    AnovaOneway { k: f64, n_per: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerQuery {
    pub test: PowerTest,
    pub effect: f64,
    pub alpha: f64,
    pub m: u32,
}

fn check_alpha(alpha: f64, m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::Invalid("family size must be at least 1".into()));
    }
    let a = alpha / m as f64;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Invalid(format!("alpha/m = {a} outside (0, 1)")));
    }
    Ok(())
}

fn need(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Invalid(msg.into()))
    }
}

fn t_power(df: f64, delta: f64, alpha: f64) -> Result<(f64, f64)> {
    let crit = DistSpec::t(df).quantile(1.0 - alpha / 2.0)?;
    let nct = DistSpec::noncentral_t(df, delta);
    let p = nct.sf(crit)? + nct.cdf(-crit)?;
    Ok((p.clamp(0.0, 1.0), crit))
}

impl PowerTest {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PowerTest::TTwoSample { n1, n2 } | PowerTest::Z { n1, n2 } => {
                need(n1 >= 2.0 && n2 >= 2.0 && (n1 + n2).is_finite(), "group sizes must be at least 2")
            }
            PowerTest::Paired { n, r } => {
                need(n >= 2.0 && n.is_finite(), "paired design needs at least 2 pairs")?;
                need(r > -1.0 && r < 1.0, "correlation must lie in (-1, 1)")
            }
            PowerTest::Chi2 { n, df } => {
                need(n >= 1.0 && n.is_finite(), "chi-square needs N >= 1")?;
                need(df >= 1.0 && df.is_finite(), "chi-square needs df >= 1")
            }
            PowerTest::AnovaOneway { k, n_per } => {
                need(k >= 2.0 && k.is_finite(), "one-way ANOVA needs at least 2 groups")?;
                need(n_per >= 2.0 && n_per.is_finite(), "one-way ANOVA needs n >= 2 per group")
            }
        }
    }

    /// `(power, ncp, critical value)` at significance level `alpha`.
    fn at(&self, effect: f64, alpha: f64) -> Result<(f64, f64, f64)> {
        if !effect.is_finite() {
            return Err(Error::Invalid(format!("effect {effect} must be finite")));
        }
        Ok(match *self {
            PowerTest::TTwoSample { n1, n2 } => {
                let delta = effect * (n1 * n2 / (n1 + n2)).sqrt();
                let (p, crit) = t_power(n1 + n2 - 2.0, delta, alpha)?;
                (p, delta, crit)
            }
            PowerTest::Paired { n, r } => {
                let delta = effect * (n / (2.0 * (1.0 - r))).sqrt();
                let (p, crit) = t_power(n - 1.0, delta, alpha)?;
                (p, delta, crit)
            }
            PowerTest::Z { n1, n2 } => {
                let delta = effect * (n1 * n2 / (n1 + n2)).sqrt();
                let z = normal_quantile(1.0 - alpha / 2.0);
                let p = normal_cdf(delta - z) + normal_cdf(-delta - z);
                (p.clamp(0.0, 1.0), delta, z)
            }
            PowerTest::Chi2 { n, df } => {
                let lambda = n * effect * effect;
                let crit = DistSpec::chi2(df).quantile(1.0 - alpha)?;
                (DistSpec::noncentral_chi2(df, lambda).sf(crit)?, lambda, crit)
            }
            PowerTest::AnovaOneway { k, n_per } => {
                let lambda = effect * effect * k * n_per;
                let (d1, d2) = (k - 1.0, k * (n_per - 1.0));
                let crit = DistSpec::f(d1, d2).quantile(1.0 - alpha)?;
                (DistSpec::noncentral_f(d1, d2, lambda).sf(crit)?, lambda, crit)
            }
        })
    }
}

/// Power at `alpha` and, when `m > 1`, at the Bonferroni level `alpha / m`.
pub fn power_with_mcc(q: &PowerQuery) -> Result<PowerResult> {
    check_alpha(q.alpha, q.m)?;
    q.test.validate()?;
    let (power, ncp, crit) = q.test.at(q.effect, q.alpha)?;
    let (power_mcc, crit_mcc) = if q.m == 1 {
        (power, crit)
    } else {
        let (p, _, c) = q.test.at(q.effect, q.alpha / q.m as f64)?;
        // Guard the invariant against last-digit noise.
        (p.min(power), c)
    };
    Ok(PowerResult {
        power,
        power_mcc,
        ncp,
        critical_value: crit,
        critical_value_mcc: crit_mcc,
        alpha: q.alpha,
        m: q.m,
    })
}

fn single(test: PowerTest, effect: f64, alpha: f64) -> Result<PowerResult> {
    power_with_mcc(&PowerQuery { test, effect, alpha, m: 1 })
}

pub fn power_t_two_sample(n1: f64, n2: f64, d: f64, alpha: f64) -> Result<PowerResult> {
    single(PowerTest::TTwoSample { n1, n2 }, d, alpha)
}

pub fn power_z(n1: f64, n2: f64, d: f64, alpha: f64) -> Result<PowerResult> {
    single(PowerTest::Z { n1, n2 }, d, alpha)
}

pub fn power_chi2(n: f64, w: f64, df: f64, alpha: f64) -> Result<PowerResult> {
    single(PowerTest::Chi2 { n, df }, w, alpha)
}

pub fn power_anova_oneway(k: f64, n_per: f64, f: f64, alpha: f64) -> Result<PowerResult> {
    single(PowerTest::AnovaOneway { k, n_per }, f, alpha)
}

/// Group sizes of an even split of `n_total`, the larger half first.
pub fn even_split(n_total: u64) -> (u64, u64) {
    (n_total.div_ceil(2), n_total / 2)
}

/// Power had the whole sample gone into a single two-tailed
/// independent-samples t-test.
pub fn upper_bound_power(n_total: u64, d: f64, alpha: f64) -> Result<PowerResult> {
    if n_total < 4 {
        return Err(Error::Invalid(format!("N = {n_total} is too small for two groups of 2")));
    }
    let (a, b) = even_split(n_total);
    power_t_two_sample(a as f64, b as f64, d, alpha)
}

/// Effect-size scale a test's power is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    D,
    R,
    W,
    F,
}

/// Power design of a coded test, or `None` when the coded record carries no
/// sample size (degrees of freedom alone are not taken as one).
pub fn design_of(test: &CodedTest) -> Option<(PowerTest, EffectKind)> {
    let r = &test.test;
    let groups = test.groups().map(|(a, b)| (a as f64, b as f64));
    let split = || {
        test.n_value().filter(|&n| n >= 4).map(|n| {
            let (a, b) = even_split(n);
            (a as f64, b as f64)
        })
    };
    let two = || groups.or_else(split);
    Some(match r.statistic {
        Statistic::T if test.design == Design::Dependent => {
            let n = test.n1.or(test.n_value())? as f64;
            (PowerTest::Paired { n, r: test.correlation? }, EffectKind::D)
        }
        Statistic::T => {
            let (n1, n2) = two()?;
            (PowerTest::TTwoSample { n1, n2 }, EffectKind::D)
        }
        Statistic::R => {
            let (n1, n2) = two()?;
            (PowerTest::TTwoSample { n1, n2 }, EffectKind::R)
        }
        Statistic::Z => {
            let (n1, n2) = two()?;
            (PowerTest::Z { n1, n2 }, EffectKind::D)
        }
        Statistic::Chi2 => (PowerTest::Chi2 { n: test.total_n()?, df: r.df1? }, EffectKind::W),
        Statistic::F => {
            let k = r.df1? + 1.0;
            (PowerTest::AnovaOneway { k, n_per: test.total_n()? / k }, EffectKind::F)
        }
    })
}

/// Threshold on the scale the test's power routine expects.
pub fn threshold_effect(kind: EffectKind, table: &ThresholdTable, level: Level) -> Result<f64> {
    Ok(match kind {
        EffectKind::D => table.d.get(level),
        EffectKind::R => d_from_r(table.r.get(level))?,
        EffectKind::W => table.w.get(level),
        EffectKind::F => table.f.get(level),
    })
}

/// Power of a coded test against a threshold, with Bonferroni level
/// `alpha / m`. `Ok(None)` when the test has no usable design.
pub fn test_power(
    test: &CodedTest,
    table: &ThresholdTable,
    level: Level,
    alpha: f64,
    m: u32,
) -> Result<Option<PowerResult>> {
    let Some((design, kind)) = design_of(test) else {
        return Ok(None);
    };
    if design.validate().is_err() {
        return Ok(None);
    }
    let effect = threshold_effect(kind, table, level)?;
    power_with_mcc(&PowerQuery { test: design, effect, alpha, m }).map(Some)
}
