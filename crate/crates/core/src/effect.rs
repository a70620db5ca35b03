//! Standardised effect sizes: Cohen's d, Hedges' g and the log odds ratio,
//! with sampling variances and (Bonferroni-adjusted) confidence intervals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::apa::Statistic;
use crate::corpus::{CodedTest, Design};
use crate::numeric::{domain, normal_quantile};
use crate::{Error, Result};

/// π/√3, the logistic-distribution scale linking d and log OR.
pub const LOGIT_SCALE: f64 = PI / 1.732_050_807_568_877_2;

pub fn d_from_t(t: f64, n1: f64, n2: f64) -> f64 {
    t * (1.0 / n1 + 1.0 / n2).sqrt()
}

pub fn pooled_sd(sd1: f64, sd2: f64, n1: f64, n2: f64) -> f64 {
    (((n1 - 1.0) * sd1 * sd1 + (n2 - 1.0) * sd2 * sd2) / (n1 + n2 - 2.0)).sqrt()
}

pub fn d_from_means(m1: f64, m2: f64, sd1: f64, sd2: f64, n1: f64, n2: f64) -> Result<f64> {
    let s = pooled_sd(sd1, sd2, n1, n2);
    if !(s > 0.0) {
        return Err(Error::Degenerate("pooled standard deviation is zero".into()));
    }
    Ok((m1 - m2) / s)
}

/// Small-sample corrected d.
pub fn hedges_g(d: f64, n1: f64, n2: f64) -> f64 {
    d * (1.0 - 3.0 / (4.0 * (n1 + n2 - 2.0) - 1.0))
}

pub fn d_from_r(r: f64) -> Result<f64> {
    if !(r.abs() < 1.0) {
        return Err(domain(format!("correlation {r} outside (-1, 1)")).into());
    }
    Ok(2.0 * r / (1.0 - r * r).sqrt())
}

pub fn d_from_phi(phi: f64) -> Result<f64> {
    d_from_r(phi)
}

/// Two-group case: f is half the standardised mean difference.
pub fn d_from_f(f: f64) -> Result<f64> {
    if !(f >= 0.0) {
        return Err(domain(format!("Cohen's f {f} must be nonnegative")).into());
    }
    Ok(2.0 * f)
}

pub fn w_from_chi2(chi2: f64, n: f64) -> f64 {
    (chi2 / n).sqrt()
}

pub fn f_from_f_stat(f_stat: f64, df1: f64, df2: f64) -> f64 {
    (f_stat * df1 / df2).sqrt()
}

pub fn var_d(d: f64, n1: f64, n2: f64) -> f64 {
    (n1 + n2) / (n1 * n2) + d * d / (2.0 * (n1 + n2))
}

/// `(log_or, var_log_or)` for a standardised mean difference.
pub fn logor_from_d(d: f64, n1: f64, n2: f64) -> (f64, f64) {
    (d * LOGIT_SCALE, var_d(d, n1, n2) * LOGIT_SCALE * LOGIT_SCALE)
}

pub fn d_from_logor(log_or: f64) -> f64 {
    log_or / LOGIT_SCALE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn excludes_zero(&self) -> bool {
        !self.contains(0.0)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `est ± z(1 − (alpha/m)/2)·se`.
pub fn confidence_interval(est: f64, se: f64, alpha: f64, m: u32) -> Result<Interval> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("alpha {alpha} outside (0, 1)")));
    }
    if m == 0 {
        return Err(Error::Invalid("family size must be at least 1".into()));
    }
    if !(se >= 0.0) {
        return Err(domain(format!("standard error {se} must be nonnegative")).into());
    }
    let half = normal_quantile(1.0 - alpha / m as f64 / 2.0) * se;
    Ok(Interval { lo: est - half, hi: est + half })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub small: f64,
    pub medium: f64,
    pub large: f64,
}

impl Thresholds {
    pub const fn new(small: f64, medium: f64, large: f64) -> Self {
        Thresholds { small, medium, large }
    }

    pub fn get(&self, level: Level) -> f64 {
        match level {
            Level::Small => self.small,
            Level::Medium => self.medium,
            Level::Large => self.large,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Small,
    Medium,
    Large,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Small, Level::Medium, Level::Large];

    pub fn as_str(&self) -> &'static str {
        match self {
            Level::Small => "small",
            Level::Medium => "medium",
            Level::Large => "large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Trivial,
    Small,
    Medium,
    Large,
}

/// Small/medium/large cut-offs per effect-size type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThresholdTable {
    pub d: Thresholds,
    pub r: Thresholds,
    pub w: Thresholds,
    pub f: Thresholds,
    pub log_or: Thresholds,
}

impl Default for ThresholdTable {
    fn default() -> Self {
        ThresholdTable {
            d: Thresholds::new(0.20, 0.50, 0.80),
            r: Thresholds::new(0.10, 0.30, 0.50),
            w: Thresholds::new(0.10, 0.30, 0.50),
            f: Thresholds::new(0.10, 0.25, 0.40),
            log_or: Thresholds::new(0.36, 0.91, 1.45),
        }
    }
}

impl ThresholdTable {
    pub fn validate(&self) -> Result<()> {
        for (name, t) in
            [("d", self.d), ("r", self.r), ("w", self.w), ("f", self.f), ("log_or", self.log_or)]
        {
            if !(0.0 < t.small && t.small < t.medium && t.medium < t.large && t.large.is_finite()) {
                return Err(Error::Invalid(format!(
                    "thresholds for {name} must satisfy 0 < small < medium < large"
                )));
            }
        }
        if self.r.large >= 1.0 {
            return Err(Error::Invalid("r thresholds must be below 1".into()));
        }
        Ok(())
    }

    /// Bucket |log OR|; a value on a boundary belongs to the larger class.
    pub fn classify(&self, log_or: f64) -> Magnitude {
        let t = &self.log_or;
        match log_or.abs() {
            x if x >= t.large => Magnitude::Large,
            x if x >= t.medium => Magnitude::Medium,
            x if x >= t.small => Magnitude::Small,
            _ => Magnitude::Trivial,
        }
    }
}

pub fn classify_magnitude(est: &EffectEstimate, thresholds: &ThresholdTable) -> Magnitude {
    thresholds.classify(est.log_or)
}

/// Statistic a standardised effect was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    #[serde(rename = "t")]
    T,
    #[serde(rename = "chi2")]
    Chi2,
    #[serde(rename = "F")]
    F,
    #[serde(rename = "r")]
    R,
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "means")]
    Means,
}

/// The conversion chain that produced d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConversionPath {
    /// Pooled-SD standardised mean difference.
    Means,
    /// t with coded group sizes.
    TGroups,
    /// t with group sizes inferred from df as an even split.
    TDf,
    /// Paired t with the coded pre/post correlation.
    TDependent,
    /// √F of a two-group F-test, then as t.
    FTwoGroup,
    /// Cohen's f of a one-way F-test with more than two groups, d = 2f.
    FOneWay,
    /// χ² with one df → φ → d.
    Phi,
    /// χ² with a larger contingency table → Cramér's V → d.
    CramersV,
    R,
    Z,
}

/// Result of converting one coded test to d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conversion {
    pub origin: Origin,
    pub path: ConversionPath,
    pub d: f64,
    pub var_d: f64,
    pub n1: f64,
    pub n2: f64,
    pub cohen_w: Option<f64>,
    pub cohen_f: Option<f64>,
    /// Whether the estimate may be pooled on the log-OR scale.
    pub poolable: bool,
}

impl Conversion {
    fn independent(origin: Origin, path: ConversionPath, d: f64, n1: f64, n2: f64) -> Self {
        Conversion {
            origin,
            path,
            d,
            var_d: var_d(d, n1, n2),
            n1,
            n2,
            cohen_w: None,
            cohen_f: None,
            poolable: true,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.d.is_finite() && self.var_d.is_finite() && self.var_d > 0.0
    }
}

fn halves(n: f64) -> (f64, f64) {
    (n / 2.0, n / 2.0)
}

fn groups_f(t: &CodedTest) -> Option<(f64, f64)> {
    t.groups().map(|(a, b)| (a as f64, b as f64))
}

fn unconvertible(t: &CodedTest, why: &str) -> Error {
    Error::Invalid(format!("test {}: {why}", t.test_id))
}

fn convert_t_like(
    test: &CodedTest,
    t: f64,
    origin: Origin,
    df: Option<f64>,
    from_f: bool,
) -> Result<Conversion> {
    let path = |p| if from_f { ConversionPath::FTwoGroup } else { p };
    if let Some((n1, n2)) = groups_f(test) {
        return Ok(Conversion::independent(origin, path(ConversionPath::TGroups), d_from_t(t, n1, n2), n1, n2));
    }
    let n = test.n_value().map(|n| n as f64).or(df.map(|df| df + 2.0));
    match n {
        Some(n) => {
            let (n1, n2) = halves(n);
            Ok(Conversion::independent(origin, path(ConversionPath::TDf), d_from_t(t, n1, n2), n1, n2))
        }
        None => Err(unconvertible(test, "no group sizes or degrees of freedom")),
    }
}

/// Convert a coded test to Cohen's d along the first applicable path.
pub fn convert(test: &CodedTest) -> Result<Conversion> {
    let r = &test.test;
    let v = r.value;
    if test.design != Design::Dependent {
        if let (Some((m1, m2, sd1, sd2)), Some((n1, n2))) = (test.means(), groups_f(test)) {
            let d = d_from_means(m1, m2, sd1, sd2, n1, n2)?;
            return Ok(Conversion::independent(Origin::Means, ConversionPath::Means, d, n1, n2));
        }
    }
    match r.statistic {
        Statistic::T if test.design == Design::Dependent => {
            let rho = test
                .correlation
                .ok_or_else(|| unconvertible(test, "dependent test without correlation"))?;
            let n = test
                .n1
                .map(|n| n as f64)
                .or(r.df1.map(|df| df + 1.0))
                .ok_or_else(|| unconvertible(test, "no sample size"))?;
            let k = 2.0 * (1.0 - rho);
            let d = v * (k / n).sqrt();
            Ok(Conversion {
                origin: Origin::T,
                path: ConversionPath::TDependent,
                d,
                var_d: (1.0 / n + d * d / (2.0 * n)) * k,
                n1: n,
                n2: n,
                cohen_w: None,
                cohen_f: None,
                poolable: true,
            })
        }
        Statistic::T => convert_t_like(test, v, Origin::T, r.df1, false),
        Statistic::Z => {
            let (n1, n2) =
                groups_f(test).ok_or_else(|| unconvertible(test, "Z without group sizes"))?;
            Ok(Conversion::independent(Origin::Z, ConversionPath::Z, d_from_t(v, n1, n2), n1, n2))
        }
        Statistic::R => {
            let d = d_from_r(v)?;
            let (n1, n2) = groups_f(test)
                .or(test.n_value().map(|n| halves(n as f64)))
                .or(r.df1.map(|df| halves(df + 2.0)))
                .ok_or_else(|| unconvertible(test, "no sample size"))?;
            Ok(Conversion::independent(Origin::R, ConversionPath::R, d, n1, n2))
        }
        Statistic::Chi2 => {
            let df = r.df1.ok_or_else(|| unconvertible(test, "chi-square without df"))?;
            let n = test.total_n().ok_or_else(|| unconvertible(test, "chi-square without N"))?;
            let w = w_from_chi2(v, n);
            let (phi, path) = if df == 1.0 {
                (w, ConversionPath::Phi)
            } else {
                let (rows, cols) = test
                    .contingency_shape
                    .ok_or_else(|| unconvertible(test, "chi-square df > 1 without contingency"))?;
                let q = rows.min(cols) as f64 - 1.0;
                (w / q.sqrt(), ConversionPath::CramersV)
            };
            let d = d_from_phi(phi)?;
            let (n1, n2) = groups_f(test).unwrap_or_else(|| halves(n));
            let mut c = Conversion::independent(Origin::Chi2, path, d, n1, n2);
            c.cohen_w = Some(w);
            Ok(c)
        }
        Statistic::F => {
            let (df1, df2) = r
                .df1
                .zip(r.df2)
                .ok_or_else(|| unconvertible(test, "F without two df"))?;
            if test.ways.is_some_and(|w| w > 1) {
                return Err(unconvertible(test, "multi-way F"));
            }
            let f = f_from_f_stat(v, df1, df2);
            if df1 == 1.0 {
                let mut c = convert_t_like(test, v.sqrt(), Origin::F, Some(df2), true)?;
                c.cohen_f = Some(f);
                return Ok(c);
            }
            let n = test.total_n().unwrap_or(df1 + df2 + 1.0);
            let (n1, n2) = groups_f(test).unwrap_or_else(|| halves(n));
            let mut c =
                Conversion::independent(Origin::F, ConversionPath::FOneWay, d_from_f(f)?, n1, n2);
            c.cohen_f = Some(f);
            c.poolable = false;
            Ok(c)
        }
    }
}

/// A retained test standardised to the log odds ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub test_id: String,
    pub paper_id: String,
    pub family_id: String,
    pub statistic: Statistic,
    pub origin: Origin,
    pub path: ConversionPath,
    pub d: f64,
    pub g: f64,
    pub log_or: f64,
    pub var_log_or: f64,
    pub se_log_or: f64,
    pub alpha: f64,
    pub ci: Interval,
    pub ci_mcc: Interval,
    pub family_size: u32,
    pub n1: f64,
    pub n2: f64,
    pub cohen_w: Option<f64>,
    pub cohen_f: Option<f64>,
    pub poolable: bool,
}

impl EffectEstimate {
    pub fn from_conversion(
        test: &CodedTest,
        c: Conversion,
        family_size: u32,
        alpha: f64,
    ) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Degenerate(format!(
                "test {}: infinite effect size or variance",
                test.test_id
            )));
        }
        let log_or = c.d * LOGIT_SCALE;
        let var_log_or = c.var_d * LOGIT_SCALE * LOGIT_SCALE;
        let se = var_log_or.sqrt();
        Ok(EffectEstimate {
            test_id: test.test_id.clone(),
            paper_id: test.paper_id.clone(),
            family_id: test.family_id.clone(),
            statistic: test.statistic(),
            origin: c.origin,
            path: c.path,
            d: c.d,
            g: hedges_g(c.d, c.n1, c.n2),
            log_or,
            var_log_or,
            se_log_or: se,
            alpha,
            ci: confidence_interval(log_or, se, alpha, 1)?,
            ci_mcc: confidence_interval(log_or, se, alpha, family_size)?,
            family_size,
            n1: c.n1,
            n2: c.n2,
            cohen_w: c.cohen_w,
            cohen_f: c.cohen_f,
            poolable: c.poolable,
        })
    }

    pub fn interval(&self, alpha: f64, m: u32) -> Result<Interval> {
        confidence_interval(self.log_or, self.se_log_or, alpha, m)
    }

    pub fn significant(&self) -> bool {
        self.ci.excludes_zero()
    }

    pub fn significant_mcc(&self) -> bool {
        self.ci_mcc.excludes_zero()
    }
}

pub fn estimate(test: &CodedTest, family_size: u32, alpha: f64) -> Result<EffectEstimate> {
    EffectEstimate::from_conversion(test, convert(test)?, family_size, alpha)
}
