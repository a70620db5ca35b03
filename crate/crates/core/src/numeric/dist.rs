use serde::{Deserialize, Serialize};

use super::noncentral;
use super::special::{
    beta_reg, beta_reg_upper, gamma_lower_reg, gamma_upper_reg, ln_beta, ln_gamma, normal_cdf,
    normal_pdf, normal_quantile,
};
use super::{domain, NumericError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Normal,
    T,
    Chi2,
    F,
}

/// A (possibly noncentral) normal, t, chi-square or F distribution.
///
/// `ncp` is the mean shift for the normal family, delta for t and lambda for
/// chi-square and F. Zero denotes the central distribution. Negative shifts
/// are accepted for the two symmetric families only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistSpec {
    pub family: Family,
    pub df1: Option<f64>,
    pub df2: Option<f64>,
    pub ncp: f64,
}

impl DistSpec {
    pub fn normal() -> Self {
        Self::shifted_normal(0.0)
    }

    /// Unit-variance normal centred at `mean`.
    pub fn shifted_normal(mean: f64) -> Self {
        DistSpec { family: Family::Normal, df1: None, df2: None, ncp: mean }
    }

    pub fn t(df: f64) -> Self {
        Self::noncentral_t(df, 0.0)
    }

    pub fn noncentral_t(df: f64, delta: f64) -> Self {
        DistSpec { family: Family::T, df1: Some(df), df2: None, ncp: delta }
    }

    pub fn chi2(df: f64) -> Self {
        Self::noncentral_chi2(df, 0.0)
    }

    pub fn noncentral_chi2(df: f64, lambda: f64) -> Self {
        DistSpec { family: Family::Chi2, df1: Some(df), df2: None, ncp: lambda }
    }

    pub fn f(df1: f64, df2: f64) -> Self {
        Self::noncentral_f(df1, df2, 0.0)
    }

    pub fn noncentral_f(df1: f64, df2: f64, lambda: f64) -> Self {
        DistSpec { family: Family::F, df1: Some(df1), df2: Some(df2), ncp: lambda }
    }

    pub fn is_central(&self) -> bool {
        self.ncp == 0.0
    }

    pub fn validate(&self) -> Result<(), NumericError> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(v) if v > 0.0 && !v.is_nan() => Ok(v),
            Some(v) => Err(domain(format!("{name} must be positive, got {v}"))),
            None => Err(domain(format!("{name} is required for {:?}", self.family))),
        };
        if !self.ncp.is_finite() {
            return Err(domain(format!("noncentrality must be finite, got {}", self.ncp)));
        }
        match self.family {
            Family::Normal => {}
            Family::T => {
                positive("df", self.df1)?;
            }
            Family::Chi2 => {
                positive("df", self.df1)?;
            }
            Family::F => {
                positive("df1", self.df1)?;
                positive("df2", self.df2)?;
            }
        }
        if matches!(self.family, Family::Chi2 | Family::F) && self.ncp < 0.0 {
            return Err(domain(format!("noncentrality must be >= 0, got {}", self.ncp)));
        }
        Ok(())
    }

    fn df(&self) -> f64 {
        self.df1.unwrap_or(f64::INFINITY)
    }

    fn dfs(&self) -> (f64, f64) {
        (self.df1.unwrap_or(f64::NAN), self.df2.unwrap_or(f64::NAN))
    }

    /// `P[X <= x]`.
    pub fn cdf(&self, x: f64) -> Result<f64, NumericError> {
        self.validate()?;
        if x.is_nan() {
            return Err(domain("x is NaN"));
        }
        Ok(self.cdf_unchecked(x))
    }

    /// `P[X > x]`, computed without the `1 - cdf` cancellation where the
    /// family allows it.
    pub fn sf(&self, x: f64) -> Result<f64, NumericError> {
        self.validate()?;
        if x.is_nan() {
            return Err(domain("x is NaN"));
        }
        Ok(self.sf_unchecked(x))
    }

    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        match self.family {
            Family::Normal => normal_cdf(x - self.ncp),
            Family::T if self.is_central() => central_t_cdf(x, self.df()),
            Family::T => noncentral::t_cdf(x, self.df(), self.ncp),
            Family::Chi2 if self.is_central() => central_chi2_cdf(x, self.df()),
            Family::Chi2 => noncentral::chi2_cdf(x, self.df(), self.ncp),
            Family::F if self.is_central() => {
                let (d1, d2) = self.dfs();
                central_f_cdf(x, d1, d2)
            }
            Family::F => {
                let (d1, d2) = self.dfs();
                noncentral::f_cdf(x, d1, d2, self.ncp)
            }
        }
    }

    pub(crate) fn sf_unchecked(&self, x: f64) -> f64 {
        match self.family {
            Family::Normal => normal_cdf(self.ncp - x),
            Family::T if self.is_central() => central_t_cdf(-x, self.df()),
            Family::Chi2 if self.is_central() => {
                if x <= 0.0 {
                    1.0
                } else {
                    gamma_upper_reg(0.5 * self.df(), 0.5 * x)
                }
            }
            Family::F if self.is_central() => {
                let (d1, d2) = self.dfs();
                if x <= 0.0 {
                    1.0
                } else if x.is_infinite() {
                    0.0
                } else {
                    beta_reg_upper(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))
                }
            }
            _ => (1.0 - self.cdf_unchecked(x)).clamp(0.0, 1.0),
        }
    }

    /// Density, for the central families only.
    pub(crate) fn central_pdf(&self, x: f64) -> Option<f64> {
        if !self.is_central() && self.family != Family::Normal {
            return None;
        }
        Some(match self.family {
            Family::Normal => normal_pdf(x - self.ncp),
            Family::T => {
                let v = self.df();
                (ln_gamma(0.5 * (v + 1.0))
                    - ln_gamma(0.5 * v)
                    - 0.5 * (v * std::f64::consts::PI).ln()
                    - 0.5 * (v + 1.0) * (x * x / v).ln_1p())
                .exp()
            }
            Family::Chi2 => {
                if x <= 0.0 {
                    return Some(0.0);
                }
                let k = 0.5 * self.df();
                ((k - 1.0) * x.ln() - 0.5 * x - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
            }
            Family::F => {
                if x <= 0.0 {
                    return Some(0.0);
                }
                let (d1, d2) = self.dfs();
                (0.5 * d1 * (d1 / d2).ln() + (0.5 * d1 - 1.0) * x.ln()
                    - 0.5 * (d1 + d2) * (d1 * x / d2).ln_1p()
                    - ln_beta(0.5 * d1, 0.5 * d2))
                    .exp()
            }
        })
    }

    fn support_lower(&self) -> f64 {
        match self.family {
            Family::Normal | Family::T => f64::NEG_INFINITY,
            Family::Chi2 | Family::F => 0.0,
        }
    }

    /// Inverse CDF.
    ///
    /// Central families use a bracketed Newton iteration on the density;
    /// noncentral families fall back to plain bisection, which needs only the
    /// CDF to be monotone.
    pub fn quantile(&self, p: f64) -> Result<f64, NumericError> {
        self.validate()?;
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!("probability must lie in (0, 1), got {p}")));
        }
        if self.family == Family::Normal {
            return Ok(self.ncp + normal_quantile(p));
        }
        if self.family == Family::T && self.is_central() && p == 0.5 {
            return Ok(0.0);
        }
        let (lo, hi) = self.bracket(p);
        Ok(self.solve(p, lo, hi))
    }

    fn bracket(&self, p: f64) -> (f64, f64) {
        let start = match self.family {
            Family::T => self.ncp,
            Family::Chi2 => self.df() + self.ncp,
            Family::F => 1.0,
            Family::Normal => unreachable!(),
        };
        let mut step = 1.0f64.max(start.abs());
        let floor = self.support_lower();
        let mut lo = start;
        let mut hi = start;
        while self.cdf_unchecked(hi) < p {
            lo = hi;
            hi += step;
            step *= 2.0;
        }
        if lo == hi {
            let mut step = 1.0f64.max(start.abs());
            loop {
                let cand = if floor.is_finite() {
                    floor + (lo - floor) * 0.5
                } else {
                    lo - step
                };
                step *= 2.0;
                if floor.is_finite() && cand - floor < 1e-300 {
                    lo = floor;
                    break;
                }
                lo = cand;
                if self.cdf_unchecked(lo) <= p {
                    break;
                }
            }
        }
        (lo, hi)
    }

    fn solve(&self, p: f64, mut lo: f64, mut hi: f64) -> f64 {
        let central = self.is_central();
        let upper = p > 0.5;
        // residual evaluated on the tail that keeps relative precision
        let resid = |x: f64| {
            if upper {
                (1.0 - p) - self.sf_unchecked(x)
            } else {
                self.cdf_unchecked(x) - p
            }
        };
        let mut x = 0.5 * (lo + hi);
        for _ in 0..400 {
            let r = resid(x);
            if r == 0.0 {
                return x;
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = f64::NAN;
            if central {
                if let Some(d) = self.central_pdf(x) {
                    if d > 0.0 {
                        next = x - r / d;
                    }
                }
            }
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let tol = 1e-15 * (1.0f64).max(next.abs());
            if (next - x).abs() <= tol || hi - lo <= tol {
                return next;
            }
            x = next;
        }
        x
    }
}

pub(crate) fn central_t_cdf(x: f64, df: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    if df.is_infinite() {
        return normal_cdf(x);
    }
    let tail = 0.5 * beta_reg(0.5 * df, 0.5, df / (df + x * x));
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

pub(crate) fn central_chi2_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lower_reg(0.5 * df, 0.5 * x)
    }
}

pub(crate) fn central_f_cdf(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        beta_reg(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_t_is_symmetric_at_zero() {
        assert_eq!(DistSpec::t(10.0).cdf(0.0).unwrap(), 0.5);
        assert_eq!(DistSpec::t(10.0).quantile(0.5).unwrap(), 0.0);
    }

    #[test]
    fn chi2_one_df_critical_value() {
        let d = DistSpec::chi2(1.0);
        assert!((d.cdf(3.8415).unwrap() - 0.95).abs() < 1e-4);
        assert!((d.quantile(0.95).unwrap() - 3.8415).abs() < 1e-3);
        assert!((d.quantile(0.95).unwrap() - 3.841_458_820_694_124).abs() < 1e-9);
    }

    #[test]
    fn normal_quantile_975() {
        assert!((DistSpec::normal().quantile(0.975).unwrap() - 1.959964).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DistSpec::t(0.0).cdf(1.0).is_err());
        assert!(DistSpec::f(1.0, -2.0).cdf(1.0).is_err());
        assert!(DistSpec::noncentral_chi2(2.0, -1.0).cdf(1.0).is_err());
        assert!(DistSpec::normal().quantile(0.0).is_err());
        assert!(DistSpec::normal().quantile(1.0).is_err());
        assert!(DistSpec { family: Family::F, df1: Some(2.0), df2: None, ncp: 0.0 }
            .cdf(1.0)
            .is_err());
    }

    #[test]
    fn support_boundaries() {
        for dist in [DistSpec::chi2(3.0), DistSpec::f(2.0, 7.0), DistSpec::noncentral_chi2(3.0, 4.0)] {
            assert_eq!(dist.cdf(0.0).unwrap(), 0.0);
            assert_eq!(dist.cdf(-1.0).unwrap(), 0.0);
            assert!((dist.cdf(f64::INFINITY).unwrap() - 1.0).abs() < 1e-9);
        }
        for dist in [DistSpec::t(4.0), DistSpec::noncentral_t(4.0, 1.5), DistSpec::normal()] {
            assert!(dist.cdf(f64::NEG_INFINITY).unwrap().abs() < 1e-9);
            assert!((dist.cdf(f64::INFINITY).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sf_complements_cdf() {
        let specs = [
            DistSpec::t(7.0),
            DistSpec::chi2(4.0),
            DistSpec::f(3.0, 12.0),
            DistSpec::noncentral_t(12.0, 1.1),
        ];
        for s in specs {
            for &x in &[0.3, 1.0, 2.5] {
                let sum = s.cdf(x).unwrap() + s.sf(x).unwrap();
                assert!((sum - 1.0).abs() < 1e-13, "{s:?} at {x}");
            }
        }
    }
}
