use serde::{Deserialize, Serialize};

use super::{domain, NumericError};

/// Straight-line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_se: f64,
    pub slope_se: f64,
    /// Covariance of the intercept and slope estimates.
    pub coef_cov: f64,
    pub residual_scale: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n: usize,
}

impl RobustFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }

    /// Standard error of the fitted mean at `x`.
    pub fn predict_se(&self, x: f64) -> f64 {
        let v = self.intercept_se.powi(2) + x * x * self.slope_se.powi(2) + 2.0 * x * self.coef_cov;
        v.max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuberOptions {
    /// Huber's k, in units of the residual scale.
    pub tuning: f64,
    /// Convergence threshold on the largest coefficient change.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for HuberOptions {
    fn default() -> Self {
        HuberOptions { tuning: 1.345, tol: 1e-8, max_iter: 50 }
    }
}

fn check_inputs(x: &[f64], y: &[f64]) -> Result<(), NumericError> {
    if x.len() != y.len() {
        return Err(domain(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(NumericError::InsufficientData { needed: 3, got: x.len() });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(domain("non-finite value in regression input"));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(NumericError::ConstantRegressor);
    }
    Ok(())
}

/// Weighted least squares for one regressor. `None` when the weighted
/// regressor has no spread.
fn wls(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return None;
    }
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        let dx = x[i] - mx;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// `(X'X)^-1` for the design `[1, x]`, as (v00, v11, v01).
fn xtx_inverse(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let det = n * sxx - sx * sx;
    (sxx / det, n / det, -sx / det)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// MAD of residuals about zero, rescaled to be consistent at the normal.
fn mad_scale(resid: &[f64]) -> f64 {
    let mut abs: Vec<f64> = resid.iter().map(|r| r.abs()).collect();
    median(&mut abs) / 0.6745
}

fn residuals(x: &[f64], y: &[f64], a: f64, b: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| yi - (a + b * xi)).collect()
}

fn huber_weight(r: f64, k_scale: f64) -> f64 {
    let ar = r.abs();
    if ar <= k_scale {
        1.0
    } else {
        k_scale / ar
    }
}

/// Ordinary least squares with the classical standard errors.
pub fn ols(x: &[f64], y: &[f64]) -> Result<RobustFit, NumericError> {
    check_inputs(x, y)?;
    let ones = vec![1.0; x.len()];
    let (a, b) = wls(x, y, &ones).ok_or(NumericError::ConstantRegressor)?;
    let r = residuals(x, y, a, b);
    let dof = (x.len() - 2) as f64;
    let sigma2 = r.iter().map(|v| v * v).sum::<f64>() / dof;
    let (v00, v11, v01) = xtx_inverse(x);
    Ok(RobustFit {
        intercept: a,
        slope: b,
        intercept_se: (sigma2 * v00).sqrt(),
        slope_se: (sigma2 * v11).sqrt(),
        coef_cov: sigma2 * v01,
        residual_scale: sigma2.sqrt(),
        iterations: 0,
        converged: true,
        n: x.len(),
    })
}

/// Huber M-estimation of a straight line by iteratively reweighted least
/// squares, started from OLS.
///
/// Each iteration re-estimates the scale as MAD(residuals)/0.6745, sets
/// weights `min(1, k*s/|r|)` and refits. Convergence is declared when no
/// coefficient moves by `tol` or more. Hitting `max_iter` is not an error:
/// the last fit comes back with `converged == false`.
///
/// Standard errors use the `XtX` sandwich approximation with Huber's
/// small-sample correction factor.
pub fn huber_iwls(x: &[f64], y: &[f64], opts: HuberOptions) -> Result<RobustFit, NumericError> {
    check_inputs(x, y)?;
    if !(opts.tuning > 0.0) {
        return Err(domain(format!("tuning constant must be positive, got {}", opts.tuning)));
    }
    let n = x.len();
    let ones = vec![1.0; n];
    let (mut a, mut b) = wls(x, y, &ones).ok_or(NumericError::ConstantRegressor)?;
    let mut converged = false;
    let mut iterations = 0;
    let mut w = ones;

    for iter in 1..=opts.max_iter {
        iterations = iter;
        let r = residuals(x, y, a, b);
        let s = mad_scale(&r);
        let ks = opts.tuning * s;
        for (wi, ri) in w.iter_mut().zip(&r) {
            *wi = if s == 0.0 {
                if *ri == 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                huber_weight(*ri, ks)
            };
        }
        let Some((na, nb)) = wls(x, y, &w) else {
            break;
        };
        let change = (na - a).abs().max((nb - b).abs());
        a = na;
        b = nb;
        if change < opts.tol {
            converged = true;
            break;
        }
    }

    let r = residuals(x, y, a, b);
    let s = mad_scale(&r);
    let (intercept_se, slope_se, coef_cov) = if s > 0.0 {
        let k = opts.tuning;
        let nf = n as f64;
        let p = 2.0;
        let psi_prime: Vec<f64> =
            r.iter().map(|ri| if (ri / s).abs() <= k { 1.0 } else { 0.0 }).collect();
        let mn = psi_prime.iter().sum::<f64>() / nf;
        let var_pp = psi_prime.iter().map(|v| (v - mn).powi(2)).sum::<f64>() / (nf - 1.0);
        let kappa = 1.0 + p * var_pp / (nf * mn * mn);
        let ssq: f64 = r.iter().map(|ri| (ri * huber_weight(*ri, k * s)).powi(2)).sum();
        let stddev = (ssq / (nf - p)).sqrt() * kappa / mn;
        let (v00, v11, v01) = xtx_inverse(x);
        let s2 = stddev * stddev;
        ((s2 * v00).sqrt(), (s2 * v11).sqrt(), s2 * v01)
    } else {
        (0.0, 0.0, 0.0)
    };

    Ok(RobustFit {
        intercept: a,
        slope: b,
        intercept_se,
        slope_se,
        coef_cov,
        residual_scale: s,
        iterations,
        converged,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line_is_recovered() {
        for n in 3..12 {
            let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.7 - 1.0).collect();
            let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
            let fit = huber_iwls(&x, &y, HuberOptions::default()).unwrap();
            assert!((fit.intercept - 1.0).abs() < 1e-12);
            assert!((fit.slope - 2.0).abs() < 1e-12);
            assert!(fit.residual_scale < 1e-12);
            assert!(fit.converged);
        }
    }

    #[test]
    fn gross_outlier_is_downweighted() {
        // clean data with deterministic noise, then one wild point
        let noise = [0.3, -0.2, 0.1, -0.4, 0.25, -0.1, 0.05, 0.35, -0.3, 0.15, -0.05, 0.2];
        let x: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let y_clean: Vec<f64> = x.iter().zip(noise).map(|(v, e)| 0.5 + 1.5 * v + e).collect();
        let clean = ols(&x, &y_clean).unwrap();
        let mut y = y_clean.clone();
        y[9] += 40.0;
        let dirty_ols = ols(&x, &y).unwrap();
        let fit = huber_iwls(&x, &y, HuberOptions::default()).unwrap();
        assert!(fit.converged);
        assert!((fit.slope - clean.slope).abs() < 3.0 * clean.slope_se);
        assert!((dirty_ols.slope - clean.slope).abs() > (fit.slope - clean.slope).abs());
    }

    #[test]
    fn symmetric_design_gives_zero_slope() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0, -2.0, -1.0, 0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 0.5, 3.0, 1.0, 2.0, -1.0, 4.0, -1.0, 2.0];
        let opts = HuberOptions::default();
        let fit = huber_iwls(&x, &y, opts).unwrap();
        assert!(fit.slope.abs() <= opts.tol);
    }

    #[test]
    fn non_convergence_is_reported_not_raised() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.0, 1.0, 2.0, 30.0, 4.0, -9.0];
        let fit = huber_iwls(&x, &y, HuberOptions { max_iter: 1, ..Default::default() }).unwrap();
        assert_eq!(fit.iterations, 1);
        assert!(!fit.converged);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let opts = HuberOptions::default();
        assert!(matches!(
            huber_iwls(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], opts),
            Err(NumericError::ConstantRegressor)
        ));
        assert!(huber_iwls(&[1.0, 2.0], &[1.0, 2.0], opts).is_err());
    }

    proptest! {
        #[test]
        fn infinite_tuning_is_ols(
            pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..30)
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            prop_assume!(x.iter().any(|&v| (v - x[0]).abs() > 1e-3));
            let o = ols(&x, &y).unwrap();
            let h = huber_iwls(&x, &y, HuberOptions { tuning: 1e12, ..Default::default() }).unwrap();
            prop_assert!((o.intercept - h.intercept).abs() < 1e-6);
            prop_assert!((o.slope - h.slope).abs() < 1e-6);
        }
    }
}
