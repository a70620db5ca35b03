//! Special functions underneath the distribution layer.

use statrs::function::{erf, gamma};

pub(crate) use statrs::function::gamma::ln_gamma;

const BETA_CF_EPS: f64 = 1e-15;
const BETA_CF_MAX_ITER: usize = 20_000;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub(crate) fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile, refined with one Newton step on the CDF.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    let dens = normal_pdf(x);
    if dens > 0.0 {
        // lower and upper tails handled separately to keep relative precision
        let err = if p < 0.5 {
            normal_cdf(x) - p
        } else {
            (1.0 - p) - normal_cdf(-x)
        };
        x -= err / dens;
    }
    x
}

/// `ln Gamma(z) - [(z - 1/2) ln z - z + ln sqrt(2 pi)]` for `z >= 10`.
fn stirling_correction(z: f64) -> f64 {
    let z2 = 1.0 / (z * z);
    (1.0 / 12.0
        - z2 * (1.0 / 360.0
            - z2 * (1.0 / 1260.0 - z2 * (1.0 / 1680.0 - z2 * (1.0 / 1188.0 - z2 * 691.0 / 360_360.0)))))
        / z
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln B(a, b)` without the cancellation of three large log-gammas.
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    let (p, q) = if a < b { (a, b) } else { (b, a) };
    if p >= 10.0 {
        let corr = stirling_correction(p) + stirling_correction(q) - stirling_correction(p + q);
        -0.5 * q.ln() + LN_SQRT_2PI + corr + (p - 0.5) * (p / (p + q)).ln()
            + q * (-p / (p + q)).ln_1p()
    } else if q >= 10.0 {
        let corr = stirling_correction(q) - stirling_correction(p + q);
        ln_gamma(p) + corr + p - p * (p + q).ln() + (q - 0.5) * (-p / (p + q)).ln_1p()
    } else {
        ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    }
}

/// `ln[x^a (1-x)^b / B(a, b)]`.
fn ln_beta_prefactor(a: f64, b: f64, x: f64) -> f64 {
    if a >= 10.0 && b >= 10.0 {
        // expanded about the mode, where the two log terms cancel to first order
        let delta = x * b - (1.0 - x) * a;
        let corr = stirling_correction(a + b) - stirling_correction(a) - stirling_correction(b);
        a * (delta / a).ln_1p() + b * (-delta / b).ln_1p()
            + 0.5 * (a * b / (a + b)).ln()
            - LN_SQRT_2PI
            + corr
    } else {
        a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
///
/// Continued fraction (modified Lentz) evaluated on whichever side of the
/// mean converges fastest.
pub(crate) fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_beta_prefactor(a, b, x);
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b).clamp(0.0, 1.0)
    }
}

/// Upper regularized incomplete beta `1 - I_x(a, b)` without cancellation.
pub(crate) fn beta_reg_upper(a: f64, b: f64, x: f64) -> f64 {
    beta_reg(b, a, 1.0 - x)
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = f64::MIN_POSITIVE / f64::EPSILON;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_CF_EPS {
            break;
        }
    }
    h
}

/// Lower regularized incomplete gamma `P(a, x)`.
pub(crate) fn gamma_lower_reg(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        gamma::gamma_lr(a, x)
    }
}

/// Upper regularized incomplete gamma `Q(a, x)`.
pub(crate) fn gamma_upper_reg(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        gamma::gamma_ur(a, x)
    }
}
