use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use super::special::normal_quantile;
use super::NumericError;

/// 2x2 table of counts, laid out row-major:
///
/// ```text
///   a  b
///   c  d
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Table2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Table2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Table2x2 { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// Sample odds ratio `ad / bc`; `0` or `+inf` when a cell is empty.
    pub fn sample_odds_ratio(&self) -> f64 {
        let num = (self.a * self.d) as f64;
        let den = (self.b * self.c) as f64;
        if den == 0.0 {
            if num == 0.0 {
                f64::NAN
            } else {
                f64::INFINITY
            }
        } else {
            num / den
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    /// Two-tailed p: total probability of all tables no more likely than the
    /// observed one, given the margins.
    pub p_value: f64,
    /// Conditional maximum-likelihood odds ratio.
    #[serde(with = "super::nonfinite")]
    pub conditional_mle: f64,
    /// Exact conditional 95% interval for the odds ratio.
    #[serde(with = "super::nonfinite::pair")]
    pub conditional_ci: (f64, f64),
    /// `ad / bc`.
    #[serde(with = "super::nonfinite")]
    pub sample_or: f64,
    /// 95% interval on the log scale (Woolf). With an empty cell the sample
    /// OR is 0 or infinite and the interval becomes one-sided, its finite end
    /// taken from the exact conditional one-sided 95% bound.
    #[serde(with = "super::nonfinite::pair")]
    pub sample_ci: (f64, f64),
}

/// Hypergeometric distribution of the top-left cell given the margins.
struct Conditional {
    lo: u64,
    support_ln_p: Vec<f64>,
}

impl Conditional {
    fn new(t: &Table2x2) -> Self {
        let r1 = t.a + t.b;
        let r2 = t.c + t.d;
        let c1 = t.a + t.c;
        let n = t.total();
        let lo = c1.saturating_sub(r2);
        let hi = r1.min(c1);
        let norm = ln_binomial(n, c1);
        let support_ln_p = (lo..=hi)
            .map(|x| ln_binomial(r1, x) + ln_binomial(r2, c1 - x) - norm)
            .collect();
        Conditional { lo, support_ln_p }
    }

    fn hi(&self) -> u64 {
        self.lo + self.support_ln_p.len() as u64 - 1
    }

    /// Probabilities under odds ratio `exp(ln_psi)`.
    fn weights(&self, ln_psi: f64) -> Vec<f64> {
        let logs: Vec<f64> = self
            .support_ln_p
            .iter()
            .enumerate()
            .map(|(i, &l)| l + ln_psi * (self.lo + i as u64) as f64)
            .collect();
        let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    }

    fn mean(&self, ln_psi: f64) -> f64 {
        self.weights(ln_psi)
            .iter()
            .enumerate()
            .map(|(i, &p)| p * (self.lo + i as u64) as f64)
            .sum()
    }

    fn lower_tail(&self, x: u64, ln_psi: f64) -> f64 {
        let k = (x - self.lo) as usize;
        self.weights(ln_psi)[..=k].iter().sum()
    }

    fn upper_tail(&self, x: u64, ln_psi: f64) -> f64 {
        let k = (x - self.lo) as usize;
        self.weights(ln_psi)[k..].iter().sum()
    }
}

/// Root of an increasing function of `ln psi` by bisection.
fn solve_increasing(target: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (-60.0f64, 60.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Fisher's exact test for a 2x2 table.
pub fn fisher_exact_2x2(table: Table2x2) -> Result<FisherResult, NumericError> {
    let t = table;
    if t.a + t.b == 0 || t.c + t.d == 0 {
        return Err(NumericError::DegenerateTable("empty row"));
    }
    if t.a + t.c == 0 || t.b + t.d == 0 {
        return Err(NumericError::DegenerateTable("empty column"));
    }
    let cond = Conditional::new(&t);
    let x = t.a;
    let (lo, hi) = (cond.lo, cond.hi());

    // relative slack for ties in floating point, as in R's fisher.test
    let observed = cond.support_ln_p[(x - lo) as usize];
    let cut = observed + (1e-7f64).ln_1p();
    let p_value: f64 = cond
        .support_ln_p
        .iter()
        .filter(|&&l| l <= cut)
        .map(|l| l.exp())
        .sum::<f64>()
        .min(1.0);

    let conditional_mle = if x == lo {
        0.0
    } else if x == hi {
        f64::INFINITY
    } else {
        solve_increasing(x as f64, |l| cond.mean(l))
    };

    let upper_bound = |alpha: f64| {
        if x == hi {
            f64::INFINITY
        } else {
            // P(X <= x) decreases in psi
            solve_increasing(-alpha, |l| -cond.lower_tail(x, l))
        }
    };
    let lower_bound = |alpha: f64| {
        if x == lo {
            0.0
        } else {
            solve_increasing(alpha, |l| cond.upper_tail(x, l))
        }
    };
    let conditional_ci = (lower_bound(0.025), upper_bound(0.025));

    let sample_or = t.sample_odds_ratio();
    let sample_ci = if sample_or == 0.0 {
        (0.0, upper_bound(0.05))
    } else if sample_or.is_infinite() {
        (lower_bound(0.05), f64::INFINITY)
    } else {
        let se = (1.0 / t.a as f64 + 1.0 / t.b as f64 + 1.0 / t.c as f64 + 1.0 / t.d as f64)
            .sqrt();
        let z = normal_quantile(0.975);
        let l = sample_or.ln();
        ((l - z * se).exp(), (l + z * se).exp())
    };

    Ok(FisherResult { p_value, conditional_mle, conditional_ci, sample_or, sample_ci })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binom(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    }

    /// Exact integer enumeration of every table with the observed margins.
    fn enumerated_p(t: Table2x2) -> f64 {
        let (r1, r2, c1) = (t.a + t.b, t.c + t.d, t.a + t.c);
        let weight = |x: u64| binom(r1, x) * binom(r2, c1 - x);
        let obs = weight(t.a);
        let lo = c1.saturating_sub(r2);
        let hi = r1.min(c1);
        let tail: u128 = (lo..=hi).map(weight).filter(|&w| w <= obs).sum();
        tail as f64 / binom(t.total(), c1) as f64
    }

    #[test]
    fn no_association() {
        let r = fisher_exact_2x2(Table2x2::new(5, 5, 5, 5)).unwrap();
        assert_eq!(r.sample_or, 1.0);
        assert!((r.conditional_mle - 1.0).abs() < 1e-9);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_separation_by_enumeration() {
        let t = Table2x2::new(10, 0, 0, 10);
        let r = fisher_exact_2x2(t).unwrap();
        // only the two extreme tables of the 11 are as unlikely as observed
        let want = 2.0 / binom(20, 10) as f64;
        assert!((enumerated_p(t) - want).abs() < 1e-18);
        assert!((r.p_value - want).abs() < 1e-15);
        assert!(r.sample_or.is_infinite());
        assert!(r.conditional_mle.is_infinite());
        assert!(r.sample_ci.1.is_infinite() && r.sample_ci.0 > 1.0);
    }

    #[test]
    fn mcc_contingency_table() {
        let r = fisher_exact_2x2(Table2x2::new(165, 266, 232, 199)).unwrap();
        assert!((r.sample_or - 0.532).abs() < 1e-3);
        assert!(r.p_value < 1e-3);
        assert!(r.sample_ci.0 < r.sample_or && r.sample_or < r.sample_ci.1);
    }

    #[test]
    fn matches_reference_implementation() {
        // scipy.stats.fisher_exact / scipy.stats.contingency.odds_ratio
        let r = fisher_exact_2x2(Table2x2::new(3, 1, 1, 3)).unwrap();
        assert!((r.p_value - 0.485_714_285_714_285_65).abs() < 1e-12);
        assert!((r.conditional_mle - 6.408_32).abs() < 1e-3);
        assert!((r.conditional_ci.0 - 0.211_735_6).abs() < 1e-4);
        // the upper root is flat; reference implementations disagree in the 3rd digit
        assert!((r.conditional_ci.1 / 626.243_530_6 - 1.0).abs() < 1e-2);

        let r = fisher_exact_2x2(Table2x2::new(165, 266, 232, 199)).unwrap();
        assert!((r.conditional_mle - 0.532_464_304_5).abs() < 1e-6);
        assert!((r.conditional_ci.0 - 0.401_878_848_9).abs() < 1e-5);
        assert!((r.conditional_ci.1 - 0.704_318_282_1).abs() < 1e-5);
        assert!((r.sample_ci.0 - 0.405_656_362_2).abs() < 1e-6);
        assert!((r.sample_ci.1 - 0.697_873_177_1).abs() < 1e-6);
    }

    #[test]
    fn zero_cell_gives_zero_or_with_one_sided_interval() {
        let r = fisher_exact_2x2(Table2x2::new(0, 7, 5, 3)).unwrap();
        assert_eq!(r.sample_or, 0.0);
        assert_eq!(r.conditional_mle, 0.0);
        assert_eq!(r.sample_ci.0, 0.0);
        assert!((r.sample_ci.1 - 0.629_215_433_6).abs() < 1e-5);
    }

    #[test]
    fn zero_margin_is_degenerate() {
        assert!(fisher_exact_2x2(Table2x2::new(0, 0, 3, 4)).is_err());
        assert!(fisher_exact_2x2(Table2x2::new(0, 3, 0, 4)).is_err());
    }

    proptest! {
        #[test]
        fn p_equals_full_enumeration(a in 0u64..=10, b in 0u64..=10, c in 0u64..=10, d in 0u64..=10) {
            let t = Table2x2::new(a, b, c, d);
            prop_assume!(a + b > 0 && c + d > 0 && a + c > 0 && b + d > 0);
            let r = fisher_exact_2x2(t).unwrap();
            prop_assert!((r.p_value - enumerated_p(t).min(1.0)).abs() < 1e-12);
        }
    }
}
