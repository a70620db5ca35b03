use serde::{Deserialize, Serialize};

use super::special::normal_cdf;
use super::{domain, NumericError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KendallResult {
    pub tau: f64,
    /// Two-tailed p from the normal approximation with tie-adjusted variance.
    pub p_value: f64,
    pub z: f64,
    /// Concordant minus discordant pairs.
    pub s: f64,
    pub n: usize,
}

/// Kendall's tau-b with tie correction, O(n log n) (Knight's algorithm).
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<KendallResult, NumericError> {
    if x.len() != y.len() {
        return Err(domain(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(NumericError::InsufficientData { needed: 2, got: n });
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(domain("NaN in input"));
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let x_ties = tie_groups(idx.iter().map(|&i| x[i]));
    let joint_pairs: f64 = {
        let mut total = 0.0;
        let mut run = 1usize;
        for w in idx.windows(2) {
            if x[w[0]] == x[w[1]] && y[w[0]] == y[w[1]] {
                run += 1;
            } else {
                total += pairs(run);
                run = 1;
            }
        }
        total + pairs(run)
    };

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf) as f64;
    let y_ties = tie_groups(ys.iter().copied());

    let n0 = pairs(n);
    let n1: f64 = x_ties.iter().map(|&t| pairs(t)).sum();
    let n2: f64 = y_ties.iter().map(|&t| pairs(t)).sum();
    if n1 == n0 {
        return Err(NumericError::UndefinedCorrelation("all x values tied"));
    }
    if n2 == n0 {
        return Err(NumericError::UndefinedCorrelation("all y values tied"));
    }

    let s = n0 - n1 - n2 + joint_pairs - 2.0 * swaps;
    let tau = (s / ((n0 - n1) * (n0 - n2)).sqrt()).clamp(-1.0, 1.0);

    let var = tie_adjusted_variance(n, &x_ties, &y_ties);
    let z = if var > 0.0 { s / var.sqrt() } else { 0.0 };
    let p_value = (2.0 * normal_cdf(-z.abs())).min(1.0);
    Ok(KendallResult { tau, p_value, z, s, n })
}

fn pairs(t: usize) -> f64 {
    let t = t as f64;
    t * (t - 1.0) / 2.0
}

/// Sizes of runs of equal values in an already sorted sequence.
fn tie_groups(sorted: impl Iterator<Item = f64>) -> Vec<usize> {
    let mut groups = Vec::new();
    let mut prev: Option<f64> = None;
    let mut run = 0usize;
    for v in sorted {
        if prev == Some(v) {
            run += 1;
        } else {
            if run > 1 {
                groups.push(run);
            }
            run = 1;
            prev = Some(v);
        }
    }
    if run > 1 {
        groups.push(run);
    }
    groups
}

/// Variance of S under independence with ties in both rankings.
fn tie_adjusted_variance(n: usize, x_ties: &[usize], y_ties: &[usize]) -> f64 {
    let nf = n as f64;
    let sum = |ties: &[usize], f: fn(f64) -> f64| ties.iter().map(|&t| f(t as f64)).sum::<f64>();
    let v0 = nf * (nf - 1.0) * (2.0 * nf + 5.0);
    let vt = sum(x_ties, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let vu = sum(y_ties, |t| t * (t - 1.0) * (2.0 * t + 5.0));
    let t1 = sum(x_ties, |t| t * (t - 1.0));
    let u1 = sum(y_ties, |t| t * (t - 1.0));
    let t2 = sum(x_ties, |t| t * (t - 1.0) * (t - 2.0));
    let u2 = sum(y_ties, |t| t * (t - 1.0) * (t - 2.0));
    let mut var = (v0 - vt - vu) / 18.0 + t1 * u1 / (2.0 * nf * (nf - 1.0));
    if n > 2 {
        var += t2 * u2 / (9.0 * nf * (nf - 1.0) * (nf - 2.0));
    }
    var
}

/// Stable merge sort counting strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// O(n^2) pair enumeration.
    fn brute_force(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut c, mut d, mut tx, mut ty) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..n {
            for j in i + 1..n {
                let a = (x[i] - x[j]).signum() * (x[i] != x[j]) as i32 as f64;
                let b = (y[i] - y[j]).signum() * (y[i] != y[j]) as i32 as f64;
                if a == 0.0 && b == 0.0 {
                    continue;
                } else if a == 0.0 {
                    tx += 1.0;
                } else if b == 0.0 {
                    ty += 1.0;
                } else if a * b > 0.0 {
                    c += 1.0;
                } else {
                    d += 1.0;
                }
            }
        }
        (c - d) / ((c + d + tx) * (c + d + ty)).sqrt()
    }

    #[test]
    fn perfect_concordance_and_discordance() {
        let r = kendall_tau_b(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.tau, 1.0);
        let r = kendall_tau_b(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(r.tau, -1.0);
    }

    #[test]
    fn five_point_example_matches_pair_count() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 1.0, 4.0, 3.0, 5.0];
        let want = brute_force(&x, &y);
        assert!((want - 0.6).abs() < 1e-15);
        assert!((kendall_tau_b(&x, &y).unwrap().tau - want).abs() < 1e-15);
    }

    #[test]
    fn all_ties_are_rejected() {
        let e = kendall_tau_b(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(e, NumericError::UndefinedCorrelation(_)));
        let e = kendall_tau_b(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]).unwrap_err();
        assert!(matches!(e, NumericError::UndefinedCorrelation(_)));
        assert!(kendall_tau_b(&[1.0], &[1.0]).is_err());
        assert!(kendall_tau_b(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn p_value_matches_reference() {
        // scipy.stats.kendalltau(x, y, method='asymptotic')
        let x = [1.0, 2.0, 2.0, 3.0, 4.0, 5.0, 5.0, 6.0];
        let y = [1.0, 3.0, 2.0, 2.0, 5.0, 4.0, 6.0, 6.0];
        let r = kendall_tau_b(&x, &y).unwrap();
        assert!((r.tau - 0.769_230_769_230_769_4).abs() < 1e-12, "{}", r.tau);
        assert!((r.p_value - 0.010_747_577_580_460_075).abs() < 1e-9, "{}", r.p_value);
    }

    proptest! {
        #[test]
        fn agrees_with_pair_enumeration(
            data in (2usize..=8).prop_flat_map(|n| (
                prop::collection::vec(0i32..4, n),
                prop::collection::vec(0i32..4, n),
            ))
        ) {
            let x: Vec<f64> = data.0.iter().map(|&v| v as f64).collect();
            let y: Vec<f64> = data.1.iter().map(|&v| v as f64).collect();
            match kendall_tau_b(&x, &y) {
                Ok(r) => prop_assert!((r.tau - brute_force(&x, &y)).abs() < 1e-12),
                Err(_) => prop_assert!(
                    x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0])
                ),
            }
        }
    }
}
