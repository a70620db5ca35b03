use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Descriptives {
    pub n: usize,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub iqr: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Linear-interpolation quantile of sorted data (R type 7).
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Five-number summary plus mean and sample SD.
pub fn descriptives(values: &[f64]) -> Result<Descriptives> {
    if values.is_empty() {
        return Err(Error::InsufficientData("descriptives of an empty sequence".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Invalid("descriptives of NaN".into()));
    }
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    let mean = s.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (q25, q75) = (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.75));
    Ok(Descriptives {
        n,
        min: s[0],
        q25,
        median: quantile_sorted(&s, 0.5),
        q75,
        max: s[n - 1],
        iqr: q75 - q25,
        mean,
        sd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_cases() {
        let d = descriptives(&[5.0, 1.0, 4.0, 2.0, 3.0]).unwrap();
        assert_eq!((d.min, d.q25, d.median, d.q75, d.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        assert_eq!(d.mean, 3.0);
        assert!((d.sd - 2.5f64.sqrt()).abs() < 1e-15);
        let c = descriptives(&[7.0; 6]).unwrap();
        assert_eq!((c.iqr, c.sd), (0.0, 0.0));
        assert!(descriptives(&[]).is_err());
    }

    // numpy.percentile([1, 2, 4, 8], [25, 50, 75]) with the default method.
    #[test]
    fn type7_reference() {
        let d = descriptives(&[8.0, 1.0, 4.0, 2.0]).unwrap();
        assert_eq!((d.q25, d.median, d.q75), (1.75, 3.0, 5.0));
    }

    proptest! {
        #[test]
        fn agrees_with_sort_oracle(v in proptest::collection::vec(-1e3f64..1e3, 2..60)) {
            let mut s = v.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let n = s.len();
            // At p = j/(n-1) the type-7 quantile is the j-th order statistic,
            // and halfway between two such points it is their midpoint.
            for j in 0..n {
                let p = j as f64 / (n - 1) as f64;
                prop_assert!((quantile_sorted(&s, p) - s[j]).abs() <= 1e-9);
                if j + 1 < n {
                    let mid = (j as f64 + 0.5) / (n - 1) as f64;
                    prop_assert!((quantile_sorted(&s, mid) - 0.5 * (s[j] + s[j + 1])).abs() <= 1e-9);
                }
            }
            let d = descriptives(&v).unwrap();
            prop_assert_eq!((d.min, d.max), (s[0], s[n - 1]));
            prop_assert!(d.q25 <= d.median && d.median <= d.q75);
            let mean = s.iter().sum::<f64>() / n as f64;
            prop_assert!((d.mean - mean).abs() < 1e-9);
            let var = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            prop_assert!((d.sd - var.sqrt()).abs() < 1e-9);
        }
    }
}
