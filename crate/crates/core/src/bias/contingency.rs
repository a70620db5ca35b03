use serde::{Deserialize, Serialize};

use crate::effect::EffectEstimate;
use crate::numeric::{fisher_exact_2x2, FisherResult, NumericError, Table2x2};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MccContingency {
    /// Rows: with MCC, without MCC; columns: significant, not significant.
    pub overall: Table2x2,
    /// Rows: without MCC; columns: with MCC (significant, not significant).
    pub matched: Table2x2,
    /// `None` when a margin of the overall table is empty.
    pub fisher: Option<FisherResult>,
}

/// How many estimates stay significant once their intervals are widened
/// for the family size. Significance is an interval excluding zero.
pub fn mcc_contingency(estimates: &[EffectEstimate]) -> Result<MccContingency> {
    let mut m = [[0u64; 2]; 2];
    for e in estimates {
        let before = usize::from(!e.significant());
        let after = usize::from(!e.significant_mcc());
        m[before][after] += 1;
    }
    let sig_before = m[0][0] + m[0][1];
    let sig_after = m[0][0] + m[1][0];
    let n = estimates.len() as u64;
    let overall = Table2x2::new(sig_after, n - sig_after, sig_before, n - sig_before);
    let matched = Table2x2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
    let fisher = match fisher_exact_2x2(overall) {
        Ok(f) => Some(f),
        Err(NumericError::DegenerateTable(_)) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(MccContingency { overall, matched, fisher })
}
