//! The full audit: refine the corpus, re-check p-values, standardise
//! effects, compute power, and run the bias battery.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::apa::{check_consistency, recompute_p, Comparator, ConsistencyVerdict, Statistic};
use crate::bias::{
    begg_mazumdar, build_funnel, chasing_curve, default_alpha_grid, mcc_contingency,
    winners_curse, BeggResult, ChasingCurve, ChasingInput, FunnelPoint, MccContingency,
    WinnersCurse,
};
use crate::corpus::{
    apply_exclusions, descriptives, CodedTest, Corpus, Descriptives, ExclusionReport,
};
use crate::effect::{convert, EffectEstimate, Level, Magnitude, ThresholdTable};
use crate::power::{design_of, test_power, threshold_effect, upper_bound_power, PowerResult};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MccMode {
    On,
    Off,
    #[default]
    Both,
}

impl MccMode {
    pub fn flags(&self) -> &'static [bool] {
        match self {
            MccMode::On => &[true],
            MccMode::Off => &[false],
            MccMode::Both => &[false, true],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub alpha: f64,
    pub thresholds: ThresholdTable,
    pub mcc: MccMode,
    /// Threshold the winner's-curse analysis measures power against.
    pub power_level: Level,
    pub alpha_grid: Vec<f64>,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            alpha: 0.05,
            thresholds: ThresholdTable::default(),
            mcc: MccMode::Both,
            power_level: Level::Medium,
            alpha_grid: default_alpha_grid(),
        }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invalid(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        self.thresholds.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub test_id: String,
    pub statistic: Statistic,
    pub p_comparator: Comparator,
    pub p_reported: Option<f64>,
    pub verdict: Option<ConsistencyVerdict>,
    /// Why no verdict could be reached.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPowerRow {
    pub test_id: String,
    pub paper_id: String,
    pub level: Level,
    pub effect: f64,
    pub result: PowerResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundRow {
    pub paper_id: String,
    pub total_n: u64,
    pub level: Level,
    pub d: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChasingRun {
    pub level: Level,
    pub curve: ChasingCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub funnel: Vec<FunnelPoint>,
    pub begg: Option<BeggResult>,
    pub winners_curse: Option<WinnersCurse>,
    pub contingency: Option<MccContingency>,
    pub chasing: Vec<ChasingRun>,
    /// Analyses skipped for lack of usable data, with the reason.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub papers: usize,
    pub tests_total: usize,
    pub tests_retained: usize,
    pub sample_size: Option<Descriptives>,
    /// Signed and absolute log OR by originating statistic.
    pub log_or_signed: BTreeMap<String, Descriptives>,
    pub log_or_absolute: BTreeMap<String, Descriptives>,
    pub magnitudes: BTreeMap<String, usize>,
    pub upper_bound_power: BTreeMap<String, Descriptives>,
    pub consistency: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub config: AuditConfig,
    pub exclusion: ExclusionReport,
    pub consistency: Vec<ConsistencyRow>,
    pub estimates: Vec<EffectEstimate>,
    pub magnitudes: Vec<Magnitude>,
    pub test_power: Vec<TestPowerRow>,
    pub upper_bound: Vec<UpperBoundRow>,
    pub bias: BiasReport,
    pub summary: Summary,
}

/// Failures that mean "not enough data for this analysis" rather than a
/// broken input or a numerical fault.
fn skippable(e: &Error) -> bool {
    matches!(
        e,
        Error::InsufficientData(_)
            | Error::Degenerate(_)
            | Error::Numeric(crate::NumericError::InsufficientData { .. })
            | Error::Numeric(crate::NumericError::ConstantRegressor)
    )
}

fn optional<T>(r: Result<T>, what: &str, skipped: &mut Vec<String>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if skippable(&e) => {
            skipped.push(format!("{what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub fn estimate_all(
    exclusion: &ExclusionReport,
    alpha: f64,
) -> Result<Vec<EffectEstimate>> {
    let sizes = Corpus::family_sizes(&exclusion.retained);
    exclusion
        .retained
        .iter()
        .map(|t| {
            let m = sizes[&(t.paper_id.clone(), t.family_id.clone())];
            EffectEstimate::from_conversion(t, convert(t)?, m, alpha)
        })
        .collect()
}

/// A priori power of every retained test that has a power model, at each
/// threshold level. With `mcc`, power is also evaluated at alpha / m for the
/// test's family size m; otherwise m = 1.
pub fn power_table(
    retained: &[CodedTest],
    estimates: &[EffectEstimate],
    thresholds: &ThresholdTable,
    alpha: f64,
    mcc: bool,
) -> Result<Vec<TestPowerRow>> {
    let mut rows = Vec::new();
    for (t, e) in retained.iter().zip(estimates) {
        let Some((_, kind)) = design_of(t) else { continue };
        let m = if mcc { e.family_size } else { 1 };
        for level in Level::ALL {
            if let Some(result) = test_power(t, thresholds, level, alpha, m)? {
                rows.push(TestPowerRow {
                    test_id: t.test_id.clone(),
                    paper_id: t.paper_id.clone(),
                    level,
                    effect: threshold_effect(kind, thresholds, level)?,
                    result,
                });
            }
        }
    }
    Ok(rows)
}

pub fn upper_bound_table(
    corpus: &Corpus,
    thresholds: &ThresholdTable,
    alpha: f64,
) -> Result<Vec<UpperBoundRow>> {
    let mut rows = Vec::new();
    for p in &corpus.papers {
        let Some(n) = p.total_n.filter(|&n| n >= 4) else { continue };
        for level in Level::ALL {
            let d = thresholds.d.get(level);
            rows.push(UpperBoundRow {
                paper_id: p.paper_id.clone(),
                total_n: n,
                level,
                d,
                power: upper_bound_power(n, d, alpha)?.power,
            });
        }
    }
    Ok(rows)
}

fn counts<I: IntoIterator<Item = String>>(keys: I) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

fn grouped_descriptives(pairs: impl Iterator<Item = (String, f64)>) -> Result<BTreeMap<String, Descriptives>> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (k, v) in pairs {
        groups.entry(k).or_default().push(v);
    }
    groups.into_iter().map(|(k, v)| Ok((k, descriptives(&v)?))).collect()
}

fn snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn run_audit(corpus: &Corpus, cfg: &AuditConfig) -> Result<Audit> {
    cfg.validate()?;
    let exclusion = apply_exclusions(corpus);
    let retained = &exclusion.retained;

    let consistency: Vec<ConsistencyRow> = corpus
        .tests
        .iter()
        .map(|t| {
            let (verdict, note) = match check_consistency(&t.test, cfg.alpha) {
                Ok(v) => (Some(v), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ConsistencyRow {
                test_id: t.test_id.clone(),
                statistic: t.statistic(),
                p_comparator: t.test.p_comparator,
                p_reported: t.test.p_reported,
                verdict,
                note,
            }
        })
        .collect();

    let estimates = estimate_all(&exclusion, cfg.alpha)?;
    let magnitudes: Vec<Magnitude> =
        estimates.iter().map(|e| cfg.thresholds.classify(e.log_or)).collect();

    let power_rows = power_table(retained, &estimates, &cfg.thresholds, cfg.alpha, true)?;
    let wc_power: Vec<Option<f64>> = {
        let at_level: BTreeMap<&str, f64> = power_rows
            .iter()
            .filter(|r| r.level == cfg.power_level)
            .map(|r| (r.test_id.as_str(), r.result.power))
            .collect();
        retained.iter().map(|t| at_level.get(t.test_id.as_str()).copied()).collect()
    };
    let upper_bound = upper_bound_table(corpus, &cfg.thresholds, cfg.alpha)?;

    let mut skipped = Vec::new();
    let poolable: Vec<EffectEstimate> = estimates.iter().filter(|e| e.poolable).cloned().collect();
    let funnel = if poolable.is_empty() {
        skipped.push("funnel: no poolable estimates".into());
        Vec::new()
    } else {
        build_funnel(&poolable, true)?
    };
    let begg = optional(begg_mazumdar(&funnel), "begg_mazumdar", &mut skipped)?;

    let (wc_est, wc_pow): (Vec<EffectEstimate>, Vec<f64>) = estimates
        .iter()
        .zip(&wc_power)
        .filter(|(e, _)| e.poolable)
        .filter_map(|(e, p)| p.map(|p| (e.clone(), p)))
        .unzip();
    let winners = optional(winners_curse(&wc_est, &wc_pow), "winners_curse", &mut skipped)?;
    let contingency = optional(mcc_contingency(&estimates), "mcc_contingency", &mut skipped)?;

    let mut chasing = Vec::new();
    for level in Level::ALL {
        let inputs: Vec<ChasingInput> = retained
            .iter()
            .zip(&estimates)
            .filter_map(|(t, e)| {
                let (design, kind) = design_of(t)?;
                design.validate().ok()?;
                let p = recompute_p(&t.test).ok()?;
                let effect = threshold_effect(kind, &cfg.thresholds, level).ok()?;
                Some(ChasingInput { design, effect, p_value: p, m: e.family_size })
            })
            .collect();
        for &mcc in cfg.mcc.flags() {
            let what = format!("chasing ({}, mcc={mcc})", level.as_str());
            if let Some(curve) = optional(chasing_curve(&inputs, &cfg.alpha_grid, mcc), &what, &mut skipped)? {
                chasing.push(ChasingRun { level, curve });
            }
        }
    }

    let sizes: Vec<f64> = corpus.papers.iter().filter_map(|p| p.total_n).map(|n| n as f64).collect();
    let summary = Summary {
        papers: corpus.papers.len(),
        tests_total: corpus.tests.len(),
        tests_retained: retained.len(),
        sample_size: if sizes.is_empty() { None } else { Some(descriptives(&sizes)?) },
        log_or_signed: grouped_descriptives(
            estimates.iter().map(|e| (e.statistic.as_str().to_string(), e.log_or)),
        )?,
        log_or_absolute: grouped_descriptives(
            estimates.iter().map(|e| (e.statistic.as_str().to_string(), e.log_or.abs())),
        )?,
        magnitudes: counts(magnitudes.iter().map(snake)),
        upper_bound_power: grouped_descriptives(
            upper_bound.iter().map(|r| (r.level.as_str().to_string(), r.power)),
        )?,
        consistency: counts(consistency.iter().map(|c| match &c.verdict {
            Some(v) => snake(&v.status),
            None => "not_checked".to_string(),
        })),
    };

    Ok(Audit {
        config: cfg.clone(),
        exclusion,
        consistency,
        estimates,
        magnitudes,
        test_power: power_rows,
        upper_bound,
        bias: BiasReport { funnel, begg, winners_curse: winners, contingency, chasing, skipped },
        summary,
    })
}
