//! Plot-ready CSV tables. Column sets are fixed per table (see the
//! `*_COLUMNS` constants) so downstream scripts can rely on them.

use serde::Serialize;

use crate::bias::FunnelPoint;
use crate::corpus::ExclusionReport;
use crate::effect::{EffectEstimate, Magnitude};
use crate::pipeline::{ChasingRun, ConsistencyRow, TestPowerRow, UpperBoundRow};
use crate::Result;

pub const EXCLUSION_COLUMNS: &[&str] = &["test_id", "retained", "rule", "rule_label"];
pub const REFINEMENT_COLUMNS: &[&str] = &["stage", "rule", "rule_label", "excluded", "retained"];
pub const CONSISTENCY_COLUMNS: &[&str] =
    &["test_id", "statistic", "p_comparator", "p_reported", "p_recomputed", "status", "note"];
pub const ESTIMATE_COLUMNS: &[&str] = &[
    "test_id", "paper_id", "family_id", "statistic", "path", "n1", "n2", "d", "g", "log_or",
    "se_log_or", "family_size", "ci_lo", "ci_hi", "ci_mcc_lo", "ci_mcc_hi", "significant",
    "significant_mcc", "magnitude", "poolable",
];
pub const TEST_POWER_COLUMNS: &[&str] = &[
    "test_id", "paper_id", "level", "effect", "power", "power_mcc", "ncp", "critical_value",
    "critical_value_mcc", "m",
];
pub const UPPER_BOUND_COLUMNS: &[&str] = &["paper_id", "total_n", "level", "d", "power"];
pub const FUNNEL_COLUMNS: &[&str] = &["paper_id", "log_or", "se", "inv_se", "n_tests"];
pub const CHASING_COLUMNS: &[&str] =
    &["level", "mcc", "alpha", "observed", "expected", "a", "p"];

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// The serde name of a unit enum variant.
pub(crate) fn tag<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn table<I, R>(columns: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| crate::Error::Invalid(e.to_string()))
}

pub fn exclusions_csv(report: &ExclusionReport) -> Result<Vec<u8>> {
    table(
        EXCLUSION_COLUMNS,
        report.outcomes.iter().map(|o| {
            vec![
                o.test_id.clone(),
                u8::from(o.retained).to_string(),
                o.rule.map(|r| tag(&r)).unwrap_or_default(),
                o.rule.map(|r| r.label().to_string()).unwrap_or_default(),
            ]
        }),
    )
}

pub fn refinement_csv(report: &ExclusionReport) -> Result<Vec<u8>> {
    let start = vec![
        "0".into(),
        "".into(),
        "Extracted effect sizes".into(),
        "0".into(),
        report.total.to_string(),
    ];
    let stages = report.stages.iter().enumerate().map(|(i, s)| {
        vec![
            (i + 1).to_string(),
            tag(&s.rule),
            s.rule.label().to_string(),
            s.excluded.to_string(),
            s.retained.to_string(),
        ]
    });
    table(REFINEMENT_COLUMNS, std::iter::once(start).chain(stages))
}

pub fn consistency_csv(rows: &[ConsistencyRow]) -> Result<Vec<u8>> {
    table(
        CONSISTENCY_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.test_id.clone(),
                r.statistic.as_str().to_string(),
                r.p_comparator.as_str().to_string(),
                opt(r.p_reported),
                opt(r.verdict.as_ref().map(|v| v.p_recomputed)),
                r.verdict.as_ref().map(|v| tag(&v.status)).unwrap_or_default(),
                r.note.clone().unwrap_or_default(),
            ]
        }),
    )
}

pub fn estimates_csv(estimates: &[EffectEstimate], magnitudes: &[Magnitude]) -> Result<Vec<u8>> {
    table(
        ESTIMATE_COLUMNS,
        estimates.iter().zip(magnitudes).map(|(e, m)| {
            vec![
                e.test_id.clone(),
                e.paper_id.clone(),
                e.family_id.clone(),
                e.statistic.as_str().to_string(),
                tag(&e.path),
                num(e.n1),
                num(e.n2),
                num(e.d),
                num(e.g),
                num(e.log_or),
                num(e.se_log_or),
                e.family_size.to_string(),
                num(e.ci.lo),
                num(e.ci.hi),
                num(e.ci_mcc.lo),
                num(e.ci_mcc.hi),
                u8::from(e.significant()).to_string(),
                u8::from(e.significant_mcc()).to_string(),
                tag(m),
                u8::from(e.poolable).to_string(),
            ]
        }),
    )
}

pub fn test_power_csv(rows: &[TestPowerRow]) -> Result<Vec<u8>> {
    table(
        TEST_POWER_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.test_id.clone(),
                r.paper_id.clone(),
                r.level.as_str().to_string(),
                num(r.effect),
                num(r.result.power),
                num(r.result.power_mcc),
                num(r.result.ncp),
                num(r.result.critical_value),
                num(r.result.critical_value_mcc),
                r.result.m.to_string(),
            ]
        }),
    )
}

pub fn upper_bound_csv(rows: &[UpperBoundRow]) -> Result<Vec<u8>> {
    table(
        UPPER_BOUND_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.paper_id.clone(),
                r.total_n.to_string(),
                r.level.as_str().to_string(),
                num(r.d),
                num(r.power),
            ]
        }),
    )
}

pub fn funnel_csv(points: &[FunnelPoint]) -> Result<Vec<u8>> {
    table(
        FUNNEL_COLUMNS,
        points.iter().map(|p| {
            vec![
                p.paper_id.clone(),
                num(p.log_or),
                num(p.se),
                num(1.0 / p.se),
                p.n_tests.to_string(),
            ]
        }),
    )
}

pub fn chasing_csv(runs: &[ChasingRun]) -> Result<Vec<u8>> {
    table(
        CHASING_COLUMNS,
        runs.iter().flat_map(|run| {
            let c = &run.curve;
            (0..c.alpha_grid.len()).map(move |i| {
                vec![
                    run.level.as_str().to_string(),
                    u8::from(c.mcc_applied).to_string(),
                    num(c.alpha_grid[i]),
                    c.observed[i].to_string(),
                    num(c.expected[i]),
                    opt(c.a_values[i]),
                    opt(c.p_values[i]),
                ]
            })
        }),
    )
}
