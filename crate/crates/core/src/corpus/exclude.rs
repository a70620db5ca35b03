use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::model::{CodedTest, Corpus, Design};
use crate::apa::{Comparator, Statistic};
use crate::effect::convert;

/// Sample-refinement rules, in the order they are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionRule {
    IndependentTestOnDependentSample,
    ProportionAsT,
    DependentWithoutCorrelation,
    Chi2WithoutDf,
    Chi2WithoutContingency,
    MultiWayF,
    InfiniteEffect,
    Duplicate,
}

impl ExclusionRule {
    pub const ALL: [ExclusionRule; 8] = [
        ExclusionRule::IndependentTestOnDependentSample,
        ExclusionRule::ProportionAsT,
        ExclusionRule::DependentWithoutCorrelation,
        ExclusionRule::Chi2WithoutDf,
        ExclusionRule::Chi2WithoutContingency,
        ExclusionRule::MultiWayF,
        ExclusionRule::InfiniteEffect,
        ExclusionRule::Duplicate,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ExclusionRule::IndependentTestOnDependentSample => {
                "Independent-samples test on dependent sample"
            }
            ExclusionRule::ProportionAsT => "Treated proportion as t-distribution",
            ExclusionRule::DependentWithoutCorrelation => {
                "Reported dependent-samples test w/o correlation"
            }
            ExclusionRule::Chi2WithoutDf => "Reported chi2 without df",
            ExclusionRule::Chi2WithoutContingency => "chi2 with df > 1 without contingency",
            ExclusionRule::MultiWayF => "Multi-way F-test",
            ExclusionRule::InfiniteEffect => "Yielded infinite ES or variance",
            ExclusionRule::Duplicate => "Duplicate of other coded test",
        }
    }

    /// The per-test predicates; duplicates need the whole corpus.
    fn matches(&self, t: &CodedTest) -> bool {
        let stat = t.statistic();
        match self {
            ExclusionRule::IndependentTestOnDependentSample => {
                t.design == Design::Independent && t.sample_design == Some(Design::Dependent)
            }
            ExclusionRule::ProportionAsT => stat == Statistic::T && t.proportion,
            ExclusionRule::DependentWithoutCorrelation => {
                t.design == Design::Dependent && t.correlation.is_none()
            }
            ExclusionRule::Chi2WithoutDf => stat == Statistic::Chi2 && t.test.df1.is_none(),
            ExclusionRule::Chi2WithoutContingency => {
                stat == Statistic::Chi2
                    && t.test.df1.is_some_and(|df| df > 1.0)
                    && t.contingency_shape.is_none()
            }
            ExclusionRule::MultiWayF => stat == Statistic::F && t.ways.is_some_and(|w| w > 1),
            ExclusionRule::InfiniteEffect => !convert(t).is_ok_and(|c| c.is_finite()),
            ExclusionRule::Duplicate => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionOutcome {
    pub test_id: String,
    pub rule: Option<ExclusionRule>,
    pub retained: bool,
}

/// One row of the refinement waterfall.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCount {
    pub rule: ExclusionRule,
    pub excluded: usize,
    pub retained: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub total: usize,
    pub retained: Vec<CodedTest>,
    pub outcomes: Vec<ExclusionOutcome>,
    pub stages: Vec<StageCount>,
}

type DupKey = (String, Statistic, Option<u64>, Option<u64>, u64, Option<u64>, Comparator);

fn bits(v: f64) -> u64 {
    // +0 and -0 are the same coded value.
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

fn dup_key(t: &CodedTest) -> DupKey {
    let r = &t.test;
    (
        t.paper_id.clone(),
        r.statistic,
        r.df1.map(bits),
        r.df2.map(bits),
        bits(r.value),
        r.p_reported.map(bits),
        r.p_comparator,
    )
}

/// Apply the refinement rules in order; the first matching rule is the one
/// a test is excluded under. Duplicates are detected among tests surviving
/// the earlier rules, keeping the first occurrence.
pub fn apply_exclusions(corpus: &Corpus) -> ExclusionReport {
    let tests = &corpus.tests;
    let mut rule_of: Vec<Option<ExclusionRule>> = vec![None; tests.len()];
    let mut stages = Vec::with_capacity(ExclusionRule::ALL.len());
    let mut remaining = tests.len();
    let mut seen = HashSet::new();
    for rule in ExclusionRule::ALL {
        let mut excluded = 0;
        for (i, t) in tests.iter().enumerate() {
            if rule_of[i].is_some() {
                continue;
            }
            let hit = match rule {
                ExclusionRule::Duplicate => !seen.insert(dup_key(t)),
                _ => rule.matches(t),
            };
            if hit {
                rule_of[i] = Some(rule);
                excluded += 1;
            }
        }
        remaining -= excluded;
        stages.push(StageCount { rule, excluded, retained: remaining });
    }
    let outcomes = tests
        .iter()
        .zip(&rule_of)
        .map(|(t, r)| ExclusionOutcome { test_id: t.test_id.clone(), rule: *r, retained: r.is_none() })
        .collect();
    let retained = tests
        .iter()
        .zip(&rule_of)
        .filter(|(_, r)| r.is_none())
        .map(|(t, _)| t.clone())
        .collect();
    ExclusionReport { total: tests.len(), retained, outcomes, stages }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apa::ReportedTest;

    fn t(id: &str, stat: Statistic, df1: Option<f64>, v: f64) -> CodedTest {
        let df2 = (stat == Statistic::F).then_some(60.0);
        let mut c = CodedTest::new(
            id,
            "P1",
            "F1",
            ReportedTest::new(stat, df1, df2, v).with_p(Comparator::Eq, 0.01),
        );
        c.n1 = Some(30);
        c.n2 = Some(30);
        c.test.sample_n = Some(60);
        c
    }

    #[test]
    fn rules_attribute_in_order() {
        let mut tests = vec![];
        let mut a = t("a", Statistic::T, Some(58.0), 2.0);
        a.design = Design::Independent;
        a.sample_design = Some(Design::Dependent);
        a.proportion = true; // rule 1 wins over rule 2
        tests.push(a);
        let mut b = t("b", Statistic::T, Some(58.0), 2.1);
        b.proportion = true;
        tests.push(b);
        let mut c = t("c", Statistic::T, Some(58.0), 2.2);
        c.design = Design::Dependent;
        c.n2 = None;
        tests.push(c);
        tests.push(t("d", Statistic::Chi2, None, 5.0));
        tests.push(t("e", Statistic::Chi2, Some(3.0), 9.0));
        let mut f = t("f", Statistic::F, Some(2.0), 4.0);
        f.ways = Some(2);
        tests.push(f);
        tests.push(t("g", Statistic::Chi2, Some(1.0), 60.0)); // phi = 1
        tests.push(t("h", Statistic::T, Some(58.0), 2.5));
        tests.push(t("i", Statistic::T, Some(58.0), 2.5));
        tests.push(t("j", Statistic::Z, None, 2.5));
        let corpus = Corpus { papers: vec![], tests };
        let report = apply_exclusions(&corpus);
        let rules: Vec<_> = report.outcomes.iter().map(|o| o.rule).collect();
        use ExclusionRule::*;
        assert_eq!(
            rules,
            vec![
                Some(IndependentTestOnDependentSample),
                Some(ProportionAsT),
                Some(DependentWithoutCorrelation),
                Some(Chi2WithoutDf),
                Some(Chi2WithoutContingency),
                Some(MultiWayF),
                Some(InfiniteEffect),
                None,
                Some(Duplicate),
                None,
            ]
        );
        assert_eq!(report.retained.len(), 2);
        assert_eq!(report.stages.last().unwrap().retained, 2);
        let again = apply_exclusions(&Corpus { papers: vec![], tests: report.retained.clone() });
        assert_eq!(again.retained, report.retained);
    }
}
