use std::io::Write;
use std::sync::LazyLock;

use regex::{Captures, Regex};
use serde::Serialize;

use super::{Comparator, ReportedTest, SourceSpan, Statistic, Tails};
use crate::{Error, Result};

const STAT: &str = r"chi-square|chi2|χ2|χ²|X2|t|F|r|Z|z";
const NUM: &str = r"[-−]?(?:\d+\.?\d*|\.\d+)";

// STAT[(inner)] = value, p OP pvalue | ns [, one-/two-tailed]
static FULL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"(?x)
        \b(?P<stat>{STAT})
        \s*(?:\(\s*(?P<inner>[^()]*?)\s*\))?
        \s*(?P<vop>[=<>])\s*(?P<val>{NUM})
        \s*[,;]\s*
        (?: p\s*(?P<pop>[=<>])\s*(?P<p>{NUM}) | (?P<ns>ns|n\.s\.) )
        (?:\s*,\s*(?P<tails>one|two)[-\ ]tailed)?"
    ))
    .expect("static regex")
});

// Anything that looks like the start of a reported statistic.
static CANDIDATE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"\b(?:{STAT})\s*(?:\([^()]{{0,40}}\))?\s*[=<>]\s*{NUM}"
    ))
    .expect("static regex")
});

static SAMPLE_N: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^N\s*=\s*(\d+)$").expect("static regex"));

/// A recognizable but unusable fragment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub fragment: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseOutcome {
    pub tests: Vec<ReportedTest>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseOutcome {
    /// One JSON object per test, newline-delimited.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.tests {
            serde_json::to_writer(&mut out, t)?;
            out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
        }
        Ok(())
    }
}

fn number(s: &str) -> Option<f64> {
    let s = s.replace('−', "-");
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn decimals(s: &str) -> u32 {
    s.split_once('.').map_or(0, |(_, f)| f.len() as u32)
}

fn statistic(tok: &str) -> Statistic {
    match tok {
        "t" => Statistic::T,
        "F" => Statistic::F,
        "r" => Statistic::R,
        "Z" | "z" => Statistic::Z,
        _ => Statistic::Chi2,
    }
}

fn build(c: &Captures) -> std::result::Result<ReportedTest, String> {
    let stat = statistic(&c["stat"]);
    let mut dfs = Vec::new();
    let mut sample_n = None;
    if let Some(inner) = c.name("inner") {
        for part in inner.as_str().split(',').map(str::trim) {
            if let Some(m) = SAMPLE_N.captures(part) {
                if sample_n.is_some() {
                    return Err("repeated N clause".into());
                }
                sample_n = Some(m[1].parse::<u64>().map_err(|e| e.to_string())?);
            } else if sample_n.is_none() {
                dfs.push(number(part).ok_or_else(|| format!("unreadable df '{part}'"))?);
            } else {
                return Err("degrees of freedom after N clause".into());
            }
        }
    }
    if dfs.len() > 2 {
        return Err("more than two degrees of freedom".into());
    }
    if matches!(stat, Statistic::T | Statistic::Chi2) && dfs.is_empty() {
        return Err("missing degrees of freedom".into());
    }
    if &c["vop"] != "=" {
        return Err("statistic reported as an inequality".into());
    }
    let value = number(&c["val"]).ok_or("unreadable statistic value")?;

    let mut test = ReportedTest::new(stat, dfs.first().copied(), dfs.get(1).copied(), value);
    test.sample_n = sample_n;
    if c.name("ns").is_none() {
        let raw = &c["p"];
        let p = number(raw).ok_or("unreadable p-value")?;
        let d = decimals(raw);
        let cmp = match &c["pop"] {
            "=" => Comparator::Eq,
            "<" => Comparator::Lt,
            _ => Comparator::Gt,
        };
        if cmp == Comparator::Eq && p == 0.0 {
            // "p = .000" only says the value rounded to zero.
            test.p_comparator = Comparator::Lt;
            test.p_reported = Some(0.5 * 10f64.powi(-(d as i32)));
            test.p_decimals = Some(d + 1);
        } else {
            test.p_comparator = cmp;
            test.p_reported = Some(p);
            test.p_decimals = Some(d);
        }
    }
    test.tails = match c.name("tails").map(|m| m.as_str()) {
        Some("one") => Tails::One,
        Some(_) => Tails::Two,
        None => Tails::Unstated,
    };
    test.validate().map_err(|e| e.to_string())?;
    Ok(test)
}

/// Extract every well-formed reported statistic from `text`.
///
/// Statistics may be broken across lines. Fragments that look like a
/// statistic but do not complete the grammar are reported as diagnostics
/// and never guessed at.
pub fn parse_statistics(text: &str) -> ParseOutcome {
    let mut out = ParseOutcome::default();
    let mut covered = Vec::new();
    for c in FULL.captures_iter(text) {
        let m = c.get(0).expect("whole match");
        let span = SourceSpan { start: m.start(), end: m.end() };
        covered.push((m.start(), m.end()));
        match build(&c) {
            Ok(mut t) => {
                t.source_span = Some(span);
                out.tests.push(t);
            }
            Err(reason) => out.diagnostics.push(Diagnostic {
                span,
                fragment: m.as_str().to_string(),
                reason,
            }),
        }
    }
    for m in CANDIDATE.find_iter(text) {
        if covered.iter().any(|&(s, e)| m.start() >= s && m.start() < e) {
            continue;
        }
        out.diagnostics.push(Diagnostic {
            span: SourceSpan { start: m.start(), end: m.end() },
            fragment: m.as_str().to_string(),
            reason: "no p-value clause".into(),
        });
    }
    out.diagnostics.sort_by_key(|d| d.span.start);
    out
}
