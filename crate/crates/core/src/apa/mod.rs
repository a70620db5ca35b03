//! Extraction of APA-style test statistics from prose and re-checking of
//! their reported p-values.

mod consistency;
mod parse;

pub use consistency::{check_consistency, recompute_p, ConsistencyStatus, ConsistencyVerdict};
pub use parse::{parse_statistics, Diagnostic, ParseOutcome};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistic {
    #[serde(rename = "t")]
    T,
    #[serde(rename = "chi2")]
    Chi2,
    #[serde(rename = "F")]
    F,
    #[serde(rename = "r")]
    R,
    #[serde(rename = "Z")]
    Z,
}

impl Statistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::T => "t",
            Statistic::Chi2 => "chi2",
            Statistic::F => "F",
            Statistic::R => "r",
            Statistic::Z => "Z",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "t" => Statistic::T,
            "chi2" | "χ2" | "χ²" | "X2" => Statistic::Chi2,
            "F" => Statistic::F,
            "r" => Statistic::R,
            "Z" | "z" => Statistic::Z,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    Eq,
    Lt,
    Gt,
    Ns,
}

impl Comparator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Comparator::Eq => "eq",
            Comparator::Lt => "lt",
            Comparator::Gt => "gt",
            Comparator::Ns => "ns",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "eq" | "=" => Comparator::Eq,
            "lt" | "<" => Comparator::Lt,
            "gt" | ">" => Comparator::Gt,
            "ns" => Comparator::Ns,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tails {
    Two,
    One,
    #[default]
    Unstated,
}

/// Byte offsets into the source text, `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

/// One reported inferential test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedTest {
    pub statistic: Statistic,
    pub df1: Option<f64>,
    pub df2: Option<f64>,
    /// The `N = n` clause of a chi-square report.
    pub sample_n: Option<u64>,
    pub value: f64,
    pub p_reported: Option<f64>,
    /// Decimal places the p-value was reported with.
    pub p_decimals: Option<u32>,
    pub p_comparator: Comparator,
    pub tails: Tails,
    pub source_span: Option<SourceSpan>,
}

impl ReportedTest {
    /// A test reported as `p = p_reported`, with decimals inferred from the
    /// shortest representation of the value.
    pub fn new(statistic: Statistic, df1: Option<f64>, df2: Option<f64>, value: f64) -> Self {
        ReportedTest {
            statistic,
            df1,
            df2,
            sample_n: None,
            value,
            p_reported: None,
            p_decimals: None,
            p_comparator: Comparator::Ns,
            tails: Tails::Unstated,
            source_span: None,
        }
    }

    pub fn with_p(mut self, comparator: Comparator, p: f64) -> Self {
        self.p_comparator = comparator;
        self.p_reported = Some(p);
        self.p_decimals = Some(decimals_of(p));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Invalid(format!("{} test: {m}", self.statistic.as_str())));
        if !self.value.is_finite() {
            return bad("statistic value must be finite");
        }
        for df in [self.df1, self.df2].into_iter().flatten() {
            if !(df >= 0.0) || !df.is_finite() {
                return bad("degrees of freedom must be finite and nonnegative");
            }
        }
        match self.statistic {
            Statistic::F if self.df1.is_none() || self.df2.is_none() => {
                return bad("F requires two degrees of freedom")
            }
            Statistic::R if self.df1.is_none() => return bad("degrees of freedom required"),
            Statistic::F | Statistic::Chi2 if self.value < 0.0 => {
                return bad("statistic cannot be negative")
            }
            Statistic::Z if self.df1.is_some() => return bad("Z takes no degrees of freedom"),
            Statistic::T | Statistic::R | Statistic::Chi2 | Statistic::Z if self.df2.is_some() => {
                return bad("only F takes a second degree of freedom")
            }
            _ => {}
        }
        match (self.p_comparator, self.p_reported) {
            (Comparator::Ns, _) => {}
            (_, None) => return bad("p-value missing"),
            (_, Some(p)) if !(0.0..=1.0).contains(&p) => return bad("p-value outside [0, 1]"),
            _ => {}
        }
        Ok(())
    }
}

/// Number of decimals in the shortest round-tripping representation.
pub(crate) fn decimals_of(p: f64) -> u32 {
    let s = format!("{p}");
    s.split_once('.').map(|(_, frac)| frac.len() as u32).unwrap_or(0)
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// p-value formatted APA style, without the leading zero.
fn fmt_p(p: f64, decimals: u32) -> String {
    let s = format!("{:.*}", decimals as usize, p);
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

impl fmt::Display for ReportedTest {
    /// APA rendering, e.g. `t(34) = 2.1, p = .043`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = match self.statistic {
            Statistic::T => "t",
            Statistic::Chi2 => "χ2",
            Statistic::F => "F",
            Statistic::R => "r",
            Statistic::Z => "Z",
        };
        f.write_str(sym)?;
        if let Some(df1) = self.df1 {
            write!(f, "({}", fmt_num(df1))?;
            if let Some(df2) = self.df2 {
                write!(f, ", {}", fmt_num(df2))?;
            }
            if let Some(n) = self.sample_n {
                write!(f, ", N = {n}")?;
            }
            f.write_str(")")?;
        }
        write!(f, " = {}, ", fmt_num(self.value))?;
        match (self.p_comparator, self.p_reported) {
            (Comparator::Ns, _) | (_, None) => f.write_str("ns")?,
            (c, Some(p)) => {
                let op = match c {
                    Comparator::Eq => "=",
                    Comparator::Lt => "<",
                    _ => ">",
                };
                let d = self.p_decimals.unwrap_or_else(|| decimals_of(p));
                write!(f, "p {op} {}", fmt_p(p, d))?;
            }
        }
        match self.tails {
            Tails::One => f.write_str(", one-tailed"),
            Tails::Two => f.write_str(", two-tailed"),
            Tails::Unstated => Ok(()),
        }
    }
}
