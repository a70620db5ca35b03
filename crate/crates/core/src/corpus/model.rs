use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::apa::{ReportedTest, Statistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Design {
    #[serde(rename = "ind")]
    Independent,
    #[serde(rename = "dep")]
    Dependent,
    #[serde(rename = "unk")]
    #[default]
    Unknown,
}

impl Design {
    pub fn as_str(&self) -> &'static str {
        match self {
            Design::Independent => "ind",
            Design::Dependent => "dep",
            Design::Unknown => "unk",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "ind" => Design::Independent,
            "dep" => Design::Dependent,
            "unk" => Design::Unknown,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub total_n: Option<u64>,
    pub mturk: Option<bool>,
    pub mcc: Option<bool>,
    pub venue: Option<String>,
    pub year: Option<i32>,
}

/// One manually coded test.
///
/// `test.sample_n` carries the coded total N of the test (`n_value`).
/// The last four fields are refinement annotations: the sample design the
/// data actually had, the pre/post correlation of a dependent design,
/// whether the test compared proportions, and the number of factors of an
/// F-test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodedTest {
    pub test_id: String,
    pub paper_id: String,
    pub family_id: String,
    pub test: ReportedTest,
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub sd1: Option<f64>,
    pub sd2: Option<f64>,
    pub design: Design,
    pub contingency_shape: Option<(u32, u32)>,
    pub sample_design: Option<Design>,
    pub correlation: Option<f64>,
    pub proportion: bool,
    pub ways: Option<u32>,
}

impl CodedTest {
    pub fn new(test_id: &str, paper_id: &str, family_id: &str, test: ReportedTest) -> Self {
        CodedTest {
            test_id: test_id.into(),
            paper_id: paper_id.into(),
            family_id: family_id.into(),
            test,
            n1: None,
            n2: None,
            m1: None,
            m2: None,
            sd1: None,
            sd2: None,
            design: Design::Unknown,
            contingency_shape: None,
            sample_design: None,
            correlation: None,
            proportion: false,
            ways: None,
        }
    }

    pub fn statistic(&self) -> Statistic {
        self.test.statistic
    }

    pub fn n_value(&self) -> Option<u64> {
        self.test.sample_n
    }

    /// Both group sizes, when coded.
    pub fn groups(&self) -> Option<(u64, u64)> {
        self.n1.zip(self.n2)
    }

    /// Means and SDs of both groups, when all four are coded.
    pub fn means(&self) -> Option<(f64, f64, f64, f64)> {
        Some((self.m1?, self.m2?, self.sd1?, self.sd2?))
    }

    /// Total sample size from whatever was coded: N, group sizes, or the
    /// degrees of freedom of a two-group t-test or one-way F-test.
    pub fn total_n(&self) -> Option<f64> {
        if let Some(n) = self.n_value() {
            return Some(n as f64);
        }
        if let Some((a, b)) = self.groups() {
            return Some((a + b) as f64);
        }
        None
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.test_id.is_empty() || self.paper_id.is_empty() {
            return Err("test_id and paper_id are required".into());
        }
        if self.family_id.is_empty() {
            return Err("family_id is required".into());
        }
        self.test.validate().map_err(|e| e.to_string())?;
        if let Some(r) = self.correlation {
            if !(r > -1.0 && r < 1.0) {
                return Err(format!("correlation {r} outside (-1, 1)"));
            }
        }
        match self.design {
            Design::Independent if self.n1.is_some() != self.n2.is_some() => {
                return Err("independent design needs both or neither group size".into())
            }
            Design::Dependent if self.n2.is_some_and(|n2| Some(n2) != self.n1) => {
                return Err("dependent design has a single sample size".into())
            }
            _ => {}
        }
        let coded = [self.m1, self.m2, self.sd1, self.sd2];
        let present = coded.iter().filter(|v| v.is_some()).count();
        if present != 0 && present != 4 {
            return Err("means and SDs must be coded for both groups".into());
        }
        if coded.iter().flatten().any(|v| !v.is_finite()) {
            return Err("means and SDs must be finite".into());
        }
        if [self.sd1, self.sd2].iter().flatten().any(|&s| s < 0.0) {
            return Err("negative standard deviation".into());
        }
        if let Some((r, c)) = self.contingency_shape {
            if r < 2 || c < 2 {
                return Err(format!("contingency shape {r}x{c} is not a table"));
            }
        }
        if self.test.sample_n == Some(0) {
            return Err("n_value must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub papers: Vec<PaperRecord>,
    pub tests: Vec<CodedTest>,
}

impl Corpus {
    pub fn paper(&self, id: &str) -> Option<&PaperRecord> {
        self.papers.iter().find(|p| p.paper_id == id)
    }

    /// Size of each (paper, family) among `tests`.
    pub fn family_sizes<'a>(
        tests: impl IntoIterator<Item = &'a CodedTest>,
    ) -> BTreeMap<(String, String), u32> {
        let mut sizes = BTreeMap::new();
        for t in tests {
            *sizes.entry((t.paper_id.clone(), t.family_id.clone())).or_insert(0) += 1;
        }
        sizes
    }
}
