//! Synthetic research fields with known true effects, used as ground truth
//! for the bias detectors.
//!
//! Every candidate study draws from its own ChaCha stream keyed by
//! `(seed, candidate index)`, so the output does not depend on how many
//! threads generate it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apa::{Comparator, ReportedTest, Statistic};
use crate::corpus::{CodedTest, Corpus, Design, PaperRecord};
use crate::numeric::DistSpec;
use crate::power::even_split;
use crate::{Error, Result};

/// Re-draws a chasing author makes before giving up.
pub const CHASE_CAP: u32 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrueEffect {
    Point { d: f64 },
    Normal { mean: f64, sd: f64 },
}

/// Distribution of a study's total sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleSize {
    LogNormal { mu: f64, sigma: f64 },
    /// Equally spaced quantiles (minimum first, maximum last), linearly
    /// interpolated.
    Empirical { quantiles: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountDist {
    Fixed { n: u32 },
    Uniform { min: u32, max: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PublicationFilter {
    None,
    /// Only significant tests are published; a study without one stays in
    /// the file drawer.
    SignificantOnly,
    /// Each test is published with a probability depending on significance.
    ProbPublish { p_sig: f64, p_nonsig: f64 },
    /// A test with p just above alpha (within `nudge_width`) is re-run on
    /// fresh samples until it is significant, at most `CHASE_CAP` times;
    /// everything is published.
    Chase { nudge_width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub n_papers: usize,
    pub true_d: TrueEffect,
    pub sample_size: SampleSize,
    pub tests_per_family: CountDist,
    pub publication_filter: PublicationFilter,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub seed: u64,
}

fn default_alpha() -> f64 {
    0.05
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            n_papers: 50,
            true_d: TrueEffect::Point { d: 0.3 },
            sample_size: SampleSize::LogNormal { mu: 60f64.ln(), sigma: 0.6 },
            tests_per_family: CountDist::Fixed { n: 1 },
            publication_filter: PublicationFilter::None,
            alpha: 0.05,
            seed: 1,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn unit(p: f64) -> bool {
    (0.0..=1.0).contains(&p)
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_papers == 0 {
            return Err(invalid("n_papers must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha must lie in (0, 1)"));
        }
        match self.true_d {
            TrueEffect::Point { d } if !d.is_finite() => return Err(invalid("true d must be finite")),
            TrueEffect::Normal { mean, sd } if !mean.is_finite() || !(sd >= 0.0 && sd.is_finite()) => {
                return Err(invalid("true d needs a finite mean and nonnegative sd"))
            }
            _ => {}
        }
        match &self.sample_size {
            SampleSize::LogNormal { mu, sigma } => {
                if !mu.is_finite() || !(*sigma >= 0.0 && sigma.is_finite()) {
                    return Err(invalid("lognormal sample size needs finite mu and sigma >= 0"));
                }
            }
            SampleSize::Empirical { quantiles } => {
                if quantiles.is_empty()
                    || quantiles.iter().any(|q| !(q.is_finite() && *q >= 4.0))
                    || quantiles.windows(2).any(|w| w[1] < w[0])
                {
                    return Err(invalid("empirical quantiles must be nondecreasing and >= 4"));
                }
            }
        }
        match self.tests_per_family {
            CountDist::Fixed { n } if n == 0 => return Err(invalid("tests per family must be >= 1")),
            CountDist::Uniform { min, max } if min == 0 || max < min => {
                return Err(invalid("tests per family needs 1 <= min <= max"))
            }
            _ => {}
        }
        match self.publication_filter {
            PublicationFilter::ProbPublish { p_sig, p_nonsig } if !unit(p_sig) || !unit(p_nonsig) => {
                Err(invalid("publication probabilities must lie in [0, 1]"))
            }
            PublicationFilter::ProbPublish { p_sig, p_nonsig } if p_sig == 0.0 && p_nonsig == 0.0 => {
                Err(invalid("nothing would ever be published"))
            }
            PublicationFilter::Chase { nudge_width }
                if !(nudge_width > 0.0 && self.alpha + nudge_width < 1.0) =>
            {
                Err(invalid("nudge width must be positive with alpha + width < 1"))
            }
            _ => Ok(()),
        }
    }
}

/// One simulated two-group comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTest {
    pub m1: f64,
    pub m2: f64,
    pub sd1: f64,
    pub sd2: f64,
    pub t: f64,
    pub p: f64,
    /// Fresh samples drawn after the first.
    pub redraws: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStudy {
    pub candidate: u64,
    pub true_d: f64,
    pub n1: u64,
    pub n2: u64,
    pub tests: Vec<SimTest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedField {
    pub corpus: Corpus,
    /// Published studies with only their published tests, in paper order.
    pub studies: Vec<SimStudy>,
    pub candidates_drawn: u64,
}

fn rng_for(seed: u64, candidate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(candidate);
    rng
}

fn draw_n(dist: &SampleSize, rng: &mut ChaCha8Rng) -> u64 {
    let n = match dist {
        SampleSize::LogNormal { mu, sigma } => {
            LogNormal::new(*mu, *sigma).expect("validated").sample(rng)
        }
        SampleSize::Empirical { quantiles } => {
            let u: f64 = rng.random();
            let h = u * (quantiles.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(quantiles.len() - 1);
            quantiles[lo] + (h - lo as f64) * (quantiles[hi] - quantiles[lo])
        }
    };
    (n.round() as u64).max(4)
}

/// Two normal samples with unit variance and mean difference d, reduced to
/// their sufficient statistics.
fn draw_test(d: f64, n1: u64, n2: u64, rng: &mut ChaCha8Rng) -> SimTest {
    let (a, b) = (n1 as f64, n2 as f64);
    let m1 = Normal::new(d, (1.0 / a).sqrt()).expect("finite").sample(rng);
    let m2 = Normal::new(0.0, (1.0 / b).sqrt()).expect("finite").sample(rng);
    let v1 = ChiSquared::new(a - 1.0).expect("n >= 2").sample(rng) / (a - 1.0);
    let v2 = ChiSquared::new(b - 1.0).expect("n >= 2").sample(rng) / (b - 1.0);
    let df = a + b - 2.0;
    let sp = (((a - 1.0) * v1 + (b - 1.0) * v2) / df).sqrt();
    let t = (m1 - m2) / (sp * (1.0 / a + 1.0 / b).sqrt());
    let p = (2.0 * DistSpec::t(df).sf(t.abs()).expect("valid df")).min(1.0);
    SimTest { m1, m2, sd1: v1.sqrt(), sd2: v2.sqrt(), t, p, redraws: 0 }
}

/// Draw candidate study `idx` and apply the publication filter to it.
/// Returns the study with only its published tests.
pub fn draw_candidate(cfg: &FieldConfig, idx: u64) -> SimStudy {
    let mut rng = rng_for(cfg.seed, idx);
    let true_d = match cfg.true_d {
        TrueEffect::Point { d } => d,
        TrueEffect::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(&mut rng),
    };
    let (n1, n2) = even_split(draw_n(&cfg.sample_size, &mut rng));
    let k = match cfg.tests_per_family {
        CountDist::Fixed { n } => n,
        CountDist::Uniform { min, max } => rng.random_range(min..=max),
    };
    let alpha = cfg.alpha;
    let mut tests = Vec::with_capacity(k as usize);
    for _ in 0..k {
        let mut t = draw_test(true_d, n1, n2, &mut rng);
        let publish = match cfg.publication_filter {
            PublicationFilter::None => true,
            PublicationFilter::SignificantOnly => t.p < alpha,
            PublicationFilter::ProbPublish { p_sig, p_nonsig } => {
                let u: f64 = rng.random();
                u < if t.p < alpha { p_sig } else { p_nonsig }
            }
            PublicationFilter::Chase { nudge_width } => {
                // A near miss sets off re-runs until significance or the cap.
                let mut redraws = 0;
                if t.p >= alpha && t.p < alpha + nudge_width {
                    while t.p >= alpha && redraws < CHASE_CAP {
                        t = draw_test(true_d, n1, n2, &mut rng);
                        redraws += 1;
                    }
                }
                t.redraws = redraws;
                true
            }
        };
        if publish {
            tests.push(t);
        }
    }
    SimStudy { candidate: idx, true_d, n1, n2, tests }
}

fn reported(t: &SimTest, df: f64) -> ReportedTest {
    let mut r = ReportedTest::new(Statistic::T, Some(df), None, t.t);
    let rounded = (t.p * 1e4).round() / 1e4;
    if rounded == 0.0 {
        r.p_comparator = Comparator::Lt;
        r.p_reported = Some(1e-4);
    } else {
        r.p_comparator = Comparator::Eq;
        r.p_reported = Some(rounded);
    }
    r.p_decimals = Some(4);
    r
}

/// Simulate candidates until `n_papers` studies have at least one
/// published test.
pub fn simulate_field(cfg: &FieldConfig) -> Result<SimulatedField> {
    cfg.validate()?;
    let limit = (cfg.n_papers as u64).saturating_mul(100_000);
    let batch = (cfg.n_papers as u64 * 2).clamp(64, 4096);
    let mut studies = Vec::with_capacity(cfg.n_papers);
    let mut next = 0u64;
    while studies.len() < cfg.n_papers {
        if next >= limit {
            return Err(Error::Degenerate(format!(
                "only {} of {} papers published after {limit} candidates",
                studies.len(),
                cfg.n_papers
            )));
        }
        let drawn: Vec<SimStudy> =
            (next..next + batch).into_par_iter().map(|i| draw_candidate(cfg, i)).collect();
        for s in drawn {
            if studies.len() == cfg.n_papers {
                break;
            }
            next = s.candidate + 1;
            if !s.tests.is_empty() {
                studies.push(s);
            }
        }
    }

    let width = cfg.n_papers.to_string().len().max(3);
    let mut corpus = Corpus::default();
    for (i, s) in studies.iter().enumerate() {
        let paper_id = format!("S{:0width$}", i + 1);
        corpus.papers.push(PaperRecord {
            paper_id: paper_id.clone(),
            total_n: Some(s.n1 + s.n2),
            mturk: None,
            mcc: Some(false),
            venue: Some("simulated".into()),
            year: None,
        });
        let df = (s.n1 + s.n2 - 2) as f64;
        for (j, t) in s.tests.iter().enumerate() {
            let mut c = CodedTest::new(&format!("{paper_id}-T{}", j + 1), &paper_id, "F1", reported(t, df));
            c.n1 = Some(s.n1);
            c.n2 = Some(s.n2);
            c.m1 = Some(t.m1);
            c.m2 = Some(t.m2);
            c.sd1 = Some(t.sd1);
            c.sd2 = Some(t.sd2);
            c.design = Design::Independent;
            corpus.tests.push(c);
        }
    }
    Ok(SimulatedField { corpus, studies, candidates_drawn: next })
}
