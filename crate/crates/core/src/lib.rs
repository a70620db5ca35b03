//! Statistical reliability audits for corpora of reported inferential tests.
//!
//! The crate is organised as a pipeline. [`apa`] pulls APA-style test
//! statistics out of text and re-checks their p-values, [`corpus`] ingests
//! manually coded tests and applies the sample-refinement rules,
//! [`effect`] standardises every retained test to a log odds ratio,
//! [`power`] runs a priori power analyses against effect thresholds, and
//! [`bias`] hosts the field-level detectors (funnel asymmetry, winner's
//! curse, significance chasing, the MCC contingency). [`sim`] generates
//! synthetic fields with known ground truth for calibrating the detectors,
//! and [`report`] writes the artifacts of an audit run.
//!
//! Everything numeric sits on [`numeric`].

pub mod apa;
pub mod bias;
pub mod corpus;
pub mod effect;
mod error;
pub mod numeric;
pub mod pipeline;
pub mod power;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
pub use numeric::NumericError;
