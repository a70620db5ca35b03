//! Field-level bias detectors: funnel asymmetry (Begg-Mazumdar), the
//! winner's curse, significance chasing, and the contingency of
//! significance before and after multiple-comparison correction.

mod chasing;
mod contingency;
mod funnel;
mod winners;

pub use chasing::{
    chasing_curve, default_alpha_grid, sig_chasing, ChasingCurve, ChasingInput, ChasingResult,
    ALPHA_ESR,
};
pub use contingency::{mcc_contingency, MccContingency};
pub use funnel::{begg_mazumdar, begg_mazumdar_with, build_funnel, BeggResult, BeggVariant, FunnelPoint};
pub use winners::{winners_curse, WinnersCurse};

/// Pearson r implied by Kendall's tau under bivariate normality.
pub fn tau_to_r(tau: f64) -> f64 {
    (std::f64::consts::FRAC_PI_2 * tau).sin()
}
