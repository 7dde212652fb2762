//! Convergence-rate, stability and optimality experiments, plus the
//! acceptance suite that drives them.

pub mod acceptance;
pub mod fit;
pub mod report;
pub mod suites;

use thiserror::Error;

use crate::hnorm::HnormError;
use crate::ratfun::RatfunError;
use crate::semigroup::SemigroupError;
use crate::stability::{SchemeClassification, StabilityError};

pub use fit::{fit_rate, RateFit};
pub use report::{ExperimentReport, Run, SeriesPoint};
pub use suites::{
    run_lower_bound_suite, run_rate_suite, run_stability_suite, LowerBoundConfig, RateMode,
    RateSuiteConfig, StabilitySuiteConfig,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Hnorm(#[from] HnormError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Ratfun(#[from] RatfunError),
}

/// `n^{-δ_s}` exponent: `min{s(m+1)/m, q}` when `|r(∞)| = 1`, otherwise `q`.
pub fn expected_rate(class: &SchemeClassification, s: f64) -> f64 {
    let q = class.q as f64;
    if class.mass_at_inf_abs < 1.0 {
        q
    } else {
        let m = class.inf.m as f64;
        (s * (m + 1.0) / m).min(q)
    }
}

/// The default `n` grid: powers of two from 8 to 1024.
pub fn default_n_grid() -> Vec<u32> {
    (3..=10).map(|k| 1u32 << k).collect()
}
