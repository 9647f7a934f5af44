//! Rasch (one-parameter logistic) model and joint maximum-likelihood
//! calibration.
//!
//! Abilities and difficulties live on one logit continuum; only their
//! difference enters the success probability, so the likelihood is
//! translation invariant. Calibrated difficulties are anchored at mean zero.

mod calibrate;
mod matrix;
mod model;

pub use calibrate::{
    calibrate_jml, exclude_degenerate, standard_errors, AbilityEstimate, CalibrationConfig, CalibrationResult,
    EntityKind, Exclusion, ExclusionReason, ItemParameters,
};
pub use matrix::{MatrixBuilder, Response, ResponseMatrix};
pub use model::{likelihood_gradients, log_likelihood, rasch_probability, LikelihoodGradients};

pub(crate) use model::logistic;
