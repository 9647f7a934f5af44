//! Item difficulty as a proxy for intrinsic cognitive load.
//!
//! The crate calibrates Rasch item difficulties from learner response logs
//! by joint maximum likelihood, slices a learner's session into learning
//! segments between cognitive-load questionnaires, and combines the
//! standardized segment difficulty with standardized self-reported
//! extraneous load into a cognitive-load proxy.
//!
//! Module map:
//!
//! * [`irt`]: Rasch probability, likelihood, gradients and JML calibration.
//! * [`ingest`]: CSV/JSON inputs, first-attempt and minimum-response filters,
//!   questionnaire scoring.
//! * [`segmenting`]: learning segments, per-segment mean difficulty, routing
//!   vs learning phases.
//! * [`proxy`]: min-max standardization, the combined proxy, per-learner and
//!   temporal aggregates, alignment statistics.
//! * [`simgen`]: seeded synthetic populations and adaptive sessions with known
//!   ground truth.
//! * [`report`]: output tables, SVG rendering and the pipeline behind the CLI.

pub mod error;
pub mod ingest;
pub mod irt;
pub mod proxy;
pub mod report;
pub mod segmenting;
pub mod simgen;

pub use error::{Error, Result};
