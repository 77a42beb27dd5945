//! Thresholding bandits under local differential privacy.
//!
//! Every reward is passed through a randomized-response style Bernoulli
//! mechanism before the learner sees it. This crate provides:
//!
//! - [`env`]: bandit instances, their privatized view, complexity measures and
//!   the hard-instance families used by the lower bounds.
//! - [`privacy`]: the Bernoulli privatization mechanism and an analytic
//!   likelihood-ratio auditor.
//! - [`fixed_budget`] and [`fixed_confidence`]: the two learning algorithms.
//! - [`bounds`]: closed-form evaluators for the upper and lower bounds.
//! - [`harness`]: deterministic, parallel Monte Carlo and an exact
//!   enumeration oracle for small fixed-budget problems.
//!
//! Arms are indexed from zero throughout.

pub mod bounds;
pub mod env;
mod error;
pub mod ext_float;
pub mod fixed_budget;
pub mod fixed_confidence;
pub mod harness;
pub mod privacy;
mod respond;

pub use error::{Error, Result};

pub use bounds::{BoundValue, FormulaId};
pub use env::{ArmDist, GapProfile, Instance, PrivatizedView, Setting};
pub use fixed_budget::{run_fixed_budget, FbResult};
pub use fixed_confidence::{run_fixed_confidence, FcOptions, FcResult};
pub use harness::{derive_stream, exact_fb_oracle, monte_carlo, ExperimentConfig, Report, Stream};
pub use privacy::{PrivacyParams, PrivateResponse};
