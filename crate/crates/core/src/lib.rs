//! Imbalance-aware anomaly detection toolkit: dataset preparation,
//! class-balance resampling (including the XGBCLUS iterative selector),
//! from-scratch tree learners and ensembles, imbalance-focused metrics,
//! KernelSHAP attribution, and decision-rule extraction.
//!
//! Everything downstream of a `u64` seed is deterministic; see
//! [`rng::derive_seed`] for how pipelines key per-stage randomness.

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod explain;
pub mod knn;
pub mod learners;
pub mod metrics;
pub mod model_io;
pub mod rng;
pub mod rules;
pub mod sampling;

mod linalg;

pub use dataset::{Dataset, Schema, SplitPair};
pub use error::{Error, Result};
pub use learners::{FittedModel, LearnerConfig, DECISION_THRESHOLD};
pub use model_io::{AnyModel, ModelFile};
