//! Topic-level global explanations for text classifiers, and
//! model-vs-model residual comparison.
//!
//! The pipeline: token-level attribution records are aggregated to word
//! level, word magnitudes are aggregated over a dataset, and word
//! importances are apportioned to topics by per-word membership weights
//! P(topic|w) — learned by the built-in LDA trainer or taken from a
//! LIWC-style lexicon. Two models explained over the same topic space
//! can then be compared topic by topic through L1-normalized residuals.
//!
//! A desk-scale exact Shapley oracle (plus a seeded Monte Carlo
//! estimator) generates verifiable attribution inputs from toy linear
//! models.
//!
//! With the default `parallel` feature, batch work (coalition
//! enumeration, permutation sampling, per-instance aggregation) runs on
//! rayon. All parallel paths reduce in fixed order, so outputs are
//! bit-identical to the sequential fallback.

pub mod aggregate;
pub mod attribution;
pub mod compare;
pub mod error;
pub mod text;
pub mod topics;

mod exec;

pub use error::{Error, Result};
