//! Cost/benefit analytics for requirements-dependency classification.
//!
//! The crate covers the full experiment path: ingesting requirement records,
//! deriving labeled requirement pairs, bag-of-words encoding, from-scratch
//! Naive Bayes and Random Forest learners, a pool-based active-learning
//! harness, and the ROI model used to decide how much analysis pays off.

pub mod active;
pub mod classifiers;
pub mod corpus;
mod error;
pub mod roi;
pub mod seed;
pub mod textprep;

pub use error::{Error, Result};
