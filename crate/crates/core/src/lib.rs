//! Anchor explanations for TF-IDF text classifiers.
//!
//! An *anchor* is a small multiset of the example's words whose preservation
//! keeps the classifier's decision with high probability under random word
//! removal. This crate implements the exhaustive anchor search over
//! multiplicity vectors together with four interchangeable precision
//! evaluators (exact enumeration, closed form for presence rules,
//! Monte-Carlo, and a Gaussian approximation for linear classifiers), plus
//! analytic predictors of which anchor the search selects.
//!
//! The pieces:
//!
//! - [`corpus`]: tokenization, document-frequency fitting, coverage.
//! - [`vectorize`]: plain and l2-normalized TF-IDF vectors.
//! - [`sampling`]: the perturbation law (per-word fair-coin removal) in both
//!   its literal three-step form and the equivalent Bernoulli form.
//! - [`models`]: the classifier zoo (presence rules, a small decision tree,
//!   linear classifiers, a tiny differentiable MLP).
//! - [`precision`]: the four precision evaluators with error certificates.
//! - [`anchors`]: the exhaustive selection engine and its stability checker.
//! - [`analysis`]: closed-form anchor predictors and comparison metrics.
//! - [`stats`]: binomial moment identities and Hoeffding sample sizes.
//! - [`verify`]: seeded end-to-end checks of the above, exposed by the CLI.
//!
//! The `anchor-forge` binary wires these into `fit`, `train`, `explain`,
//! `verify`, `sweep`, and `jaccard` subcommands; see the crate README.

#![forbid(unsafe_code)]

pub mod analysis;
pub mod anchors;
pub mod cli;
pub mod corpus;
mod error;
pub mod models;
pub mod precision;
pub mod sampling;
pub mod stats;
pub mod vectorize;
pub mod verify;

pub use error::{Error, Result};
