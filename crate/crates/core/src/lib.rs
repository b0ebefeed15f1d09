//! Adverse subpopulation regression.
//!
//! A two-component multivariate normal latent-class model in which the
//! probability of belonging to the minority ("adverse") component follows a
//! logistic regression on high-dimensional predictors. Coefficients receive a
//! multiple shrinkage prior (a stick-breaking mixture of double exponentials
//! with one atom pinned at zero) and the model is fit by data-augmentation
//! Gibbs sampling. EM, two-stage logistic and penalized-logistic comparators
//! and a simulation harness live alongside.

// Index loops mirror the algebra; `!(x > 0.0)` style guards reject NaN on purpose.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod dist;
pub mod em;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod msp;
pub mod rng;
pub mod sim;

pub use error::{AsprError, Result};
pub use linalg::SpdMatrix;
pub use rng::RngStream;
