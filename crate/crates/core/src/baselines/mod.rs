//! Comparator methods: dichotomize the outcomes, then fit a logistic
//! regression (unpenalized, lasso or elastic net) to the binary labels.

pub mod cutoff;
pub mod cv;
pub mod logistic;
pub mod penalized;
pub mod two_stage;

pub use cutoff::{dichotomize_cutoff, Combine, Cutoff, CutoffRule, Direction};
pub use cv::{cv_select_lambda, CvResult};
pub use logistic::{logit_mle, LogisticFit};
pub use penalized::{lambda_grid, logit_penalized, PenalizedOptions, PenalizedPath};
pub use two_stage::{two_stage, FirstStage, SecondStage, TwoStageFit};
