//! Simulation studies: synthetic predictors, data from the model, and the
//! estimation and selection metrics used to compare methods.

pub mod design;
pub mod metrics;
pub mod snps;
pub mod study;

pub use design::{PredictorSource, SimDesign};
pub use metrics::{
    default_eps_grid, mann_whitney_auc, mse_split, roc_from_effects, selection_metrics, RocCurve,
};
pub use snps::gen_correlated_snps;
pub use study::{run_study, simulate_dataset, solve_intercept, Method, MethodSummary, StudyResult};
