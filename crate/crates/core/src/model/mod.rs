//! The latent-class regression model, its sampler and posterior summaries.

pub mod chain;
pub mod data;
pub mod geweke;
pub mod gibbs;
pub mod priors;
pub mod summary;

pub use chain::{run_chain, run_chain_from, ChainConfig, PosteriorSamples};
pub use data::{add_interactions, AsprData};
pub use gibbs::{niw_posterior, ChainState, GibbsSampler, IndicatorRule};
pub use priors::{default_priors, AsprPriors, FitMode};
pub use summary::{
    allocation_probability, effect_probability, omega1, posterior_predictive_density,
    posterior_summary, SummaryRow,
};
