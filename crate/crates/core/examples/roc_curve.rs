//! Selection ROC for one fit: predictors are selected when their absolute
//! posterior mean exceeds a threshold, and the threshold is swept.
//!
//! cargo run --release --example roc_curve

use aspr::model::summary::coefficient_summary;
use aspr::model::{default_priors, run_chain, ChainConfig};
use aspr::sim::study::fixed_predictors;
use aspr::sim::{
    default_eps_grid, mann_whitney_auc, roc_from_effects, simulate_dataset, solve_intercept,
    SimDesign,
};
use aspr::RngStream;

fn main() -> aspr::Result<()> {
    let design = SimDesign {
        n: 813,
        p: 40,
        nonnull_count: 8,
        ..SimDesign::default()
    };
    let (x, names) = fixed_predictors(&design)?;
    let beta = design.beta_true();
    let gamma = solve_intercept(&x, &beta, design.target_fraction)?;
    let (data, _) = simulate_dataset(&design, &x, &names, &beta, gamma, &mut RngStream::new(2, 0))?;

    let config = ChainConfig {
        n_iter: 5_500,
        burn_in: 500,
        thin: 5,
        ..ChainConfig::default()
    };
    let samples = run_chain(&data, &default_priors(&data)?, &config)?;
    let effects: Vec<f64> = coefficient_summary(&samples)
        .iter()
        .map(|r| r.mean)
        .collect();

    let nonnull = design.nonnull();
    let grid = default_eps_grid(&effects, 200);
    let roc = roc_from_effects(&effects, &nonnull, &grid);
    println!("{:>8} {:>6} {:>6}", "eps", "fpr", "tpr");
    for &(eps, fpr, tpr) in roc.points.iter().step_by(20) {
        println!("{eps:>8.4} {fpr:>6.3} {tpr:>6.3}");
    }
    println!("AUC {:.4}", roc.auc);

    // the same area as a rank statistic of the grid-count scores
    let scores: Vec<f64> = effects
        .iter()
        .map(|e| grid.iter().filter(|&&g| e.abs() > g).count() as f64)
        .collect();
    println!("Mann-Whitney {:.4}", mann_whitney_auc(&scores, &nonnull));
    Ok(())
}
