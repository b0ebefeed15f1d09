//! Full model on one simulated dataset: posterior summaries of the log odds
//! ratios, selection by 90% credible interval, and effect probabilities.
//!
//! cargo run --release --example fit_aspr

use aspr::model::summary::coefficient_summary;
use aspr::model::{default_priors, effect_probability, run_chain, ChainConfig};
use aspr::sim::study::fixed_predictors;
use aspr::sim::{simulate_dataset, solve_intercept, SimDesign};
use aspr::RngStream;

fn main() -> aspr::Result<()> {
    let design = SimDesign {
        n: 813,
        p: 20,
        nonnull_count: 4,
        ..SimDesign::default()
    };
    let (x, names) = fixed_predictors(&design)?;
    let beta = design.beta_true();
    let gamma = solve_intercept(&x, &beta, design.target_fraction)?;
    let (data, z) = simulate_dataset(&design, &x, &names, &beta, gamma, &mut RngStream::new(3, 0))?;
    println!(
        "{} of {} subjects adverse",
        z.iter().filter(|&&v| v).count(),
        data.n()
    );

    let priors = default_priors(&data)?;
    let samples = run_chain(&data, &priors, &ChainConfig::default())?;
    println!(
        "{} draws; largest tail stick weight {:.1e}",
        samples.n_draws(),
        samples.max_tail_weight
    );

    let effect = effect_probability(&samples, 0.1)?;
    println!(
        "{:<8} {:>6} {:>8} {:>17} {:>8} {:>4}",
        "name", "truth", "mean", "90% interval", "P(>0.1)", "sel"
    );
    for (j, row) in coefficient_summary(&samples).iter().enumerate() {
        println!(
            "{:<8} {:>6.2} {:>8.3} [{:>6.3}, {:>6.3}] {:>8.3} {:>4}",
            row.name,
            beta[j],
            row.mean,
            row.q05,
            row.q95,
            effect[j],
            if row.selected_90() { "*" } else { "" }
        );
    }
    Ok(())
}
