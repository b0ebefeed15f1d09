//! Full model against the plug-in variant, whose component parameters are
//! fixed at EM estimates. The plug-in intervals ignore uncertainty in the
//! components; how much that matters depends on how well separated they are.
//!
//! cargo run --release --example plugin_fit

use aspr::em::{em_fit, EmOptions};
use aspr::model::summary::coefficient_summary;
use aspr::model::{default_priors, run_chain, ChainConfig};
use aspr::sim::study::fixed_predictors;
use aspr::sim::{simulate_dataset, solve_intercept, SimDesign};
use aspr::RngStream;

fn main() -> aspr::Result<()> {
    let design = SimDesign {
        n: 600,
        p: 10,
        nonnull_count: 3,
        ..SimDesign::default()
    };
    let (x, names) = fixed_predictors(&design)?;
    let beta = design.beta_true();
    let gamma = solve_intercept(&x, &beta, design.target_fraction)?;
    let (data, _) = simulate_dataset(&design, &x, &names, &beta, gamma, &mut RngStream::new(5, 0))?;

    let config = ChainConfig {
        n_iter: 5_500,
        burn_in: 500,
        thin: 5,
        ..ChainConfig::default()
    };
    let full_priors = default_priors(&data)?;
    let em = em_fit(data.y(), &EmOptions::default(), &RngStream::new(1, 0))?;
    let plugin_priors = full_priors.clone().with_plugin(em.components);
    let full = coefficient_summary(&run_chain(&data, &full_priors, &config)?);
    let plugin = coefficient_summary(&run_chain(&data, &plugin_priors, &config)?);

    println!(
        "{:<7} {:>6} {:>10} {:>10} {:>10} {:>10}",
        "name", "truth", "full", "width", "plug-in", "width"
    );
    for j in 0..data.p() {
        println!(
            "{:<7} {:>6.2} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            full[j].name,
            beta[j],
            full[j].mean,
            full[j].width_90(),
            plugin[j].mean,
            plugin[j].width_90()
        );
    }
    let mean_width = |rows: &[aspr::model::SummaryRow]| {
        rows.iter().map(|r| r.width_90()).sum::<f64>() / rows.len() as f64
    };
    println!(
        "mean 90% width: full {:.3}, plug-in {:.3}",
        mean_width(&full),
        mean_width(&plugin)
    );
    Ok(())
}
