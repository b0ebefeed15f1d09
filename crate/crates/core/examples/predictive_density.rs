//! Posterior predictive density of the outcomes and per-subject allocation
//! probabilities from a full fit.
//!
//! cargo run --release --example predictive_density

use aspr::model::{
    allocation_probability, default_priors, posterior_predictive_density, run_chain, ChainConfig,
};
use aspr::sim::study::fixed_predictors;
use aspr::sim::{simulate_dataset, solve_intercept, SimDesign};
use aspr::RngStream;
use nalgebra::DMatrix;

fn main() -> aspr::Result<()> {
    let design = SimDesign {
        n: 813,
        p: 10,
        nonnull_count: 2,
        ..SimDesign::default()
    };
    let (x, names) = fixed_predictors(&design)?;
    let beta = design.beta_true();
    let gamma = solve_intercept(&x, &beta, design.target_fraction)?;
    let (data, z) = simulate_dataset(&design, &x, &names, &beta, gamma, &mut RngStream::new(4, 0))?;

    let config = ChainConfig {
        n_iter: 3_000,
        burn_in: 500,
        thin: 5,
        ..ChainConfig::default()
    };
    let samples = run_chain(&data, &default_priors(&data)?, &config)?;

    // gestational age 150..330 days by birth weight 0..5500 g
    let (ga, bw) = (61, 56);
    let (ga_step, bw_step) = (3.0, 100.0);
    let grid = DMatrix::from_fn(ga * bw, 2, |r, c| {
        if c == 0 {
            150.0 + ga_step * (r / bw) as f64
        } else {
            bw_step * (r % bw) as f64
        }
    });
    let density = posterior_predictive_density(&samples, &grid)?;
    let mass: f64 = density.iter().sum::<f64>() * ga_step * bw_step;
    println!("density integrates to {mass:.4} over the grid");
    let peak = density
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    println!(
        "mode near ({:.0} days, {:.0} g)",
        grid[(peak, 0)],
        grid[(peak, 1)]
    );

    let healthy = allocation_probability(&samples)?;
    println!(
        "{:>7} {:>6} {:>6} {:>5} {:>9}",
        "subject", "gest", "bw", "true", "P(healthy)"
    );
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.sort_by(|&a, &b| healthy[a].total_cmp(&healthy[b]));
    for &i in order.iter().take(5).chain(order.iter().rev().take(3)) {
        let y = data.y_row(i);
        println!(
            "{:>7} {:>6.0} {:>6.0} {:>5} {:>9.3}",
            i + 1,
            y[0],
            y[1],
            if z[i] { "adv" } else { "hlt" },
            healthy[i]
        );
    }
    Ok(())
}
