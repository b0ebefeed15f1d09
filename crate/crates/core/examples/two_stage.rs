//! The two-stage comparators on one dataset: labels from known truth,
//! a mixture classification, or clinical cutoffs, each followed by an
//! unpenalized, lasso, or elastic-net logistic regression.
//!
//! cargo run --release --example two_stage

use aspr::baselines::two_stage::{two_stage, FirstStage, SecondStage, TwoStageOptions};
use aspr::baselines::{Combine, CutoffRule};
use aspr::sim::study::fixed_predictors;
use aspr::sim::{mse_split, simulate_dataset, solve_intercept, SimDesign};
use aspr::RngStream;

fn main() -> aspr::Result<()> {
    let design = SimDesign {
        n: 813,
        p: 30,
        nonnull_count: 5,
        ..SimDesign::default()
    };
    let (x, names) = fixed_predictors(&design)?;
    let beta = design.beta_true();
    let gamma = solve_intercept(&x, &beta, design.target_fraction)?;
    let (data, z) = simulate_dataset(&design, &x, &names, &beta, gamma, &mut RngStream::new(9, 0))?;
    let truth: Vec<f64> = beta.iter().copied().collect();
    let nonnull = design.nonnull();

    let cutoff = CutoffRule::parse("gest<259,bw<2500", data.outcome_names(), Combine::Union)?;
    let firsts = [
        FirstStage::Truth(z.clone()),
        FirstStage::Classification,
        FirstStage::Cutoff(cutoff),
    ];
    let seconds = [
        SecondStage::Standard,
        SecondStage::Lasso,
        SecondStage::ElasticNet(0.5),
    ];
    let opts = TwoStageOptions::default();

    println!(
        "{:<26} {:>9} {:>10} {:>9} {:>9}",
        "method", "labeled", "mse(nn)", "mse(0)", "selected"
    );
    for first in &firsts {
        for &second in &seconds {
            let fit = two_stage(&data, first, second, &opts, &RngStream::new(1, 0))?;
            let labeled = fit.z.iter().filter(|&&v| v).count();
            let agree = fit.z.iter().zip(&z).filter(|(a, b)| a == b).count();
            let (mse_nn, mse_null) = mse_split(fit.coefficients.as_slice(), &truth, &nonnull);
            println!(
                "{:<26} {:>4} ({:>2}%) {:>10.3} {:>9.3} {:>9}{}",
                format!("{}+{}", first.label(), second.label()),
                labeled,
                100 * agree / z.len(),
                mse_nn,
                mse_null,
                fit.selected.iter().filter(|&&s| s).count(),
                if fit.separated { "  (separation)" } else { "" }
            );
        }
    }
    println!("(percent = agreement of the labels with the true classes)");
    Ok(())
}
