//! Two-component normal mixture by EM on bivariate birth outcomes.
//!
//! cargo run --release --example em_mixture

use aspr::dist::mvn_sample;
use aspr::em::{em_fit, map_allocate, single_normal_loglik, EmOptions};
use aspr::sim::design::reference_components;
use aspr::RngStream;
use nalgebra::DMatrix;
use rand::Rng;

fn main() -> aspr::Result<()> {
    let truth = reference_components();
    let (n, w) = (1000, 0.1);
    let mut rng = RngStream::new(11, 0);
    let mut y = DMatrix::zeros(n, 2);
    let mut z = Vec::with_capacity(n);
    for i in 0..n {
        let adverse = rng.random::<f64>() < w;
        let c = &truth[if adverse { 0 } else { 1 }];
        y.row_mut(i)
            .copy_from(&mvn_sample(&c.mean, &c.cov, &mut rng)?.transpose());
        z.push(adverse);
    }

    let fit = em_fit(&y, &EmOptions::default(), &RngStream::new(1, 0))?;
    println!(
        "converged {} after {} iterations; log-likelihood {:.2} (single normal {:.2})",
        fit.converged,
        fit.n_iter,
        fit.loglik(),
        single_normal_loglik(&y)?
    );
    println!("adverse weight {:.3} (truth {w})", fit.weight);
    for (h, name) in ["adverse", "healthy"].iter().enumerate() {
        let (est, tru) = (&fit.components[h], &truth[h]);
        println!(
            "{name:<8} mean ({:.1}, {:.0}) truth ({:.1}, {:.0})",
            est.mean[0], est.mean[1], tru.mean[0], tru.mean[1]
        );
    }
    let agree = map_allocate(&fit)
        .iter()
        .zip(&z)
        .filter(|(a, b)| a == b)
        .count();
    println!("MAP allocation agrees with the truth for {agree} of {n}");
    Ok(())
}
