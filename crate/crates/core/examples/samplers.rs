//! Moment checks for the low-level random variate generators.
//!
//! cargo run --release --example samplers

use aspr::dist::{inverse_gaussian_sample, niw_sample, trunc_normal_sample, Truncation};
use aspr::{RngStream, SpdMatrix};
use nalgebra::DVector;

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (
        m,
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0),
    )
}

fn main() -> aspr::Result<()> {
    let mut rng = RngStream::new(42, 0);
    let n = 200_000;

    // far-tail truncation, where naive rejection would never finish
    let tail: Vec<f64> = (0..n)
        .map(|_| trunc_normal_sample(0.0, 1.0, 8.0, Truncation::Below, &mut rng))
        .collect();
    let (m, _) = mean_var(&tail);
    let mills = aspr::dist::normal_pdf(8.0) / aspr::dist::normal_sf(8.0);
    println!("N(0,1) | x > 8     mean {m:.5}  exact {mills:.5}");

    let (mu, lambda) = (0.7, 2.5);
    let ig: Vec<f64> = (0..n)
        .map(|_| inverse_gaussian_sample(mu, lambda, &mut rng))
        .collect::<aspr::Result<_>>()?;
    let (m, v) = mean_var(&ig);
    println!(
        "IG(0.7, 2.5)       mean {m:.5}  exact {mu:.5}  var {v:.5}  exact {:.5}",
        mu * mu * mu / lambda
    );

    let theta = DVector::from_row_slice(&[1.0, -2.0]);
    let sigma = SpdMatrix::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0])?;
    let (psi, rho) = (4.0, 9.0);
    let draws = 50_000;
    let mut cov11 = Vec::with_capacity(draws);
    let mut mean1 = Vec::with_capacity(draws);
    for _ in 0..draws {
        let (t, s) = niw_sample(&theta, psi, rho, &sigma, &mut rng)?;
        mean1.push(t[0]);
        cov11.push(s.matrix()[(0, 0)]);
    }
    // E[Sigma] = S / (rho - s - 1), Var(theta) = E[Sigma] / psi
    let e_sigma11 = 2.0 / (rho - 3.0);
    println!(
        "NIW Sigma[1][1]     mean {:.5}  exact {e_sigma11:.5}",
        mean_var(&cov11).0
    );
    println!(
        "NIW theta[1]        var  {:.5}  exact {:.5}",
        mean_var(&mean1).1,
        e_sigma11 / psi
    );
    Ok(())
}
