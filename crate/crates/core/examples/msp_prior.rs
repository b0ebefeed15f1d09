//! Prior draws from the multiple shrinkage prior: how many distinct
//! clusters the coefficients form, and how much mass sits near zero.
//!
//! cargo run --release --example msp_prior -- [p]

use aspr::dist::normal_cdf;
use aspr::msp::{sample_prior, MspConfig};
use aspr::RngStream;

fn main() -> aspr::Result<()> {
    let p: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100);
    let config = MspConfig::default();
    let mut rng = RngStream::new(7, 0);
    let reps = 2_000;
    let (mut clusters, mut near_zero, mut large) = (0.0, 0.0, 0.0);
    for _ in 0..reps {
        let (state, beta) = sample_prior(&config, p, &mut rng)?;
        clusters += state.cluster_counts().iter().filter(|&&c| c > 0).count() as f64;
        near_zero += beta.iter().filter(|b| b.abs() < 0.1).count() as f64 / p as f64;
        large += beta.iter().filter(|b| b.abs() > 1.0).count() as f64 / p as f64;
    }
    let r = reps as f64;
    println!("p = {p}, truncation = {}", config.truncation);
    println!("occupied clusters      {:.2}", clusters / r);
    println!("share with |beta| < 0.1 {:.3}", near_zero / r);
    println!("share with |beta| > 1   {:.3}", large / r);
    let sd = config.d.sqrt();
    println!(
        "P(atom location in [-1, 1]) = {:.4}",
        normal_cdf(1.0 / sd) - normal_cdf(-1.0 / sd)
    );
    Ok(())
}
