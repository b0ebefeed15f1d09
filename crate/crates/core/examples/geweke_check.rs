//! Checks every full conditional of the sampler at once by comparing
//! prior draws with successive-substitution draws.
//!
//! cargo run --release --example geweke_check -- [cycles]

use aspr::model::geweke::{geweke_test, GewekeConfig};

fn main() -> aspr::Result<()> {
    let cycles = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(20_000);
    let report = geweke_test(&GewekeConfig {
        cycles,
        ..GewekeConfig::default()
    })?;
    println!(
        "{:<18} {:>12} {:>12} {:>8}",
        "statistic", "prior", "chain", "z"
    );
    for s in &report.stats {
        println!(
            "{:<18} {:>12.5} {:>12.5} {:>8.2}",
            s.name,
            s.prior_mean,
            s.chain_mean,
            s.z_score()
        );
    }
    println!("max |z| = {:.2}", report.max_abs_z());
    Ok(())
}
