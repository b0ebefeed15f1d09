//! Compares the latent-class model with two-stage logistic comparators on
//! simulated birth-outcome data and prints a table of estimation and
//! selection metrics.
//!
//! cargo run --release --example simulation_study -- [replicates] [n] [p] [nonnull]

use aspr::sim::{run_study, Method, SimDesign};

fn main() -> aspr::Result<()> {
    env_logger::init();
    let arg = |i: usize, d: usize| {
        std::env::args()
            .nth(i)
            .and_then(|a| a.parse().ok())
            .unwrap_or(d)
    };
    let design = SimDesign {
        replicates: arg(1, 4),
        n: arg(2, 400),
        p: arg(3, 30),
        nonnull_count: arg(4, 5),
        ..SimDesign::default()
    };
    let start = std::time::Instant::now();
    let result = run_study(&design, &Method::all(design.enet_a))?;
    println!(
        "intercept {:.3}, mean adverse fraction {:.3}",
        result.gamma, result.mean_adverse_fraction
    );
    print!("{}", result.table_csv());
    println!("elapsed {:.1?}", start.elapsed());
    Ok(())
}
