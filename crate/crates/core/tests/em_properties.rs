#![allow(clippy::needless_range_loop)]
mod common;

use aspr::em::{em_fit, map_allocate, single_normal_loglik, EmOptions};
use aspr::RngStream;
use common::{component, mixture_data};
use rand::Rng;

#[test]
fn loglik_never_decreases() {
    let mut rng = RngStream::new(10, 0);
    let mut violations = 0;
    for k in 0..100 {
        let gap: f64 = 0.5 + 4.0 * rng.random::<f64>();
        let w: f64 = 0.05 + 0.4 * rng.random::<f64>();
        let comps = [
            component(&[-gap, 0.0], &[1.0, 0.2, 0.2, 1.5]),
            component(&[0.0, gap], &[2.0, -0.3, -0.3, 1.0]),
        ];
        let (data, _) = mixture_data(150 + 10 * k, 0, w, &comps, 1000 + k as u64);
        let fit = em_fit(
            data.y(),
            &EmOptions::default(),
            &RngStream::new(k as u64, 0),
        )
        .unwrap();
        violations += fit
            .loglik_trace
            .windows(2)
            .filter(|w| w[1] < w[0] - 1e-8)
            .count();
    }
    assert_eq!(violations, 0);
}

#[test]
fn recovers_well_separated_mixture() {
    // means six pooled standard deviations apart
    let comps = [
        component(&[5.0, 8.0], &[1.0, 0.3, 0.3, 1.0]),
        component(&[9.243, 12.243], &[1.0, -0.2, -0.2, 1.0]),
    ];
    let (data, z) = mixture_data(1000, 0, 0.3, &comps, 20);
    let fit = em_fit(data.y(), &EmOptions::default(), &RngStream::new(1, 0)).unwrap();
    assert!(fit.converged);
    let w_emp = z.iter().filter(|&&v| v).count() as f64 / 1000.0;
    assert!((fit.weight - w_emp).abs() < 0.05 * w_emp);
    for h in 0..2 {
        for k in 0..2 {
            let (est, tru) = (fit.components[h].mean[k], comps[h].mean[k]);
            assert!(
                (est - tru).abs() < 0.05 * tru.abs().max(1.0),
                "mean {h},{k}: {est} vs {tru}"
            );
            let (est, tru) = (
                fit.components[h].cov.matrix()[(k, k)],
                comps[h].cov.matrix()[(k, k)],
            );
            assert!(
                (est - tru).abs() < 0.15 * tru,
                "var {h},{k}: {est} vs {tru}"
            );
        }
    }
    let acc = map_allocate(&fit)
        .iter()
        .zip(&z)
        .filter(|(a, b)| a == b)
        .count();
    assert!(acc > 990, "{acc}");
}

#[test]
fn single_normal_truth_gives_nearly_single_normal_fit() {
    let one = component(&[1.0, -1.0], &[1.0, 0.4, 0.4, 2.0]);
    let (data, _) = mixture_data(2000, 0, 0.5, &[one.clone(), one], 30);
    let fit = em_fit(data.y(), &EmOptions::default(), &RngStream::new(1, 0)).unwrap();
    let single = single_normal_loglik(data.y()).unwrap();
    assert!(fit.loglik() >= single - 1e-6);
    assert!(
        (fit.loglik() - single) / single.abs() < 1e-3,
        "{} vs {single}",
        fit.loglik()
    );
}

#[test]
fn classification_beats_chance_on_birth_outcome_scale() {
    let comps = aspr::sim::design::reference_components();
    let (data, z) = mixture_data(813, 0, 0.1, &comps, 40);
    let fit = em_fit(data.y(), &EmOptions::default(), &RngStream::new(1, 0)).unwrap();
    let acc = map_allocate(&fit)
        .iter()
        .zip(&z)
        .filter(|(a, b)| a == b)
        .count() as f64
        / 813.0;
    // always guessing "healthy" scores about 0.9
    assert!(acc > 0.93, "{acc}");
}
