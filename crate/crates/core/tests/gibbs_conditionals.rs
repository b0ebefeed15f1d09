//! Each Gibbs step against its closed-form full conditional.

mod common;

use aspr::dist::{logistic, normal_cdf};
use aspr::model::chain::init_state;
use aspr::model::priors::{t_link_scale2, T_LINK_DF};
use aspr::model::{default_priors, niw_posterior, AsprData, GibbsSampler, IndicatorRule};
use aspr::RngStream;
use common::{component, mean_se, mixture_data, separated_pair};
use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, StudentsT};

#[test]
fn niw_step_matches_conjugate_moments() {
    let (data, z_true) = mixture_data(200, 0, 0.2, &separated_pair(), 1);
    let priors = default_priors(&data).unwrap();
    let sampler = GibbsSampler::new(&data, &priors, IndicatorRule::Augmented).unwrap();
    let mut rng = RngStream::new(2, 0);
    let mut state = init_state(&sampler, Some(z_true.clone()), &mut rng).unwrap();

    let members: Vec<usize> = (0..200).filter(|&i| z_true[i]).collect();
    let post = niw_posterior(data.y(), &members, &priors).unwrap();
    let e_sigma = post.sigma.matrix() / (post.rho - 3.0);

    let draws = 100_000;
    let (mut th, mut s11, mut s12) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..draws {
        sampler.step_components(&mut state, &mut rng).unwrap();
        assert_eq!(state.z, z_true);
        let c = &state.components[0];
        th.push(c.mean[0]);
        s11.push(c.cov.matrix()[(0, 0)]);
        s12.push(c.cov.matrix()[(0, 1)]);
    }
    for (v, target) in [
        (&th, post.theta[0]),
        (&s11, e_sigma[(0, 0)]),
        (&s12, e_sigma[(0, 1)]),
    ] {
        let (m, se) = mean_se(v);
        assert!((m - target).abs() < 4.0 * se, "{m} vs {target} (se {se})");
    }
}

#[test]
fn niw_posterior_special_cases() {
    let (data, _) = mixture_data(50, 0, 0.2, &separated_pair(), 3);
    let priors = default_priors(&data).unwrap();
    let empty = niw_posterior(data.y(), &[], &priors).unwrap();
    assert_eq!(empty.theta, priors.theta0);
    assert_eq!(empty.sigma.matrix(), priors.sigma0.matrix());
    assert_eq!((empty.psi, empty.rho), (priors.psi0, priors.rho0));

    // one subject sitting exactly at theta0: the outer-product term vanishes
    let y = DMatrix::from_row_slice(1, 2, priors.theta0.as_slice());
    let one = niw_posterior(&y, &[0], &priors).unwrap();
    assert!((one.theta - &priors.theta0).norm() < 1e-12);
    assert!((one.sigma.matrix() - priors.sigma0.matrix()).norm() < 1e-9);
}

fn single_subject(y: &[f64]) -> AsprData {
    // a few filler rows so the default priors are defined
    let mut flat = y.to_vec();
    flat.extend([0.0, 0.0, 1.0, -1.0, -1.0, 2.0, 2.0, 1.0]);
    AsprData::from_matrices(DMatrix::from_row_slice(5, 2, &flat), DMatrix::zeros(5, 0)).unwrap()
}

#[test]
fn indicator_probabilities() {
    let data = single_subject(&[0.3, -0.2]);
    let same = component(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
    let priors = default_priors(&data)
        .unwrap()
        .with_plugin([same.clone(), same.clone()]);
    let mut rng = RngStream::new(4, 0);

    let logistic_rule = GibbsSampler::new(&data, &priors, IndicatorRule::Logistic).unwrap();
    let mut state = init_state(&logistic_rule, None, &mut rng).unwrap();
    for eta in [-3.0, -0.4, 0.0, 2.5] {
        let p = logistic_rule.membership_probability(&state, 0, eta);
        assert!((p - logistic(eta)).abs() < 1e-12);
    }
    let augmented = GibbsSampler::new(&data, &priors, IndicatorRule::Augmented).unwrap();
    state.phi[0] = 0.8;
    let expect = normal_cdf(-0.4 * 0.8f64.sqrt() / augmented.sigma2.sqrt());
    assert!((augmented.membership_probability(&state, 0, -0.4) - expect).abs() < 1e-12);

    // equal prior weights, adverse likelihood ten times larger
    let a = component(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
    let mut b = a.clone();
    b.mean[0] = (2.0 * 10f64.ln()).sqrt();
    state.components = [a, b];
    let ratio_data = single_subject(&[0.0, 0.0]);
    let ratio_sampler = GibbsSampler::new(&ratio_data, &priors, IndicatorRule::Logistic).unwrap();
    let p = ratio_sampler.membership_probability(&state, 0, 0.0);
    assert!((p - 10.0 / 11.0).abs() < 1e-12, "{p}");

    // far inside the healthy component
    let far = single_subject(&[30.0, 30.0]);
    let far_sampler = GibbsSampler::new(&far, &priors, IndicatorRule::Augmented).unwrap();
    state.components = [
        component(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]),
        component(&[30.0, 30.0], &[1.0, 0.0, 0.0, 1.0]),
    ];
    assert!(far_sampler.membership_probability(&state, 0, 0.0) < 1e-6);
}

#[test]
fn latent_utility_and_scale_conditionals() {
    let n = 50_000;
    let data = AsprData::from_matrices(
        DMatrix::from_fn(n, 1, |i, _| (i % 7) as f64),
        DMatrix::zeros(n, 0),
    )
    .unwrap();
    let priors = default_priors(&data).unwrap();
    let sampler = GibbsSampler::new(&data, &priors, IndicatorRule::Augmented).unwrap();
    let mut rng = RngStream::new(5, 0);
    let mut state = init_state(&sampler, Some(vec![true; n]), &mut rng).unwrap();
    state.coef.gamma = 0.0;
    state.phi.fill(1.0);
    sampler.step_augment_g(&mut state, &mut rng);
    assert!(state.g.iter().all(|&g| g > 0.0));
    let (m, se) = mean_se(state.g.as_slice());
    let half_normal = sampler.sigma2.sqrt() * (2.0 / std::f64::consts::PI).sqrt();
    assert!((m - half_normal).abs() < 4.0 * se, "{m} vs {half_normal}");

    // zero residual: Gamma((nu + 1) / 2, 2 / nu)
    state.g.fill(0.0);
    sampler.step_update_phi(&mut state, &mut rng).unwrap();
    let nu = T_LINK_DF;
    let (m, se) = mean_se(state.phi.as_slice());
    assert!((m - (nu + 1.0) / nu).abs() < 4.0 * se, "{m}");
    let var = state.phi.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / (n as f64 - 1.0);
    let exact_var = (nu + 1.0) / 2.0 * (2.0 / nu) * (2.0 / nu);
    assert!(
        (var - exact_var).abs() < 0.03 * exact_var,
        "{var} vs {exact_var}"
    );

    // large residual: scales shrink toward zero
    state.g.fill(50.0);
    sampler.step_update_phi(&mut state, &mut rng).unwrap();
    assert!(mean_se(state.phi.as_slice()).0 < 0.01);
}

#[test]
fn joint_latent_chain_has_t_marginal() {
    // identical components: z carries no outcome information, so cycling
    // (z, g, phi) at a fixed linear predictor leaves g ~ t_nu(eta, sigma^2)
    let n = 20_000;
    let data = AsprData::from_matrices(
        DMatrix::from_fn(n, 1, |i, _| (i % 5) as f64),
        DMatrix::zeros(n, 0),
    )
    .unwrap();
    let same = component(&[2.0], &[2.0]);
    let priors = default_priors(&data)
        .unwrap()
        .with_plugin([same.clone(), same]);
    let sampler = GibbsSampler::new(&data, &priors, IndicatorRule::Augmented).unwrap();
    let mut rng = RngStream::new(6, 0);
    let mut state = init_state(&sampler, Some(vec![false; n]), &mut rng).unwrap();
    let eta = 0.7;
    state.coef.gamma = eta;
    for _ in 0..40 {
        sampler.step_impute_z(&mut state, &mut rng);
        sampler.step_augment_g(&mut state, &mut rng);
        sampler.step_update_phi(&mut state, &mut rng).unwrap();
    }
    let mut g: Vec<f64> = state.g.iter().copied().collect();
    g.sort_by(f64::total_cmp);
    let t = StudentsT::new(eta, t_link_scale2(T_LINK_DF).sqrt(), T_LINK_DF).unwrap();
    for q in [0.05, 0.25, 0.5, 0.75, 0.95] {
        let emp = g[(q * n as f64) as usize];
        // empirical CDF at the t quantile within 4 binomial SE
        let at = g.partition_point(|&v| v <= t.inverse_cdf(q)) as f64 / n as f64;
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!(
            (at - q).abs() < 4.0 * se,
            "q {q}: empirical {emp}, cdf {at}"
        );
    }
}
