use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dist::{gamma_sample, logistic, mvn_sample, niw_sample, std_normal};
use crate::em::{em_fit, map_allocate, ComponentParams, EmOptions};
use crate::error::{AsprError, Result};
use crate::model::data::AsprData;
use crate::model::gibbs::{ChainState, GibbsSampler, IndicatorRule};
use crate::model::priors::{AsprPriors, FitMode};
use crate::msp::{msp_init, sample_prior, CoefState};
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub rule: IndicatorRule,
    /// Keep the `z` draws (needed for allocation probabilities).
    pub store_z: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_iter: 11_000,
            burn_in: 1_000,
            thin: 10,
            seed: 1,
            rule: IndicatorRule::Augmented,
            store_z: true,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_iter {
            return Err(AsprError::param(format!(
                "burn-in {} must be below n_iter {}",
                self.burn_in, self.n_iter
            )));
        }
        if self.thin == 0 {
            return Err(AsprError::param("thin must be at least 1"));
        }
        Ok(())
    }

    /// Iteration `it` (1-based) is stored when it lies past burn-in on the
    /// thinning lattice.
    pub fn is_stored(&self, it: usize) -> bool {
        it > self.burn_in && (it - self.burn_in).is_multiple_of(self.thin)
    }

    pub fn n_stored(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }
}

/// Thinned post-burn-in draws of one chain.
#[derive(Debug, Clone)]
pub struct PosteriorSamples {
    pub outcome_names: Vec<String>,
    pub predictor_names: Vec<String>,
    /// Component 0 adverse, per stored draw.
    pub components: Vec<[ComponentParams; 2]>,
    pub gamma: Vec<f64>,
    /// `draws x p`.
    pub beta: DMatrix<f64>,
    /// Mean of `omega_1(x_i)` over the observed subjects, per stored draw.
    pub omega1_bar: Vec<f64>,
    /// Per stored draw, empty when `z` was not kept.
    pub z: Vec<Vec<bool>>,
    /// Fraction of subjects allocated to the adverse component, every iteration.
    pub minority_fraction: Vec<f64>,
    /// Largest stick-breaking tail weight seen during sampling.
    pub max_tail_weight: f64,
}

impl PosteriorSamples {
    pub fn n_draws(&self) -> usize {
        self.gamma.len()
    }

    pub fn p(&self) -> usize {
        self.beta.ncols()
    }

    pub fn s(&self) -> usize {
        self.outcome_names.len()
    }

    /// Share of post-burn-in iterations in which the adverse component held
    /// a majority of subjects.
    pub fn label_switch_rate(&self, burn_in: usize) -> f64 {
        let tail = &self.minority_fraction[burn_in.min(self.minority_fraction.len())..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().filter(|&&f| f > 0.5).count() as f64 / tail.len() as f64
    }
}

/// Initial state: `z` from the MAP allocation of an EM fit (or `init_z` when
/// given), `beta = 0`, `gamma = gamma0`, then one pass of steps (a), (c), (d).
pub fn init_state(
    sampler: &GibbsSampler<'_>,
    init_z: Option<Vec<bool>>,
    rng: &mut RngStream,
) -> Result<ChainState> {
    let data = sampler.data;
    let priors = sampler.priors;
    let (n, p) = (data.n(), data.p());
    let z = match init_z {
        Some(z) if z.len() == n => z,
        Some(_) => return Err(AsprError::dim("initial allocation has the wrong length")),
        None => match em_fit(data.y(), &EmOptions::default(), &rng.split(u64::MAX)) {
            Ok(fit) => map_allocate(&fit),
            Err(e) => {
                log::warn!("EM initialization failed ({e}); drawing z from the intercept prior");
                let w = logistic(priors.gamma0);
                (0..n).map(|_| rng.random::<f64>() < w).collect()
            }
        },
    };
    let placeholder = match &priors.mode {
        FitMode::Plugin(c) => c.clone(),
        FitMode::FullBayes => {
            let c = ComponentParams::new(priors.theta0.clone(), priors.sigma0.clone())?;
            [c.clone(), c]
        }
    };
    let msp = msp_init(&priors.msp, p, rng)?;
    let mut state = ChainState {
        components: placeholder,
        z,
        g: DVector::zeros(n),
        phi: DVector::from_element(n, 1.0),
        coef: CoefState {
            gamma: priors.gamma0,
            beta: DVector::zeros(p),
        },
        msp,
    };
    sampler.step_components(&mut state, rng)?;
    sampler.step_augment_g(&mut state, rng);
    sampler.step_update_phi(&mut state, rng)?;
    Ok(state)
}

fn omega1_bar(state: &ChainState, x: &DMatrix<f64>) -> f64 {
    let eta = state.linear_predictor(x);
    eta.iter().map(|&e| logistic(e)).sum::<f64>() / eta.len().max(1) as f64
}

/// Runs one chain from `config.seed`.
pub fn run_chain(
    data: &AsprData,
    priors: &AsprPriors,
    config: &ChainConfig,
) -> Result<PosteriorSamples> {
    run_chain_from(data, priors, config, None)
}

/// As [`run_chain`], optionally starting from a given allocation.
pub fn run_chain_from(
    data: &AsprData,
    priors: &AsprPriors,
    config: &ChainConfig,
    init_z: Option<Vec<bool>>,
) -> Result<PosteriorSamples> {
    config.validate()?;
    let sampler = GibbsSampler::new(data, priors, config.rule)?;
    let root = RngStream::new(config.seed, 0);
    let mut init_rng = root.split(1);
    let mut rng = root.split(2);
    let mut state = init_state(&sampler, init_z, &mut init_rng)?;

    let kept = config.n_stored();
    let mut out = PosteriorSamples {
        outcome_names: data.outcome_names().to_vec(),
        predictor_names: data.predictor_names().to_vec(),
        components: Vec::with_capacity(kept),
        gamma: Vec::with_capacity(kept),
        beta: DMatrix::zeros(kept, data.p()),
        omega1_bar: Vec::with_capacity(kept),
        z: Vec::new(),
        minority_fraction: Vec::with_capacity(config.n_iter),
        max_tail_weight: 0.0,
    };
    for it in 1..=config.n_iter {
        sampler.sweep(&mut state, &mut rng)?;
        out.minority_fraction.push(state.adverse_fraction());
        out.max_tail_weight = out.max_tail_weight.max(state.msp.tail_weight());
        if config.is_stored(it) {
            let row = out.gamma.len();
            out.components.push(state.components.clone());
            out.gamma.push(state.coef.gamma);
            out.beta
                .row_mut(row)
                .copy_from(&state.coef.beta.transpose());
            out.omega1_bar.push(omega1_bar(&state, data.x()));
            if config.store_z {
                out.z.push(state.z.clone());
            }
        }
        if it % 1000 == 0 {
            log::debug!(
                "iteration {it}/{}: adverse fraction {:.3}",
                config.n_iter,
                state.adverse_fraction()
            );
        }
    }
    Ok(out)
}

/// One draw of every parameter and latent variable from the joint prior,
/// with outcomes generated given the draw. `x` is held fixed.
pub fn sample_joint_prior(
    x: &DMatrix<f64>,
    priors: &AsprPriors,
    nu: f64,
    sigma2: f64,
    rng: &mut RngStream,
) -> Result<(ChainState, DMatrix<f64>)> {
    let (n, p) = (x.nrows(), x.ncols());
    let s = priors.theta0.len();
    let components = match &priors.mode {
        FitMode::Plugin(c) => c.clone(),
        FitMode::FullBayes => {
            let mut draw = || -> Result<ComponentParams> {
                let (t, sg) = niw_sample(
                    &priors.theta0,
                    priors.psi0,
                    priors.rho0,
                    &priors.sigma0,
                    rng,
                )?;
                Ok(ComponentParams { mean: t, cov: sg })
            };
            let a = draw()?;
            [a, draw()?]
        }
    };
    let (msp, beta) = sample_prior(&priors.msp, p, rng)?;
    let gamma = priors.gamma0 + std_normal(rng) / priors.lambda0.sqrt();
    let coef = CoefState { gamma, beta };
    let mut eta = x * &coef.beta;
    eta.add_scalar_mut(gamma);
    let mut phi = DVector::zeros(n);
    let mut g = DVector::zeros(n);
    let mut z = vec![false; n];
    let mut y = DMatrix::zeros(n, s);
    for i in 0..n {
        phi[i] = gamma_sample(nu / 2.0, 2.0 / nu, rng)?;
        g[i] = eta[i] + (sigma2 / phi[i]).sqrt() * std_normal(rng);
        z[i] = g[i] > 0.0;
        let h = if z[i] { 0 } else { 1 };
        let yi = mvn_sample(&components[h].mean, &components[h].cov, rng)?;
        y.row_mut(i).copy_from(&yi.transpose());
    }
    Ok((
        ChainState {
            components,
            z,
            g,
            phi,
            coef,
            msp,
        },
        y,
    ))
}

/// Redraws the outcomes given the current allocation and components.
pub fn resample_outcomes(state: &ChainState, rng: &mut RngStream) -> Result<DMatrix<f64>> {
    let n = state.z.len();
    let s = state.components[0].dim();
    let mut y = DMatrix::zeros(n, s);
    for i in 0..n {
        let c = &state.components[if state.z[i] { 0 } else { 1 }];
        let yi = mvn_sample(&c.mean, &c.cov, rng)?;
        y.row_mut(i).copy_from(&yi.transpose());
    }
    Ok(y)
}
