//! Data-augmentation Gibbs sampler.
//!
//! Membership follows `z_i = 1{g_i > 0}` with `g_i` a t-distributed latent
//! utility centered at the linear predictor, written as a normal scale
//! mixture `g_i | phi_i ~ N(eta_i, sigma^2 / phi_i)`,
//! `phi_i ~ Gamma(nu / 2, 2 / nu)`. With `nu = 7.3` and matched variance
//! this t is within 0.002 of the logistic CDF everywhere.
//!
//! One sweep:
//! 1. component parameters from their NIW conditionals,
//! 2. indicators `z` with `g` integrated out,
//! 3. `g` from a truncated normal,
//! 4. `phi` from its Gamma conditional,
//! 5. the shrinkage-prior block and `(gamma, beta)` jointly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dist::{
    gamma_sample, logistic, niw_sample, normal_cdf, trunc_normal_sample, Truncation,
};
use crate::em::ComponentParams;
use crate::error::Result;
use crate::linalg::SpdMatrix;
use crate::model::data::AsprData;
use crate::model::priors::{t_link_scale2, AsprPriors, FitMode, T_LINK_DF};
use crate::msp::{msp_sweep, CoefState, MspState};
use crate::rng::RngStream;

/// Membership probability used when imputing `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndicatorRule {
    /// `Phi(eta * sqrt(phi) / sigma)`: the exact conditional of the augmented
    /// model given the current `phi_i`. Keeps the sampler exactly invariant.
    #[default]
    Augmented,
    /// `logistic(eta)`, the marginal weight of the target model.
    Logistic,
}

/// All latent quantities at one iteration. Component 0 is adverse (`z = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub components: [ComponentParams; 2],
    pub z: Vec<bool>,
    pub g: DVector<f64>,
    pub phi: DVector<f64>,
    pub coef: CoefState,
    pub msp: MspState,
}

impl ChainState {
    pub fn linear_predictor(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut eta = x * &self.coef.beta;
        eta.add_scalar_mut(self.coef.gamma);
        eta
    }

    pub fn adverse_fraction(&self) -> f64 {
        self.z.iter().filter(|&&z| z).count() as f64 / self.z.len().max(1) as f64
    }
}

/// Posterior NIW parameters for the subjects selected by `members`.
#[derive(Debug, Clone)]
pub struct NiwPosterior {
    pub theta: DVector<f64>,
    pub psi: f64,
    pub rho: f64,
    pub sigma: SpdMatrix,
    pub count: usize,
}

pub fn niw_posterior(
    y: &DMatrix<f64>,
    members: &[usize],
    priors: &AsprPriors,
) -> Result<NiwPosterior> {
    let s = y.ncols();
    let nh = members.len();
    if nh == 0 {
        return Ok(NiwPosterior {
            theta: priors.theta0.clone(),
            psi: priors.psi0,
            rho: priors.rho0,
            sigma: priors.sigma0.clone(),
            count: 0,
        });
    }
    let nf = nh as f64;
    let mut ybar = DVector::zeros(s);
    for &i in members {
        ybar += y.row(i).transpose();
    }
    ybar /= nf;
    let mut scatter = DMatrix::zeros(s, s);
    for &i in members {
        let d = y.row(i).transpose() - &ybar;
        scatter += &d * d.transpose();
    }
    let psi0 = priors.psi0;
    let theta = (&ybar * nf + &priors.theta0 * psi0) / (nf + psi0);
    let dev = &ybar - &priors.theta0;
    let shrink = nf / (1.0 + nf / psi0);
    let sigma = priors.sigma0.matrix() + scatter + &dev * dev.transpose() * shrink;
    Ok(NiwPosterior {
        theta,
        psi: nf + psi0,
        rho: nf + priors.rho0,
        sigma: SpdMatrix::new(sigma)?,
        count: nh,
    })
}

#[derive(Debug, Clone)]
pub struct GibbsSampler<'a> {
    pub data: &'a AsprData,
    pub priors: &'a AsprPriors,
    pub rule: IndicatorRule,
    pub nu: f64,
    pub sigma2: f64,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(data: &'a AsprData, priors: &'a AsprPriors, rule: IndicatorRule) -> Result<Self> {
        priors.validate(data.s())?;
        Ok(GibbsSampler {
            data,
            priors,
            rule,
            nu: T_LINK_DF,
            sigma2: t_link_scale2(T_LINK_DF),
        })
    }

    /// Step (a): `(theta_h, Sigma_h)` from the NIW conditional given `z`.
    /// A no-op in plug-in mode.
    pub fn step_components(&self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        if let FitMode::Plugin(fixed) = &self.priors.mode {
            state.components = fixed.clone();
            return Ok(());
        }
        let adverse: Vec<usize> = (0..state.z.len()).filter(|&i| state.z[i]).collect();
        let healthy: Vec<usize> = (0..state.z.len()).filter(|&i| !state.z[i]).collect();
        for (h, members) in [adverse, healthy].iter().enumerate() {
            let post = niw_posterior(self.data.y(), members, self.priors)?;
            let (theta, sigma) = niw_sample(&post.theta, post.psi, post.rho, &post.sigma, rng)?;
            state.components[h] = ComponentParams {
                mean: theta,
                cov: sigma,
            };
        }
        Ok(())
    }

    /// Probability that subject `i` is adverse before seeing its outcome.
    pub fn prior_membership(&self, eta: f64, phi: f64) -> f64 {
        match self.rule {
            IndicatorRule::Augmented => normal_cdf(eta * phi.sqrt() / self.sigma2.sqrt()),
            IndicatorRule::Logistic => logistic(eta),
        }
    }

    /// Conditional probability that `z_i = 1`, computed in log space.
    pub fn membership_probability(&self, state: &ChainState, i: usize, eta: f64) -> f64 {
        let w1 = self.prior_membership(eta, state.phi[i]);
        let yi = self.data.y_row(i);
        let a = w1.ln() + state.components[0].logpdf(&yi);
        let b = (1.0 - w1).ln() + state.components[1].logpdf(&yi);
        if a == f64::NEG_INFINITY {
            return 0.0;
        }
        if b == f64::NEG_INFINITY {
            return 1.0;
        }
        logistic(a - b)
    }

    /// Step (b): impute `z`.
    pub fn step_impute_z(&self, state: &mut ChainState, rng: &mut RngStream) {
        let eta = state.linear_predictor(self.data.x());
        for i in 0..state.z.len() {
            let p1 = self.membership_probability(state, i, eta[i]);
            state.z[i] = rng.random::<f64>() < p1;
        }
    }

    /// Step (c): `g_i ~ N(eta_i, sigma^2 / phi_i)` truncated to the side of
    /// zero given by `z_i`.
    pub fn step_augment_g(&self, state: &mut ChainState, rng: &mut RngStream) {
        let eta = state.linear_predictor(self.data.x());
        for i in 0..state.z.len() {
            let sd = (self.sigma2 / state.phi[i]).sqrt();
            let side = if state.z[i] {
                Truncation::Below
            } else {
                Truncation::Above
            };
            state.g[i] = trunc_normal_sample(eta[i], sd, 0.0, side, rng);
        }
    }

    /// Step (d): `phi_i ~ Gamma((nu + 1) / 2, 2 / (nu + r_i^2 / sigma^2))`.
    pub fn step_update_phi(&self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        let eta = state.linear_predictor(self.data.x());
        let shape = (self.nu + 1.0) / 2.0;
        for i in 0..state.z.len() {
            let r = state.g[i] - eta[i];
            let scale = 2.0 / (self.nu + r * r / self.sigma2);
            state.phi[i] = gamma_sample(shape, scale, rng)?;
        }
        Ok(())
    }

    /// Step (e): shrinkage-prior block and the joint coefficient draw.
    pub fn step_coefficients(&self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        state.coef = msp_sweep(
            &mut state.msp,
            &state.coef,
            &self.priors.msp,
            &state.g,
            &state.phi,
            self.data.x(),
            self.sigma2,
            self.priors.intercept_prior(),
            rng,
        )?;
        Ok(())
    }

    pub fn sweep(&self, state: &mut ChainState, rng: &mut RngStream) -> Result<()> {
        self.step_components(state, rng)?;
        self.step_impute_z(state, rng);
        self.step_augment_g(state, rng);
        self.step_update_phi(state, rng)?;
        self.step_coefficients(state, rng)
    }
}
