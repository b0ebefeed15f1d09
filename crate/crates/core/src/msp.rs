//! Multiple shrinkage prior on the logistic coefficients.
//!
//! Each coefficient follows a double exponential centered at one of `T`
//! atoms `(mu_t, tau_t)`. Atom weights come from a truncated stick-breaking
//! process and the first atom is pinned at location zero, so cluster 0 is
//! an ordinary Bayesian-lasso shrinkage toward zero while the remaining
//! clusters shrink toward data-determined nonzero locations.
//!
//! The sampler is a blocked Gibbs scheme on the truncated representation.
//! Each double exponential is written as a normal scale mixture,
//! `beta_j | psi_j ~ N(mu_c, psi_j)` with `psi_j ~ Exp(rate tau_c^2 / 2)`.
//! Assignments and `tau` are drawn with `psi` integrated out; the local
//! scales are then redrawn from their conditional before anything that
//! conditions on them. One full pass is [`msp_sweep`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dist::{
    beta_sample, categorical_log, de_logpdf, exp_rate_sample, gamma_sample,
    inverse_gaussian_sample, std_normal,
};
use crate::error::{AsprError, Result};
use crate::rng::RngStream;

/// Below this distance from its atom a coefficient's local scale is drawn
/// from the prior.
const DEGENERATE_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MspConfig {
    /// Prior mean of the nonzero atom locations.
    pub c: f64,
    /// Prior variance of the nonzero atom locations.
    pub d: f64,
    /// Gamma shape and scale for the rate of the zero atom.
    pub a0: f64,
    pub b0: f64,
    /// Gamma shape and scale for the rates of the other atoms.
    pub a1: f64,
    pub b1: f64,
    /// Stick-breaking concentration.
    pub alpha: f64,
    /// Truncation level (number of atoms).
    pub truncation: usize,
}

impl Default for MspConfig {
    fn default() -> Self {
        MspConfig {
            c: 0.0,
            d: 0.1507,
            a0: 30.0,
            b0: 30.0,
            a1: 6.5,
            b1: 6.5,
            alpha: 1.0,
            truncation: 50,
        }
    }
}

impl MspConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.d, self.a0, self.b0, self.a1, self.b1, self.alpha];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || !self.c.is_finite() {
            return Err(AsprError::param(format!(
                "MSP hyperparameters must be positive: {self:?}"
            )));
        }
        if self.truncation < 2 {
            return Err(AsprError::param("MSP truncation level must be at least 2"));
        }
        Ok(())
    }

    fn rate_prior(&self, t: usize) -> (f64, f64) {
        if t == 0 {
            (self.a0, self.b0)
        } else {
            (self.a1, self.b1)
        }
    }
}

/// Intercept and log odds ratios of the membership regression.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefState {
    pub gamma: f64,
    pub beta: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MspState {
    /// Atom locations; `mu[0]` is always 0.
    pub mu: Vec<f64>,
    /// Atom rates.
    pub tau: Vec<f64>,
    /// Stick proportions; the last one is 1.
    pub sticks: Vec<f64>,
    pub weights: Vec<f64>,
    /// Cluster index of each coefficient.
    pub assignments: Vec<usize>,
    /// Normal variances `psi_j` of the scale-mixture representation.
    pub local_scales: Vec<f64>,
}

impl MspState {
    pub fn n_atoms(&self) -> usize {
        self.mu.len()
    }

    /// Prior mean of each coefficient given its cluster.
    pub fn prior_means(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.assignments.len(),
            self.assignments.iter().map(|&c| self.mu[c]),
        )
    }

    /// Mass the truncated process leaves to the last atom, `prod_{l<T} (1 - V_l)`.
    pub fn tail_weight(&self) -> f64 {
        *self.weights.last().expect("at least two atoms")
    }

    pub fn cluster_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_atoms()];
        for &c in &self.assignments {
            counts[c] += 1;
        }
        counts
    }

    fn recompute_weights(&mut self) {
        let t_max = self.sticks.len();
        let mut remaining = 1.0;
        for t in 0..t_max - 1 {
            self.weights[t] = self.sticks[t] * remaining;
            remaining *= 1.0 - self.sticks[t];
        }
        self.weights[t_max - 1] = remaining;
    }
}

fn draw_atom<R: Rng + ?Sized>(config: &MspConfig, t: usize, rng: &mut R) -> Result<(f64, f64)> {
    let mu = if t == 0 {
        0.0
    } else {
        config.c + config.d.sqrt() * std_normal(rng)
    };
    let (a, b) = config.rate_prior(t);
    Ok((mu, gamma_sample(a, b, rng)?))
}

pub fn msp_init(config: &MspConfig, p: usize, rng: &mut RngStream) -> Result<MspState> {
    config.validate()?;
    let t_max = config.truncation;
    let mut sticks = Vec::with_capacity(t_max);
    for _ in 0..t_max - 1 {
        sticks.push(beta_sample(1.0, config.alpha, rng)?);
    }
    sticks.push(1.0);
    let mut mu = Vec::with_capacity(t_max);
    let mut tau = Vec::with_capacity(t_max);
    for t in 0..t_max {
        let (m, r) = draw_atom(config, t, rng)?;
        mu.push(m);
        tau.push(r);
    }
    let rate = tau[0] * tau[0] / 2.0;
    let local_scales = (0..p).map(|_| exp_rate_sample(rate, rng)).collect();
    let mut state = MspState {
        mu,
        tau,
        sticks,
        weights: vec![0.0; t_max],
        assignments: vec![0; p],
        local_scales,
    };
    state.recompute_weights();
    Ok(state)
}

/// Log assignment probabilities (unnormalized) for one coefficient.
pub fn assignment_log_weights(state: &MspState, beta_j: f64) -> Vec<f64> {
    (0..state.n_atoms())
        .map(|t| state.weights[t].ln() + de_logpdf(beta_j, state.mu[t], state.tau[t]))
        .collect()
}

/// Redraws each cluster assignment with the local scale integrated out, then
/// refreshes the local scales from their conditional.
pub fn update_assignments(
    state: &mut MspState,
    beta: &DVector<f64>,
    rng: &mut RngStream,
) -> Result<()> {
    check_len(state, beta)?;
    for j in 0..beta.len() {
        let lw = assignment_log_weights(state, beta[j]);
        state.assignments[j] = categorical_log(&lw, rng);
    }
    update_local_scales(state, beta, rng)
}

/// Conjugate stick update given the current assignments.
pub fn update_sticks(state: &mut MspState, config: &MspConfig, rng: &mut RngStream) -> Result<()> {
    let counts = state.cluster_counts();
    let t_max = state.n_atoms();
    let mut above: usize = counts.iter().sum();
    for t in 0..t_max - 1 {
        above -= counts[t];
        state.sticks[t] = beta_sample(1.0 + counts[t] as f64, config.alpha + above as f64, rng)?;
    }
    state.sticks[t_max - 1] = 1.0;
    state.recompute_weights();
    Ok(())
}

/// Draws atom locations given the local scales, then atom rates with the
/// local scales integrated out. Empty clusters are refreshed from the prior.
///
/// Leaves `local_scales` conditioned on the previous rates; follow with
/// [`update_local_scales`].
pub fn update_atoms(
    state: &mut MspState,
    config: &MspConfig,
    beta: &DVector<f64>,
    rng: &mut RngStream,
) -> Result<()> {
    check_len(state, beta)?;
    let t_max = state.n_atoms();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); t_max];
    for (j, &c) in state.assignments.iter().enumerate() {
        members[c].push(j);
    }
    for t in 0..t_max {
        if members[t].is_empty() {
            let (m, r) = draw_atom(config, t, rng)?;
            state.mu[t] = m;
            state.tau[t] = r;
            continue;
        }
        if t > 0 {
            let mut precision = 1.0 / config.d;
            let mut weighted = config.c / config.d;
            for &j in &members[t] {
                precision += 1.0 / state.local_scales[j];
                weighted += beta[j] / state.local_scales[j];
            }
            state.mu[t] = weighted / precision + std_normal(rng) / precision.sqrt();
        }
        let abs_dev: f64 = members[t]
            .iter()
            .map(|&j| (beta[j] - state.mu[t]).abs())
            .sum();
        let (a, b) = config.rate_prior(t);
        let shape = a + members[t].len() as f64;
        let scale = 1.0 / (1.0 / b + abs_dev);
        state.tau[t] = gamma_sample(shape, scale, rng)?;
    }
    state.mu[0] = 0.0;
    Ok(())
}

/// `1 / psi_j ~ InverseGaussian(tau / |beta_j - mu|, tau^2)` for the
/// coefficient's current cluster.
pub fn update_local_scales(
    state: &mut MspState,
    beta: &DVector<f64>,
    rng: &mut RngStream,
) -> Result<()> {
    check_len(state, beta)?;
    for j in 0..beta.len() {
        let c = state.assignments[j];
        let (mu, tau) = (state.mu[c], state.tau[c]);
        let dev = (beta[j] - mu).abs();
        state.local_scales[j] = if dev < DEGENERATE_RESIDUAL {
            exp_rate_sample(tau * tau / 2.0, rng)
        } else {
            1.0 / inverse_gaussian_sample(tau / dev, tau * tau, rng)?
        };
    }
    Ok(())
}

fn check_len(state: &MspState, beta: &DVector<f64>) -> Result<()> {
    if beta.len() != state.assignments.len() {
        return Err(AsprError::dim(format!(
            "MSP state tracks {} coefficients, got {}",
            state.assignments.len(),
            beta.len()
        )));
    }
    Ok(())
}

/// Normal prior on the intercept, parametrized by its precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterceptPrior {
    pub mean: f64,
    pub precision: f64,
}

/// Gaussian full conditional of `(gamma, beta)` for the weighted linear model
/// `g_i ~ N(gamma + x_i' beta, sigma2 / phi_i)`.
///
/// Returns the posterior precision and the right-hand side `b` with mean `Q⁻¹ b`.
pub fn coefficient_posterior(
    state: &MspState,
    g: &DVector<f64>,
    phi: &DVector<f64>,
    x: &DMatrix<f64>,
    sigma2: f64,
    prior: InterceptPrior,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (n, p) = (x.nrows(), x.ncols());
    if g.len() != n || phi.len() != n {
        return Err(AsprError::dim(
            "pseudo-data length differs from the design rows",
        ));
    }
    if state.assignments.len() != p {
        return Err(AsprError::dim("MSP state and design disagree on p"));
    }
    let mut design = DMatrix::zeros(n, p + 1);
    let mut rhs_data = DVector::zeros(n);
    for i in 0..n {
        let w = phi[i] / sigma2;
        let sw = w.sqrt();
        design[(i, 0)] = sw;
        for j in 0..p {
            design[(i, j + 1)] = sw * x[(i, j)];
        }
        rhs_data[i] = sw * g[i];
    }
    let mut q = design.tr_mul(&design);
    let mut b = design.tr_mul(&rhs_data);
    q[(0, 0)] += prior.precision;
    b[0] += prior.precision * prior.mean;
    for j in 0..p {
        let prec = 1.0 / state.local_scales[j];
        q[(j + 1, j + 1)] += prec;
        b[j + 1] += prec * state.mu[state.assignments[j]];
    }
    Ok((q, b))
}

pub fn update_coefficients(
    state: &MspState,
    g: &DVector<f64>,
    phi: &DVector<f64>,
    x: &DMatrix<f64>,
    sigma2: f64,
    prior: InterceptPrior,
    rng: &mut RngStream,
) -> Result<CoefState> {
    let (q, b) = coefficient_posterior(state, g, phi, x, sigma2, prior)?;
    let dim = q.nrows();
    let chol = match q.clone().cholesky() {
        Some(c) => c,
        None => {
            let ridged = q.clone() + DMatrix::identity(dim, dim) * 1e-10;
            ridged.cholesky().ok_or_else(|| AsprError::NotSpd {
                reason: "coefficient posterior precision".into(),
                matrix: q,
            })?
        }
    };
    let mean = chol.solve(&b);
    let z = DVector::from_fn(dim, |_, _| std_normal(rng));
    // L Lᵀ = Q, so Lᵀ⁻¹ z has covariance Q⁻¹
    let noise = chol
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .expect("Cholesky diagonal is strictly positive");
    let draw = mean + noise;
    Ok(CoefState {
        gamma: draw[0],
        beta: draw.rows(1, dim - 1).into_owned(),
    })
}

/// One pass of the coefficient block: assignments (with local-scale refresh),
/// sticks, atoms, local scales, then the joint `(gamma, beta)` draw.
#[allow(clippy::too_many_arguments)]
pub fn msp_sweep(
    state: &mut MspState,
    coef: &CoefState,
    config: &MspConfig,
    g: &DVector<f64>,
    phi: &DVector<f64>,
    x: &DMatrix<f64>,
    sigma2: f64,
    prior: InterceptPrior,
    rng: &mut RngStream,
) -> Result<CoefState> {
    update_assignments(state, &coef.beta, rng)?;
    update_sticks(state, config, rng)?;
    update_atoms(state, config, &coef.beta, rng)?;
    update_local_scales(state, &coef.beta, rng)?;
    update_coefficients(state, g, phi, x, sigma2, prior, rng)
}

/// Direct draw of `beta` from the prior implied by `state` (no data).
pub fn sample_prior_coefficients(state: &MspState, rng: &mut RngStream) -> DVector<f64> {
    DVector::from_iterator(
        state.assignments.len(),
        state
            .assignments
            .iter()
            .map(|&c| crate::dist::de_sample(state.mu[c], state.tau[c], rng)),
    )
}

/// Fresh prior draw of the whole MSP hierarchy for `p` coefficients,
/// including the assignments.
pub fn sample_prior(
    config: &MspConfig,
    p: usize,
    rng: &mut RngStream,
) -> Result<(MspState, DVector<f64>)> {
    let mut state = msp_init(config, p, rng)?;
    for j in 0..p {
        let lw: Vec<f64> = state.weights.iter().map(|w| w.ln()).collect();
        state.assignments[j] = categorical_log(&lw, rng);
    }
    let beta = sample_prior_coefficients(&state, rng);
    update_local_scales(&mut state, &beta, rng)?;
    Ok((state, beta))
}
