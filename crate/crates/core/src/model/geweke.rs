//! Joint-distribution ("getting it right") check of the sampler.
//!
//! Two ways of drawing from the joint prior of parameters and data are
//! compared. Marginal-conditional draws sample parameters from the prior and
//! data given parameters. Successive-conditional draws alternate one Gibbs
//! sweep (parameters given data) with fresh data given parameters. If every
//! full conditional is right, both chains target the same distribution.

use nalgebra::{DMatrix, DVector};

use crate::dist::gamma_sample;
use crate::error::Result;
use crate::linalg::SpdMatrix;
use crate::model::chain::{resample_outcomes, sample_joint_prior};
use crate::model::data::AsprData;
use crate::model::gibbs::{ChainState, GibbsSampler, IndicatorRule};
use crate::model::priors::{t_link_scale2, AsprPriors, FitMode, T_LINK_DF};
use crate::msp::MspConfig;
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct GewekeConfig {
    pub n: usize,
    pub s: usize,
    pub p: usize,
    pub truncation: usize,
    pub cycles: usize,
    pub seed: u64,
    pub rule: IndicatorRule,
}

impl Default for GewekeConfig {
    fn default() -> Self {
        GewekeConfig {
            n: 30,
            s: 2,
            p: 3,
            truncation: 5,
            cycles: 20_000,
            seed: 1,
            rule: IndicatorRule::Augmented,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GewekeStat {
    pub name: String,
    pub prior_mean: f64,
    pub prior_se: f64,
    pub chain_mean: f64,
    pub chain_se: f64,
}

impl GewekeStat {
    pub fn z_score(&self) -> f64 {
        (self.chain_mean - self.prior_mean) / (self.prior_se.powi(2) + self.chain_se.powi(2)).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct GewekeReport {
    pub stats: Vec<GewekeStat>,
}

impl GewekeReport {
    pub fn max_abs_z(&self) -> f64 {
        self.stats
            .iter()
            .map(|s| s.z_score().abs())
            .fold(0.0, f64::max)
    }
}

/// Priors for the check. `rho0` is large enough that the fourth moments of
/// the covariance draws exist, so second-moment standard errors are finite.
pub fn geweke_priors(s: usize, truncation: usize) -> Result<AsprPriors> {
    let rho0 = s as f64 + 10.0;
    Ok(AsprPriors {
        theta0: DVector::zeros(s),
        psi0: 1.0,
        rho0,
        sigma0: SpdMatrix::new(DMatrix::identity(s, s) * (rho0 - s as f64 - 1.0))?,
        gamma0: -0.5,
        lambda0: 2.42,
        msp: MspConfig {
            truncation,
            ..MspConfig::default()
        },
        mode: FitMode::FullBayes,
    })
}

fn statistics(state: &ChainState, out: &mut Vec<f64>) {
    out.clear();
    out.push(state.coef.gamma);
    out.extend(state.coef.beta.iter().copied());
    for c in &state.components {
        out.extend(c.mean.iter().copied());
        let m = c.cov.matrix();
        for k in 0..m.nrows() {
            for l in k..m.ncols() {
                out.push(m[(k, l)]);
            }
        }
    }
    let first = out.len();
    for i in 0..first {
        out.push(out[i] * out[i]);
    }
}

fn stat_names(s: usize, p: usize) -> Vec<String> {
    let mut names = vec!["gamma".to_string()];
    names.extend((1..=p).map(|j| format!("beta[{j}]")));
    for h in 1..=2 {
        names.extend((1..=s).map(|k| format!("theta[{h}][{k}]")));
        for k in 1..=s {
            for l in k..=s {
                names.push(format!("Sigma[{h}][{k}][{l}]"));
            }
        }
    }
    let sq: Vec<String> = names.iter().map(|n| format!("{n}^2")).collect();
    names.extend(sq);
    names
}

/// Mean and batch-means standard error.
fn mean_and_se(values: &[f64], batches: usize) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let size = n / batches;
    let bm: Vec<f64> = (0..batches)
        .map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let var = bm.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (mean, (var / batches as f64).sqrt())
}

pub fn geweke_test(config: &GewekeConfig) -> Result<GewekeReport> {
    let priors = geweke_priors(config.s, config.truncation)?;
    let nu = T_LINK_DF;
    let sigma2 = t_link_scale2(nu);
    let root = RngStream::new(config.seed, 0);
    let mut xrng = root.split(0);
    let mut x = DMatrix::zeros(config.n, config.p);
    for v in x.iter_mut() {
        *v = gamma_sample(1.0, 1.0, &mut xrng)?;
    }
    // the sampler sees centered predictors, so the prior draws must too
    for j in 0..config.p {
        let m = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-m);
    }
    let names = stat_names(config.s, config.p);
    let k = names.len();

    let mut prior_rng = root.split(1);
    let mut prior_vals = vec![Vec::with_capacity(config.cycles); k];
    let mut buf = Vec::with_capacity(k);
    for _ in 0..config.cycles {
        let (state, _) = sample_joint_prior(&x, &priors, nu, sigma2, &mut prior_rng)?;
        statistics(&state, &mut buf);
        for (c, v) in buf.iter().enumerate() {
            prior_vals[c].push(*v);
        }
    }

    let mut rng = root.split(2);
    let (mut state, y) = sample_joint_prior(&x, &priors, nu, sigma2, &mut rng)?;
    let mut data = AsprData::from_matrices(y, x.clone())?;
    let mut chain_vals = vec![Vec::with_capacity(config.cycles); k];
    for _ in 0..config.cycles {
        let sampler = GibbsSampler::new(&data, &priors, config.rule)?;
        sampler.sweep(&mut state, &mut rng)?;
        data = data.with_outcomes(resample_outcomes(&state, &mut rng)?)?;
        statistics(&state, &mut buf);
        for (c, v) in buf.iter().enumerate() {
            chain_vals[c].push(*v);
        }
    }

    let stats = names
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let (pm, pse) = mean_and_se(&prior_vals[c], 50);
            let (cm, cse) = mean_and_se(&chain_vals[c], 50);
            GewekeStat {
                name,
                prior_mean: pm,
                prior_se: pse,
                chain_mean: cm,
                chain_se: cse,
            }
        })
        .collect();
    Ok(GewekeReport { stats })
}
