//! Maximum-likelihood fitting of a two-component multivariate normal mixture.
//!
//! Used two ways: to fix the component parameters for the plug-in sampler,
//! and as the "classification" first stage of the two-stage comparators
//! (MAP allocation of each subject).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::dist::mvn_logpdf_unchecked;
use crate::error::{AsprError, Result};
use crate::linalg::SpdMatrix;
use crate::rng::RngStream;

/// Mean vector and covariance of one mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentParams {
    pub mean: DVector<f64>,
    pub cov: SpdMatrix,
}

impl ComponentParams {
    pub fn new(mean: DVector<f64>, cov: SpdMatrix) -> Result<Self> {
        if mean.len() != cov.dim() {
            return Err(AsprError::dim(
                "component mean and covariance dimensions differ",
            ));
        }
        Ok(ComponentParams { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn logpdf(&self, y: &[f64]) -> f64 {
        mvn_logpdf_unchecked(y, self.mean.as_slice(), &self.cov)
    }
}

#[derive(Debug, Clone)]
pub struct EmOptions {
    pub n_restarts: usize,
    /// Relative log-likelihood change that stops the iterations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions {
            n_restarts: 10,
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

/// Result of [`em_fit`]. Component 0 is the adverse (minority) component
/// once labeled; `weight` is its mixing proportion.
#[derive(Debug, Clone)]
pub struct MixtureFit {
    pub components: [ComponentParams; 2],
    pub weight: f64,
    /// `n x 2`, column 0 for component 0.
    pub responsibilities: DMatrix<f64>,
    pub loglik_trace: Vec<f64>,
    pub converged: bool,
    pub n_iter: usize,
}

impl MixtureFit {
    pub fn loglik(&self) -> f64 {
        self.loglik_trace
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }
}

fn row(y: &DMatrix<f64>, i: usize) -> Vec<f64> {
    y.row(i).iter().copied().collect()
}

/// E-step: responsibilities and the observed-data log-likelihood.
pub fn responsibilities(
    y: &DMatrix<f64>,
    components: &[ComponentParams; 2],
    weight: f64,
) -> (DMatrix<f64>, f64) {
    let n = y.nrows();
    let mut resp = DMatrix::zeros(n, 2);
    let (lw0, lw1) = (weight.ln(), (1.0 - weight).ln());
    let mut loglik = 0.0;
    let mut yi = vec![0.0; y.ncols()];
    for i in 0..n {
        for (j, v) in yi.iter_mut().enumerate() {
            *v = y[(i, j)];
        }
        let a = lw0 + components[0].logpdf(&yi);
        let b = lw1 + components[1].logpdf(&yi);
        let m = a.max(b);
        let lse = m + ((a - m).exp() + (b - m).exp()).ln();
        loglik += lse;
        let r0 = (a - lse).exp();
        resp[(i, 0)] = r0;
        resp[(i, 1)] = 1.0 - r0;
    }
    (resp, loglik)
}

/// Log-likelihood of the single-normal MLE (sample mean, `1/n` covariance).
pub fn single_normal_loglik(y: &DMatrix<f64>) -> Result<f64> {
    let n = y.nrows() as f64;
    let mean = y.row_mean().transpose();
    let centered = DMatrix::from_fn(y.nrows(), y.ncols(), |i, j| y[(i, j)] - mean[j]);
    let cov = SpdMatrix::new(centered.transpose() * &centered / n)?;
    Ok((0..y.nrows())
        .map(|i| mvn_logpdf_unchecked(&row(y, i), mean.as_slice(), &cov))
        .sum())
}

fn m_step(y: &DMatrix<f64>, resp: &DMatrix<f64>) -> Option<([ComponentParams; 2], f64)> {
    let (n, s) = (y.nrows(), y.ncols());
    let mut comps = Vec::with_capacity(2);
    for h in 0..2 {
        let nh: f64 = resp.column(h).sum();
        if nh < (s + 2) as f64 {
            return None;
        }
        let mut mean = DVector::zeros(s);
        for j in 0..s {
            mean[j] = (0..n).map(|i| resp[(i, h)] * y[(i, j)]).sum::<f64>() / nh;
        }
        let mut cov = DMatrix::zeros(s, s);
        for k in 0..s {
            for l in 0..=k {
                let c = (0..n)
                    .map(|i| resp[(i, h)] * (y[(i, k)] - mean[k]) * (y[(i, l)] - mean[l]))
                    .sum::<f64>()
                    / nh;
                cov[(k, l)] = c;
                cov[(l, k)] = c;
            }
        }
        let ridge = 1e-8 * cov.trace() / s as f64;
        for k in 0..s {
            cov[(k, k)] += ridge;
        }
        let cov = SpdMatrix::new(cov).ok()?;
        comps.push(ComponentParams { mean, cov });
    }
    let weight = resp.column(0).sum() / n as f64;
    let c1 = comps.pop()?;
    let c0 = comps.pop()?;
    Some(([c0, c1], weight))
}

/// Hard 2-means on standardized data, k-means++ seeding.
fn two_means(y: &DMatrix<f64>, rng: &mut RngStream) -> Vec<usize> {
    let (n, s) = (y.nrows(), y.ncols());
    let mean = y.row_mean();
    let sd: Vec<f64> = (0..s)
        .map(|j| {
            let v = y
                .column(j)
                .iter()
                .map(|x| (x - mean[j]).powi(2))
                .sum::<f64>()
                / n as f64;
            if v > 0.0 {
                v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let z = DMatrix::from_fn(n, s, |i, j| (y[(i, j)] - mean[j]) / sd[j]);
    let dist2 = |i: usize, c: &[f64]| -> f64 { (0..s).map(|j| (z[(i, j)] - c[j]).powi(2)).sum() };

    let first = rng.random_range(0..n);
    let c0: Vec<f64> = z.row(first).iter().copied().collect();
    let d: Vec<f64> = (0..n).map(|i| dist2(i, &c0)).collect();
    let total: f64 = d.iter().sum();
    let second = if total > 0.0 {
        let mut u = rng.random::<f64>() * total;
        let mut pick = n - 1;
        for (i, di) in d.iter().enumerate() {
            if u < *di {
                pick = i;
                break;
            }
            u -= di;
        }
        pick
    } else {
        rng.random_range(0..n)
    };
    let mut centers = [c0, z.row(second).iter().copied().collect::<Vec<f64>>()];
    let mut assign = vec![0usize; n];
    for _ in 0..100 {
        let mut changed = false;
        for i in 0..n {
            let a = if dist2(i, &centers[0]) <= dist2(i, &centers[1]) {
                0
            } else {
                1
            };
            if a != assign[i] {
                assign[i] = a;
                changed = true;
            }
        }
        for (h, center) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&i| assign[i] == h).collect();
            if members.is_empty() {
                continue;
            }
            for (j, cj) in center.iter_mut().enumerate() {
                *cj = members.iter().map(|&i| z[(i, j)]).sum::<f64>() / members.len() as f64;
            }
        }
        if !changed {
            break;
        }
    }
    assign
}

fn em_single(y: &DMatrix<f64>, opts: &EmOptions, rng: &mut RngStream) -> Option<MixtureFit> {
    let n = y.nrows();
    let assign = two_means(y, rng);
    let mut resp = DMatrix::from_fn(n, 2, |_, _| 0.0);
    for i in 0..n {
        let jitter = rng.random_range(-0.05..0.05);
        let r0 = if assign[i] == 0 { 0.9 } else { 0.1 } + jitter;
        resp[(i, 0)] = r0;
        resp[(i, 1)] = 1.0 - r0;
    }
    let mut trace = Vec::new();
    let mut converged = false;
    let mut state = None;
    let mut n_iter = 0;
    for it in 0..opts.max_iter {
        let (comps, weight) = m_step(y, &resp)?;
        let (r, ll) = responsibilities(y, &comps, weight);
        if !ll.is_finite() {
            return None;
        }
        resp = r;
        n_iter = it + 1;
        let prev = trace.last().copied();
        trace.push(ll);
        state = Some((comps, weight));
        if let Some(prev) = prev {
            if ((ll - prev) / prev.abs().max(f64::MIN_POSITIVE)).abs() < opts.tol {
                converged = true;
                break;
            }
        }
    }
    let (components, weight) = state?;
    Some(MixtureFit {
        components,
        weight,
        responsibilities: resp,
        loglik_trace: trace,
        converged,
        n_iter,
    })
}

/// Fits the mixture by EM with `opts.n_restarts` seeded restarts and returns
/// the best run by final log-likelihood, labeled so component 0 is the minority.
pub fn em_fit(y: &DMatrix<f64>, opts: &EmOptions, rng: &RngStream) -> Result<MixtureFit> {
    let (n, s) = (y.nrows(), y.ncols());
    if s == 0 || n <= 2 * s + 2 {
        return Err(AsprError::dim(format!(
            "EM needs n > 2s + 2, got n = {n}, s = {s}"
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(AsprError::Data("outcomes contain non-finite values".into()));
    }
    if opts.n_restarts == 0 || opts.max_iter == 0 {
        return Err(AsprError::param(
            "EM needs at least one restart and one iteration",
        ));
    }
    let runs: Vec<Option<MixtureFit>> = (0..opts.n_restarts)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng.split(k as u64);
            em_single(y, opts, &mut stream)
        })
        .collect();
    let mut best: Option<MixtureFit> = None;
    for fit in runs.into_iter().flatten() {
        // strict comparison keeps the lowest restart index on ties
        if best.as_ref().is_none_or(|b| fit.loglik() > b.loglik()) {
            best = Some(fit);
        }
    }
    best.map(label_minority).ok_or_else(|| {
        AsprError::EmFailed(format!(
            "all {} restarts collapsed a component",
            opts.n_restarts
        ))
    })
}

/// Orders the components so component 0 has weight at most 0.5; an exact tie
/// puts the component with the smaller first-coordinate mean first.
pub fn label_minority(mut fit: MixtureFit) -> MixtureFit {
    let swap = if fit.weight > 0.5 {
        true
    } else if fit.weight == 0.5 {
        fit.components[1].mean[0] < fit.components[0].mean[0]
    } else {
        false
    };
    if swap {
        fit.components.swap(0, 1);
        fit.weight = 1.0 - fit.weight;
        fit.responsibilities.swap_columns(0, 1);
    }
    fit
}

/// MAP allocation: `true` (adverse) iff the adverse responsibility exceeds 0.5.
pub fn map_allocate(fit: &MixtureFit) -> Vec<bool> {
    fit.responsibilities
        .column(0)
        .iter()
        .map(|&r| r > 0.5)
        .collect()
}
