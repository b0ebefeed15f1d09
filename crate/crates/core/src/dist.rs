//! Random variates and log-densities used by the samplers.
//!
//! Conventions used throughout the crate:
//! - `Gamma(a, b)` has shape `a` and *scale* `b` (mean `a * b`).
//! - The double exponential `DE(mu, tau)` uses rate `tau`:
//!   density `(tau / 2) * exp(-tau * |x - mu|)`.
//! - The inverse-Wishart `IW(df, Psi)` has mean `Psi / (df - s - 1)`.

use std::f64::consts::{LN_2, PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{AsprError, Result};
use crate::linalg::SpdMatrix;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Standardized bound above which the truncated normal switches from the
/// inverse CDF to exponential rejection.
pub const TAIL_SWITCH: f64 = 4.0;

pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `1 - Phi(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Numerically stable `exp(x) / (1 + exp(x))`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Draws an index with probabilities proportional to `exp(log_weights)`.
pub fn categorical_log<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> usize {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        // nothing finite to normalize against
        return rng.random_range(0..log_weights.len());
    }
    let weights: Vec<f64> = log_weights.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            return k;
        }
        u -= w;
    }
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

pub fn mvn_sample<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    cov: &SpdMatrix,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if mean.len() != cov.dim() {
        return Err(AsprError::dim(format!(
            "mean has length {}, covariance is {}x{}",
            mean.len(),
            cov.dim(),
            cov.dim()
        )));
    }
    let z = DVector::from_fn(mean.len(), |_, _| std_normal(rng));
    Ok(mean + cov.cholesky_factor() * z)
}

pub fn mvn_logpdf(y: &DVector<f64>, mean: &DVector<f64>, cov: &SpdMatrix) -> Result<f64> {
    if y.len() != mean.len() || y.len() != cov.dim() {
        return Err(AsprError::dim(format!(
            "y has length {}, mean {}, covariance dimension {}",
            y.len(),
            mean.len(),
            cov.dim()
        )));
    }
    Ok(mvn_logpdf_unchecked(y.as_slice(), mean.as_slice(), cov))
}

/// Log-density without dimension checks; `y` and `mean` must have length `cov.dim()`.
pub(crate) fn mvn_logpdf_unchecked(y: &[f64], mean: &[f64], cov: &SpdMatrix) -> f64 {
    let s = cov.dim();
    let l = cov.cholesky_factor();
    // forward substitution for L w = y - mean
    let mut w = [0.0_f64; 8];
    let mut heap;
    let w: &mut [f64] = if s <= 8 {
        &mut w[..s]
    } else {
        heap = vec![0.0; s];
        &mut heap
    };
    let mut quad = 0.0;
    for i in 0..s {
        let mut acc = y[i] - mean[i];
        for k in 0..i {
            acc -= l[(i, k)] * w[k];
        }
        w[i] = acc / l[(i, i)];
        quad += w[i] * w[i];
    }
    -0.5 * (s as f64 * LN_2PI + cov.log_det() + quad)
}

pub fn gamma_sample<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
        return Err(AsprError::param(format!(
            "gamma requires positive shape and scale, got ({shape}, {scale})"
        )));
    }
    let g = Gamma::new(shape, scale).map_err(|e| AsprError::param(e.to_string()))?;
    Ok(g.sample(rng))
}

pub fn beta_sample<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let d = Beta::new(a, b).map_err(|e| AsprError::param(format!("beta({a}, {b}): {e}")))?;
    Ok(d.sample(rng))
}

/// Exponential draw with the given rate.
pub fn exp_rate_sample<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Inverse-Wishart draw via the Bartlett decomposition.
///
/// With `Psi = L Lᵀ` and Bartlett factor `A` of a standard Wishart, the draw
/// is `(L A⁻ᵀ)(L A⁻ᵀ)ᵀ`; only the triangular `A` is solved against.
pub fn inv_wishart_sample<R: Rng + ?Sized>(
    df: f64,
    scale: &SpdMatrix,
    rng: &mut R,
) -> Result<SpdMatrix> {
    let s = scale.dim();
    if !(df > s as f64 - 1.0) {
        return Err(AsprError::param(format!(
            "inverse-Wishart needs df > s - 1 = {}, got {df}",
            s as f64 - 1.0
        )));
    }
    let mut a = DMatrix::<f64>::zeros(s, s);
    for i in 0..s {
        let chi2 = gamma_sample((df - i as f64) / 2.0, 2.0, rng)?;
        a[(i, i)] = chi2.sqrt();
        for j in 0..i {
            a[(i, j)] = std_normal(rng);
        }
    }
    // M = L A^{-T}  <=>  M Aᵀ = L  <=>  A Mᵀ = Lᵀ
    let mt = a
        .solve_lower_triangular(&scale.cholesky_factor().transpose())
        .ok_or_else(|| AsprError::param("degenerate Bartlett factor"))?;
    let m = mt.transpose();
    SpdMatrix::new(&m * m.transpose())
}

/// Normal-inverse-Wishart draw: `Sigma ~ IW(rho, sigma0)`, `theta | Sigma ~ N(theta0, Sigma / psi)`.
pub fn niw_sample<R: Rng + ?Sized>(
    theta0: &DVector<f64>,
    psi: f64,
    rho: f64,
    sigma0: &SpdMatrix,
    rng: &mut R,
) -> Result<(DVector<f64>, SpdMatrix)> {
    if !(psi > 0.0) {
        return Err(AsprError::param(format!(
            "NIW concentration must be positive, got {psi}"
        )));
    }
    if theta0.len() != sigma0.dim() {
        return Err(AsprError::dim("NIW location and scale dimensions differ"));
    }
    let sigma = inv_wishart_sample(rho, sigma0, rng)?;
    let z = DVector::from_fn(theta0.len(), |_, _| std_normal(rng));
    let theta = theta0 + sigma.cholesky_factor() * z / psi.sqrt();
    Ok((theta, sigma))
}

/// Which side of `bound` the truncated normal lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Support `(bound, inf)`.
    Below,
    /// Support `(-inf, bound)`.
    Above,
}

/// Standard normal restricted to `(a, inf)`.
fn std_normal_lower_truncated<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a > TAIL_SWITCH {
        // Robert (1995) exponential proposal
        let alpha = 0.5 * (a + (a * a + 4.0).sqrt());
        loop {
            let z = a + exp_rate_sample(alpha, rng);
            let rho = (-0.5 * (z - alpha) * (z - alpha)).exp();
            if rng.random::<f64>() <= rho && z > a {
                return z;
            }
        }
    }
    let tail = normal_sf(a);
    loop {
        let u: f64 = rng.random();
        let p = u * tail;
        if p <= 0.0 {
            continue;
        }
        // P(X > x) = p
        let x = -normal_quantile(p);
        if x > a && x.is_finite() {
            return x;
        }
    }
}

pub fn trunc_normal_sample<R: Rng + ?Sized>(
    mean: f64,
    sd: f64,
    bound: f64,
    side: Truncation,
    rng: &mut R,
) -> f64 {
    debug_assert!(sd > 0.0);
    let a = (bound - mean) / sd;
    loop {
        let x = match side {
            Truncation::Below => mean + sd * std_normal_lower_truncated(a, rng),
            Truncation::Above => mean - sd * std_normal_lower_truncated(-a, rng),
        };
        let inside = match side {
            Truncation::Below => x > bound,
            Truncation::Above => x < bound,
        };
        // rounding in `mean + sd * z` can land exactly on the bound
        if inside {
            return x;
        }
    }
}

/// Inverse Gaussian draw (Michael, Schucany and Haas transform).
pub fn inverse_gaussian_sample<R: Rng + ?Sized>(mu: f64, lambda: f64, rng: &mut R) -> Result<f64> {
    if !(mu > 0.0 && lambda > 0.0 && mu.is_finite() && lambda.is_finite()) {
        return Err(AsprError::param(format!(
            "inverse Gaussian requires positive mean and shape, got ({mu}, {lambda})"
        )));
    }
    let nu = std_normal(rng);
    let y = nu * nu;
    let my = mu * y;
    // larger root first; the smaller one is mu^2 / larger (product of roots)
    let large = mu
        + mu * my / (2.0 * lambda)
        + mu / (2.0 * lambda) * (4.0 * mu * lambda * y + my * my).sqrt();
    let small = mu * (mu / large);
    let u: f64 = rng.random();
    let x = if u <= mu / (mu + small) { small } else { large };
    Ok(x.max(f64::MIN_POSITIVE))
}

/// Double-exponential draw with rate `tau`.
pub fn de_sample<R: Rng + ?Sized>(mu: f64, tau: f64, rng: &mut R) -> f64 {
    let e = exp_rate_sample(tau, rng);
    if rng.random::<bool>() {
        mu + e
    } else {
        mu - e
    }
}

/// Double-exponential log-density with rate `tau`.
pub fn de_logpdf(x: f64, mu: f64, tau: f64) -> f64 {
    tau.ln() - LN_2 - tau * (x - mu).abs()
}
