//! Elastic-net penalized logistic regression by cyclical coordinate descent.
//!
//! Minimizes `-(1/n) loglik + lambda * ((1 - a)/2 |b|^2 + a |b|_1)` over the
//! standardized predictors. Each outer step forms the quadratic (IRLS)
//! approximation at the current fit and solves the penalized weighted least
//! squares problem by soft-thresholding coordinate updates, cycling over the
//! active set until it stabilizes. Solutions along a decreasing `lambda`
//! grid are warm-started from the previous one.

use nalgebra::{DMatrix, DVector};

use crate::baselines::logistic::{binomial_deviance, labels};
use crate::dist::logistic;
use crate::error::{AsprError, Result};

const MIN_WEIGHT: f64 = 1e-5;
const MAX_OUTER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedOptions {
    /// Elastic-net mixing: 1 is the lasso.
    pub a: f64,
    pub n_lambda: usize,
    /// Smallest grid value as a fraction of `lambda_max`.
    pub min_ratio: f64,
    /// Convergence threshold on the largest coefficient change.
    pub tol: f64,
    /// Cap on coordinate passes per outer step.
    pub max_passes: usize,
}

impl Default for PenalizedOptions {
    fn default() -> Self {
        PenalizedOptions {
            a: 1.0,
            n_lambda: 100,
            min_ratio: 1e-4,
            tol: 1e-7,
            max_passes: 100_000,
        }
    }
}

impl PenalizedOptions {
    pub fn lasso() -> Self {
        Self::default()
    }

    pub fn elastic_net(a: f64) -> Self {
        PenalizedOptions {
            a,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a <= 1.0) {
            return Err(AsprError::param(format!(
                "mixing parameter must lie in (0, 1], got {}",
                self.a
            )));
        }
        if self.n_lambda == 0
            || !(self.min_ratio > 0.0 && self.min_ratio < 1.0)
            || !(self.tol > 0.0)
        {
            return Err(AsprError::param("invalid lambda grid or tolerance"));
        }
        Ok(())
    }
}

/// Column means and `1/n` standard deviations; constant columns get scale 0.
#[derive(Debug, Clone)]
pub struct Standardizer {
    pub center: DVector<f64>,
    pub scale: DVector<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows() as f64;
        let center = DVector::from_fn(x.ncols(), |j, _| x.column(j).sum() / n);
        let scale = DVector::from_fn(x.ncols(), |j, _| {
            let v = x
                .column(j)
                .iter()
                .map(|v| (v - center[j]).powi(2))
                .sum::<f64>()
                / n;
            if v > 1e-24 {
                v.sqrt()
            } else {
                0.0
            }
        });
        Standardizer { center, scale }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            if self.scale[j] > 0.0 {
                (x[(i, j)] - self.center[j]) / self.scale[j]
            } else {
                0.0
            }
        })
    }
}

/// Fitted path. Coefficients are on the original predictor scale; the
/// standardized-scale fit is kept for diagnostics.
#[derive(Debug, Clone)]
pub struct PenalizedPath {
    pub a: f64,
    pub lambdas: Vec<f64>,
    pub intercepts: Vec<f64>,
    /// `n_lambda x p`.
    pub coefficients: DMatrix<f64>,
    pub std_intercepts: Vec<f64>,
    pub std_coefficients: DMatrix<f64>,
    pub deviance: Vec<f64>,
    pub converged: Vec<bool>,
    pub standardizer: Standardizer,
    pub selected: Option<usize>,
}

impl PenalizedPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn coef_at(&self, k: usize) -> DVector<f64> {
        self.coefficients.row(k).transpose()
    }

    pub fn linear_predictor(&self, k: usize, x: &DMatrix<f64>) -> DVector<f64> {
        let mut eta = x * self.coef_at(k);
        eta.add_scalar_mut(self.intercepts[k]);
        eta
    }

    /// Largest violation of the optimality conditions at grid point `k`,
    /// measured on the standardized scale.
    pub fn kkt_violation(&self, k: usize, z: &[bool], x: &DMatrix<f64>) -> f64 {
        let xs = self.standardizer.apply(x);
        let n = x.nrows() as f64;
        let lam = self.lambdas[k];
        let mut eta = &xs * self.std_coefficients.row(k).transpose();
        eta.add_scalar_mut(self.std_intercepts[k]);
        let resid = labels(z) - eta.map(logistic);
        let mut worst = (resid.sum() / n).abs();
        for j in 0..x.ncols() {
            if self.standardizer.scale[j] == 0.0 {
                continue;
            }
            let grad = xs.column(j).dot(&resid) / n;
            let b = self.std_coefficients[(k, j)];
            let v = if b == 0.0 {
                (grad.abs() - self.a * lam).max(0.0)
            } else {
                (grad - lam * (1.0 - self.a) * b - self.a * lam * b.signum()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }
}

/// Smallest `lambda` at which every coefficient is zero, nudged up by a
/// relative 1e-10 so rounding cannot leave the top coordinate active.
pub fn lambda_max(z: &[bool], xs: &DMatrix<f64>, a: f64) -> f64 {
    let y = labels(z);
    let ybar = y.mean();
    let n = xs.nrows() as f64;
    let g = (0..xs.ncols())
        .map(|j| (xs.column(j).dot(&y.add_scalar(-ybar)) / n).abs())
        .fold(0.0, f64::max);
    g / a * (1.0 + 1e-10)
}

/// `n_lambda` log-spaced values from `lambda_max` down to `min_ratio * lambda_max`.
pub fn lambda_grid(z: &[bool], x: &DMatrix<f64>, opts: &PenalizedOptions) -> Vec<f64> {
    let xs = Standardizer::fit(x).apply(x);
    let top = lambda_max(z, &xs, opts.a).max(1e-12);
    if opts.n_lambda == 1 {
        return vec![top];
    }
    let step = opts.min_ratio.ln() / (opts.n_lambda - 1) as f64;
    (0..opts.n_lambda)
        .map(|k| top * (step * k as f64).exp())
        .collect()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

struct Solver<'a> {
    xs: &'a DMatrix<f64>,
    y: DVector<f64>,
    active_cols: Vec<usize>,
    opts: &'a PenalizedOptions,
}

impl Solver<'_> {
    /// Solves at one `lambda` in place; returns whether it converged.
    fn solve(&self, lam: f64, b0: &mut f64, b: &mut DVector<f64>) -> bool {
        for _ in 0..MAX_OUTER {
            let start = (*b0, b.clone());
            if !self.outer_step(lam, b0, b, self.opts.max_passes) {
                return false;
            }
            let outer_change = (&*b - &start.1).amax().max((*b0 - start.0).abs());
            if outer_change < self.opts.tol {
                return true;
            }
        }
        false
    }

    /// One quadratic approximation solved by at most `max_passes` coordinate
    /// passes; returns whether the inner problem converged.
    fn outer_step(&self, lam: f64, b0: &mut f64, b: &mut DVector<f64>, max_passes: usize) -> bool {
        let n = self.xs.nrows();
        let nf = n as f64;
        let (l1, l2) = (lam * self.opts.a, lam * (1.0 - self.opts.a));
        let mut eta = self.xs * &*b;
        eta.add_scalar_mut(*b0);
        let p = eta.map(logistic);
        let w = p.map(|pi| (pi * (1.0 - pi)).max(MIN_WEIGHT));
        // working residual: working response minus current fit
        let mut r = DVector::from_fn(n, |i, _| (self.y[i] - p[i]) / w[i]);
        let v: Vec<f64> = (0..self.xs.ncols())
            .map(|j| {
                self.xs
                    .column(j)
                    .iter()
                    .zip(w.iter())
                    .map(|(x, wi)| wi * x * x)
                    .sum::<f64>()
                    / nf
            })
            .collect();
        let wsum = w.sum();
        let mut passes = 0;
        let mut full = true;
        loop {
            passes += 1;
            let mut change = 0.0f64;
            let d0 = w.dot(&r) / wsum;
            *b0 += d0;
            r.add_scalar_mut(-d0);
            change = change.max(d0.abs());
            for &j in &self.active_cols {
                let old = b[j];
                if !full && old == 0.0 {
                    continue;
                }
                let col = self.xs.column(j);
                let g = col
                    .iter()
                    .zip(w.iter())
                    .zip(r.iter())
                    .map(|((x, wi), ri)| x * wi * ri)
                    .sum::<f64>()
                    / nf
                    + v[j] * old;
                let new = soft_threshold(g, l1) / (v[j] + l2);
                if new != old {
                    r.axpy(-(new - old), &col, 1.0);
                    b[j] = new;
                    change = change.max((new - old).abs() * v[j].sqrt());
                }
            }
            if change < self.opts.tol {
                if full {
                    break;
                }
                full = true;
            } else {
                full = false;
            }
            if passes >= max_passes {
                return false;
            }
        }
        true
    }
}

/// Fits the path on `grid`, or on [`lambda_grid`] when `grid` is `None`.
pub fn logit_penalized(
    z: &[bool],
    x: &DMatrix<f64>,
    opts: &PenalizedOptions,
    grid: Option<&[f64]>,
) -> Result<PenalizedPath> {
    opts.validate()?;
    if z.len() != x.nrows() {
        return Err(AsprError::dim("labels and design rows differ"));
    }
    let cases = z.iter().filter(|&&v| v).count();
    if cases == 0 || cases == z.len() {
        return Err(AsprError::Data(
            "penalized logistic fit needs both classes".into(),
        ));
    }
    let lambdas: Vec<f64> = match grid {
        Some(g) => {
            if g.iter().any(|l| !(*l >= 0.0)) || g.windows(2).any(|w| w[1] > w[0]) {
                return Err(AsprError::param(
                    "lambda grid must be nonnegative and decreasing",
                ));
            }
            g.to_vec()
        }
        None => lambda_grid(z, x, opts),
    };
    let std = Standardizer::fit(x);
    let xs = std.apply(x);
    let p = x.ncols();
    let solver = Solver {
        xs: &xs,
        y: labels(z),
        active_cols: (0..p).filter(|&j| std.scale[j] > 0.0).collect(),
        opts,
    };
    let ybar = cases as f64 / z.len() as f64;
    let mut b0 = (ybar / (1.0 - ybar)).ln();
    let mut b = DVector::zeros(p);
    let m = lambdas.len();
    let mut path = PenalizedPath {
        a: opts.a,
        lambdas: lambdas.clone(),
        intercepts: vec![0.0; m],
        coefficients: DMatrix::zeros(m, p),
        std_intercepts: vec![0.0; m],
        std_coefficients: DMatrix::zeros(m, p),
        deviance: vec![0.0; m],
        converged: vec![false; m],
        standardizer: std.clone(),
        selected: None,
    };
    for (k, &lam) in lambdas.iter().enumerate() {
        let ok = solver.solve(lam, &mut b0, &mut b);
        if !ok {
            log::warn!("coordinate descent did not converge at lambda = {lam:e}");
        }
        path.converged[k] = ok;
        path.std_intercepts[k] = b0;
        path.std_coefficients.row_mut(k).copy_from(&b.transpose());
        let orig = DVector::from_fn(p, |j, _| {
            if std.scale[j] > 0.0 {
                b[j] / std.scale[j]
            } else {
                0.0
            }
        });
        path.intercepts[k] = b0 - orig.dot(&std.center);
        path.coefficients.row_mut(k).copy_from(&orig.transpose());
        let mut eta = &xs * &b;
        eta.add_scalar_mut(b0);
        path.deviance[k] = binomial_deviance(z, &eta);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::logistic::logit_mle;
    use crate::rng::RngStream;
    use rand::Rng;

    fn problem(n: usize, p: usize, seed: u64) -> (Vec<bool>, DMatrix<f64>) {
        let mut rng = RngStream::new(seed, 0);
        let x = DMatrix::from_fn(n, p, |_, _| crate::dist::std_normal(&mut rng));
        let z = (0..n)
            .map(|i| {
                let eta = -0.5 + x[(i, 0)] - 0.7 * x[(i, 1 % p)];
                rng.random::<f64>() < logistic(eta)
            })
            .collect();
        (z, x)
    }

    #[test]
    fn lambda_max_zeroes_everything() {
        let (z, x) = problem(200, 6, 1);
        let path = logit_penalized(
            &z,
            &x,
            &PenalizedOptions {
                n_lambda: 20,
                ..Default::default()
            },
            None,
        )
        .unwrap();
        assert!(path.coef_at(0).iter().all(|&b| b == 0.0));
        let ybar = z.iter().filter(|&&v| v).count() as f64 / 200.0;
        assert!((path.intercepts[0] - (ybar / (1.0 - ybar)).ln()).abs() < 1e-6);
        assert!(path.coef_at(19).iter().any(|&b| b != 0.0));
    }

    #[test]
    fn kkt_holds_along_path() {
        for (seed, a) in [(2, 1.0), (3, 0.5)] {
            let (z, x) = problem(150, 8, seed);
            let opts = PenalizedOptions {
                a,
                n_lambda: 30,
                ..Default::default()
            };
            let path = logit_penalized(&z, &x, &opts, None).unwrap();
            for k in 0..path.len() {
                assert!(path.converged[k]);
                let v = path.kkt_violation(k, &z, &x);
                assert!(v < 1e-6, "a = {a}, k = {k}: {v}");
            }
            // deviance falls as the penalty relaxes
            assert!(path.deviance.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        }
    }

    #[test]
    fn zero_penalty_recovers_mle() {
        let (z, x) = problem(500, 10, 4);
        let mle = logit_mle(&z, &x, 0.9).unwrap();
        let opts = PenalizedOptions {
            tol: 1e-10,
            ..Default::default()
        };
        let path = logit_penalized(&z, &x, &opts, Some(&[0.0])).unwrap();
        assert!((path.intercepts[0] - mle.intercept()).abs() < 1e-6);
        assert!((path.coef_at(0) - mle.coefficients()).amax() < 1e-6);
    }

    #[test]
    fn orthonormal_single_step_matches_soft_threshold() {
        // columns of a 8 x 8 Hadamard matrix: mean zero, unit 1/n variance, orthogonal
        let h = |i: usize, j: usize| {
            if (i & j).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            }
        };
        let xs = DMatrix::from_fn(8, 3, |i, j| h(i, j + 1));
        let z = vec![true, true, false, true, false, false, false, false];
        let (lam, a) = (0.02, 0.5);
        let opts = PenalizedOptions {
            a,
            ..Default::default()
        };
        let solver = Solver {
            xs: &xs,
            y: labels(&z),
            active_cols: vec![0, 1, 2],
            opts: &opts,
        };
        let ybar = 3.0 / 8.0;
        let mut b0 = (ybar / (1.0f64 - ybar)).ln();
        let mut b = DVector::zeros(3);
        solver.outer_step(lam, &mut b0, &mut b, 1);
        let w = ybar * (1.0 - ybar);
        for j in 0..3 {
            let g: f64 = (0..8)
                .map(|i| xs[(i, j)] * (if z[i] { 1.0 } else { 0.0 } - ybar))
                .sum::<f64>()
                / 8.0;
            let expect = soft_threshold(g, lam * a) / (w + lam * (1.0 - a));
            assert!((b[j] - expect).abs() < 1e-14, "{j}: {} vs {expect}", b[j]);
        }
        assert_eq!(soft_threshold(0.05, 0.1), 0.0);
    }
}
