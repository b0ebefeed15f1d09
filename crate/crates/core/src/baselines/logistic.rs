use nalgebra::{DMatrix, DVector};

use crate::dist::{logistic, normal_quantile};
use crate::error::{AsprError, Result};

const MAX_ITER: usize = 100;
const GRAD_TOL: f64 = 1e-8;
/// Beyond this magnitude a coefficient is treated as diverging.
const DIVERGENCE: f64 = 25.0;

/// Unpenalized logistic regression with Wald intervals. Index 0 of
/// `estimates` is the intercept.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub estimates: DVector<f64>,
    pub std_errors: DVector<f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    pub level: f64,
    pub converged: bool,
    /// Complete or quasi-complete separation detected; intervals are unreliable.
    pub separated: bool,
    pub n_iter: usize,
    pub deviance: f64,
}

impl LogisticFit {
    pub fn intercept(&self) -> f64 {
        self.estimates[0]
    }

    pub fn coefficients(&self) -> DVector<f64> {
        self.estimates
            .rows(1, self.estimates.len() - 1)
            .into_owned()
    }

    /// Coefficients whose interval excludes zero.
    pub fn selected(&self) -> Vec<bool> {
        (1..self.estimates.len())
            .map(|j| self.lower[j] > 0.0 || self.upper[j] < 0.0)
            .collect()
    }

    pub fn interval_widths(&self) -> Vec<f64> {
        (1..self.estimates.len())
            .map(|j| self.upper[j] - self.lower[j])
            .collect()
    }
}

pub(crate) fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::from_element(x.nrows(), x.ncols() + 1, 1.0);
    d.columns_mut(1, x.ncols()).copy_from(x);
    d
}

/// Binomial deviance `-2 log L` for labels `z` and linear predictor `eta`.
pub fn binomial_deviance(z: &[bool], eta: &DVector<f64>) -> f64 {
    // log(1 + e^eta) computed stably
    let softplus = |e: f64| {
        if e > 0.0 {
            e + (-e).exp().ln_1p()
        } else {
            e.exp().ln_1p()
        }
    };
    2.0 * z
        .iter()
        .zip(eta.iter())
        .map(|(&zi, &e)| softplus(e) - if zi { e } else { 0.0 })
        .sum::<f64>()
}

pub(crate) fn labels(z: &[bool]) -> DVector<f64> {
    DVector::from_iterator(z.len(), z.iter().map(|&b| if b { 1.0 } else { 0.0 }))
}

/// Fits by Newton-Raphson (iteratively reweighted least squares) with step
/// halving, stopping when the score norm drops below 1e-8.
pub fn logit_mle(z: &[bool], x: &DMatrix<f64>, level: f64) -> Result<LogisticFit> {
    let n = x.nrows();
    if z.len() != n {
        return Err(AsprError::dim("labels and design rows differ"));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(AsprError::param("interval level must lie in (0, 1)"));
    }
    let d = with_intercept(x);
    let k = d.ncols();
    let yv = labels(z);
    let mean = yv.mean();
    let mut coef = DVector::zeros(k);
    if mean > 0.0 && mean < 1.0 {
        coef[0] = (mean / (1.0 - mean)).ln();
    }
    let mut eta = &d * &coef;
    let mut dev = binomial_deviance(z, &eta);
    let mut converged = false;
    let mut separated = mean == 0.0 || mean == 1.0;
    let mut n_iter = 0;
    let mut info = DMatrix::identity(k, k);
    while n_iter < MAX_ITER && !separated {
        n_iter += 1;
        let p = eta.map(logistic);
        let w = p.map(|pi| pi * (1.0 - pi));
        let score = d.tr_mul(&(&yv - &p));
        let mut dw = d.clone();
        for i in 0..n {
            dw.row_mut(i).scale_mut(w[i]);
        }
        info = d.tr_mul(&dw);
        if score.norm() < GRAD_TOL {
            converged = true;
            break;
        }
        let step = match info.clone().cholesky() {
            Some(c) => c.solve(&score),
            None => {
                separated = true;
                break;
            }
        };
        let mut t = 1.0;
        loop {
            let trial = &coef + &step * t;
            let e = &d * &trial;
            let dv = binomial_deviance(z, &e);
            if dv <= dev + 1e-12 * dev.abs().max(1.0) || t < 1e-10 {
                coef = trial;
                eta = e;
                dev = dv;
                break;
            }
            t *= 0.5;
        }
        if coef.iter().any(|c| c.abs() > DIVERGENCE) {
            separated = true;
        }
    }
    let p = eta.map(logistic);
    if p.iter().all(|&pi| !(1e-8..=1.0 - 1e-8).contains(&pi)) {
        separated = true;
    }
    let cov = info.clone().cholesky().map(|c| c.inverse());
    let std_errors = match &cov {
        Some(c) if !separated => DVector::from_fn(k, |j, _| c[(j, j)].sqrt()),
        _ => DVector::from_element(k, f64::INFINITY),
    };
    let zq = normal_quantile(0.5 + level / 2.0);
    let lower = &coef - &std_errors * zq;
    let upper = &coef + &std_errors * zq;
    Ok(LogisticFit {
        estimates: coef,
        std_errors,
        lower,
        upper,
        level,
        converged,
        separated,
        n_iter,
        deviance: dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intercept_only_is_logit_of_mean() {
        let z = vec![true, false, false, false, true, false, false, false];
        let fit = logit_mle(&z, &DMatrix::zeros(8, 0), 0.9).unwrap();
        assert!(fit.converged);
        assert!((fit.intercept() - (0.25f64 / 0.75).ln()).abs() < 1e-10);
    }

    #[test]
    fn two_by_two_table_gives_log_odds_ratio() {
        // exposed: 30 cases / 20 controls; unexposed: 10 cases / 40 controls
        let mut z = Vec::new();
        let mut x = Vec::new();
        for (xv, cases, controls) in [(1.0, 30, 20), (0.0, 10, 40)] {
            for k in 0..cases + controls {
                z.push(k < cases);
                x.push(xv);
            }
        }
        let fit = logit_mle(&z, &DMatrix::from_vec(z.len(), 1, x), 0.95).unwrap();
        let lor = ((30.0 * 40.0) / (20.0 * 10.0f64)).ln();
        assert!((fit.estimates[1] - lor).abs() < 1e-8);
        // Woolf standard error
        let se = (1.0 / 30.0 + 1.0 / 20.0 + 1.0 / 10.0 + 1.0 / 40.0f64).sqrt();
        assert!((fit.std_errors[1] - se).abs() < 1e-6);
        assert!(fit.selected()[0]);
    }

    #[test]
    fn separation_is_flagged() {
        let z = vec![false, false, false, true, true, true];
        let x = DMatrix::from_vec(6, 1, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let fit = logit_mle(&z, &x, 0.9).unwrap();
        assert!(fit.separated);
        assert!(fit.std_errors[1].is_infinite());
    }

    #[test]
    fn deviance_is_stable_for_extreme_eta() {
        let d = binomial_deviance(&[true, false], &DVector::from_row_slice(&[800.0, -800.0]));
        assert!(d.abs() < 1e-12);
    }
}
