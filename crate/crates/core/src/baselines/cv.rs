use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::baselines::logistic::binomial_deviance;
use crate::baselines::penalized::{lambda_grid, logit_penalized, PenalizedOptions, PenalizedPath};
use crate::error::{AsprError, Result};
use crate::rng::RngStream;

const MAX_FOLD_ATTEMPTS: u64 = 5;

#[derive(Debug, Clone)]
pub struct CvResult {
    pub lambdas: Vec<f64>,
    /// Mean held-out deviance per observation, per grid point.
    pub cv_deviance: Vec<f64>,
    pub best: usize,
    /// Full-data path with `selected` set to `best`.
    pub path: PenalizedPath,
}

impl CvResult {
    pub fn lambda(&self) -> f64 {
        self.lambdas[self.best]
    }
}

/// Fold labels that spread cases and controls evenly, shuffled by `rng`.
pub fn stratified_folds(z: &[bool], folds: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut cases: Vec<usize> = (0..z.len()).filter(|&i| z[i]).collect();
    let mut controls: Vec<usize> = (0..z.len()).filter(|&i| !z[i]).collect();
    cases.shuffle(rng);
    controls.shuffle(rng);
    let mut fold = vec![0; z.len()];
    // controls continue the rotation where the cases stopped
    for (k, &i) in cases.iter().chain(controls.iter()).enumerate() {
        fold[i] = k % folds;
    }
    fold
}

fn rows(x: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), x.ncols(), |r, c| x[(idx[r], c)])
}

/// Chooses `lambda` by `folds`-fold cross-validation on held-out binomial
/// deviance, then refits the whole path on all data.
pub fn cv_select_lambda(
    z: &[bool],
    x: &DMatrix<f64>,
    opts: &PenalizedOptions,
    folds: usize,
    rng: &RngStream,
) -> Result<CvResult> {
    let n = z.len();
    if folds < 2 || n < folds {
        return Err(AsprError::CrossValidation(format!(
            "need 2 <= folds <= n, got {folds} folds for n = {n}"
        )));
    }
    let lambdas = lambda_grid(z, x, opts);
    let mut assignment = None;
    for attempt in 0..MAX_FOLD_ATTEMPTS {
        let mut frng = rng.split(attempt);
        let f = stratified_folds(z, folds, &mut frng);
        let ok = (0..folds).all(|k| {
            let train: Vec<bool> = (0..n).filter(|&i| f[i] != k).map(|i| z[i]).collect();
            train.iter().any(|&v| v) && train.iter().any(|&v| !v)
        });
        if ok {
            assignment = Some(f);
            break;
        }
    }
    let fold = assignment.ok_or_else(|| {
        AsprError::CrossValidation(format!(
            "no fold assignment with both classes after {MAX_FOLD_ATTEMPTS} attempts"
        ))
    })?;
    let per_fold: Vec<Result<Vec<f64>>> = (0..folds)
        .into_par_iter()
        .map(|k| {
            let train: Vec<usize> = (0..n).filter(|&i| fold[i] != k).collect();
            let test: Vec<usize> = (0..n).filter(|&i| fold[i] == k).collect();
            let zt: Vec<bool> = train.iter().map(|&i| z[i]).collect();
            let zh: Vec<bool> = test.iter().map(|&i| z[i]).collect();
            let path = logit_penalized(&zt, &rows(x, &train), opts, Some(&lambdas))?;
            let xh = rows(x, &test);
            Ok((0..path.len())
                .map(|l| binomial_deviance(&zh, &path.linear_predictor(l, &xh)))
                .collect())
        })
        .collect();
    let mut total = vec![0.0; lambdas.len()];
    for dev in per_fold {
        for (t, d) in total.iter_mut().zip(dev?) {
            *t += d;
        }
    }
    let cv_deviance: Vec<f64> = total.into_iter().map(|t| t / n as f64).collect();
    // first minimum favours the larger penalty on ties
    let best = cv_deviance
        .iter()
        .enumerate()
        .fold(0, |b, (k, &d)| if d < cv_deviance[b] { k } else { b });
    let mut path = logit_penalized(z, x, opts, Some(&lambdas))?;
    path.selected = Some(best);
    Ok(CvResult {
        lambdas,
        cv_deviance,
        best,
        path,
    })
}
