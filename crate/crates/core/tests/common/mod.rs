#![allow(dead_code)]

use aspr::dist::mvn_sample;
use aspr::em::ComponentParams;
use aspr::model::AsprData;
use aspr::{RngStream, SpdMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn component(mean: &[f64], cov: &[f64]) -> ComponentParams {
    let s = mean.len();
    ComponentParams::new(
        DVector::from_row_slice(mean),
        SpdMatrix::from_row_slice(s, cov).unwrap(),
    )
    .unwrap()
}

/// Outcomes from a two-component mixture with adverse weight `w`, and
/// binary predictors with frequency 0.3. Returns the data and true labels.
pub fn mixture_data(
    n: usize,
    p: usize,
    w: f64,
    comps: &[ComponentParams; 2],
    seed: u64,
) -> (AsprData, Vec<bool>) {
    let mut rng = RngStream::new(seed, 77);
    let x = DMatrix::from_fn(
        n,
        p,
        |_, _| if rng.random::<f64>() < 0.3 { 1.0 } else { 0.0 },
    );
    let s = comps[0].dim();
    let mut y = DMatrix::zeros(n, s);
    let mut z = Vec::with_capacity(n);
    for i in 0..n {
        let adverse = rng.random::<f64>() < w;
        let c = &comps[if adverse { 0 } else { 1 }];
        y.row_mut(i)
            .copy_from(&mvn_sample(&c.mean, &c.cov, &mut rng).unwrap().transpose());
        z.push(adverse);
    }
    (AsprData::from_matrices(y, x).unwrap(), z)
}

pub fn separated_pair() -> [ComponentParams; 2] {
    [
        component(&[-3.0, -3.0], &[1.0, 0.3, 0.3, 1.0]),
        component(&[1.0, 1.0], &[1.0, 0.0, 0.0, 1.0]),
    ]
}

pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
