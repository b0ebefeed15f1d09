use nalgebra::DMatrix;

use crate::dist::{normal_quantile, std_normal};
use crate::error::{AsprError, Result};
use crate::rng::RngStream;

/// Binary carrier indicators with block correlation.
///
/// Column `j` is `1{u_ij > Phi^-1(1 - maf_j)}` where, within a block of
/// `block_size` adjacent columns, `u_ij = sqrt(r) f_i + sqrt(1 - r) e_ij`
/// shares one standard normal factor. Column means therefore equal `maf_j`
/// and within-block dependence grows with `r = block_corr`.
pub fn gen_correlated_snps(
    n: usize,
    maf: &[f64],
    block_corr: f64,
    block_size: usize,
    rng: &mut RngStream,
) -> Result<DMatrix<f64>> {
    if let Some(m) = maf.iter().find(|m| !(**m > 0.0 && **m <= 0.5)) {
        return Err(AsprError::param(format!(
            "carrier frequency {m} outside (0, 0.5]"
        )));
    }
    if !(0.0..1.0).contains(&block_corr) {
        return Err(AsprError::param(format!(
            "block correlation {block_corr} outside [0, 1)"
        )));
    }
    if block_size == 0 {
        return Err(AsprError::param("block size must be positive"));
    }
    let p = maf.len();
    let thresholds: Vec<f64> = maf.iter().map(|m| normal_quantile(1.0 - m)).collect();
    let (a, b) = (block_corr.sqrt(), (1.0 - block_corr).sqrt());
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut factor = 0.0;
        for j in 0..p {
            if j % block_size == 0 {
                factor = std_normal(rng);
            }
            let u = a * factor + b * std_normal(rng);
            x[(i, j)] = if u > thresholds[j] { 1.0 } else { 0.0 };
        }
    }
    Ok(x)
}
