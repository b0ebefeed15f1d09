use nalgebra::DMatrix;

use crate::dist::logistic;
use crate::error::{AsprError, Result};
use crate::model::chain::PosteriorSamples;
use crate::msp::CoefState;

/// Minimum number of stored draws for [`posterior_summary`].
pub const MIN_SUMMARY_DRAWS: usize = 100;

/// `omega_1(x) = logistic(gamma + x' beta)` for a centered predictor row.
pub fn omega1(x: &[f64], coef: &CoefState) -> f64 {
    let eta = coef.gamma
        + x.iter()
            .zip(coef.beta.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>();
    logistic(eta)
}

/// Linear-interpolation quantile (the common "type 7" definition) of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
    pub q975: f64,
}

impl SummaryRow {
    pub fn from_draws(name: impl Into<String>, draws: &[f64]) -> SummaryRow {
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = if draws.len() > 1 {
            draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let mut sorted = draws.to_vec();
        sorted.sort_by(f64::total_cmp);
        let q = |p| quantile_sorted(&sorted, p);
        SummaryRow {
            name: name.into(),
            mean,
            sd: var.sqrt(),
            q025: q(0.025),
            q05: q(0.05),
            q50: q(0.5),
            q95: q(0.95),
            q975: q(0.975),
        }
    }

    /// 90% interval excludes zero.
    pub fn selected_90(&self) -> bool {
        self.q05 > 0.0 || self.q95 < 0.0
    }

    pub fn width_90(&self) -> f64 {
        self.q95 - self.q05
    }
}

/// Column names and values of every scalar parameter, one row per draw.
/// Components are numbered from 1 with 1 the adverse component; covariance
/// entries are listed for `k <= l`.
pub fn parameter_table(samples: &PosteriorSamples) -> (Vec<String>, DMatrix<f64>) {
    let s = samples.s();
    let mut names = Vec::new();
    for h in 1..=2 {
        for k in 1..=s {
            names.push(format!("theta[{h}][{k}]"));
        }
        for k in 1..=s {
            for l in k..=s {
                names.push(format!("Sigma[{h}][{k}][{l}]"));
            }
        }
    }
    names.push("gamma".into());
    names.push("omega1_bar".into());
    for name in &samples.predictor_names {
        names.push(format!("beta[{name}]"));
    }
    let g = samples.n_draws();
    let mut table = DMatrix::zeros(g, names.len());
    for d in 0..g {
        let mut col = 0;
        for comp in &samples.components[d] {
            for k in 0..s {
                table[(d, col)] = comp.mean[k];
                col += 1;
            }
            for k in 0..s {
                for l in k..s {
                    table[(d, col)] = comp.cov.matrix()[(k, l)];
                    col += 1;
                }
            }
        }
        table[(d, col)] = samples.gamma[d];
        table[(d, col + 1)] = samples.omega1_bar[d];
        col += 2;
        for j in 0..samples.p() {
            table[(d, col + j)] = samples.beta[(d, j)];
        }
    }
    (names, table)
}

pub fn posterior_summary(samples: &PosteriorSamples) -> Result<Vec<SummaryRow>> {
    if samples.n_draws() < MIN_SUMMARY_DRAWS {
        return Err(AsprError::param(format!(
            "posterior summaries need at least {MIN_SUMMARY_DRAWS} draws, have {}",
            samples.n_draws()
        )));
    }
    let (names, table) = parameter_table(samples);
    Ok(names
        .into_iter()
        .enumerate()
        .map(|(c, name)| {
            let col: Vec<f64> = table.column(c).iter().copied().collect();
            SummaryRow::from_draws(name, &col)
        })
        .collect())
}

/// Summary rows for the coefficients only, without the draw-count check.
pub fn coefficient_summary(samples: &PosteriorSamples) -> Vec<SummaryRow> {
    (0..samples.p())
        .map(|j| {
            let col: Vec<f64> = samples.beta.column(j).iter().copied().collect();
            SummaryRow::from_draws(samples.predictor_names[j].clone(), &col)
        })
        .collect()
}

/// Fraction of stored draws with `|beta_j| > eps`.
pub fn effect_probability(samples: &PosteriorSamples, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(AsprError::param("effect threshold must be positive"));
    }
    let g = samples.n_draws().max(1) as f64;
    Ok((0..samples.p())
        .map(|j| {
            samples
                .beta
                .column(j)
                .iter()
                .filter(|b| b.abs() > eps)
                .count() as f64
                / g
        })
        .collect())
}

/// Posterior probability that each subject belongs to the healthy component.
pub fn allocation_probability(samples: &PosteriorSamples) -> Result<Vec<f64>> {
    let first = samples
        .z
        .first()
        .ok_or_else(|| AsprError::param("samples hold no allocation draws"))?;
    let n = first.len();
    let g = samples.z.len() as f64;
    let mut healthy = vec![0.0; n];
    for draw in &samples.z {
        for (i, &z) in draw.iter().enumerate() {
            if !z {
                healthy[i] += 1.0;
            }
        }
    }
    Ok(healthy.into_iter().map(|c| c / g).collect())
}

/// Posterior predictive density of the outcomes at each row of `grid`,
/// averaging `w N(y | theta_1, Sigma_1) + (1 - w) N(y | theta_2, Sigma_2)`
/// over draws with `w` the draw's mean adverse weight.
pub fn posterior_predictive_density(
    samples: &PosteriorSamples,
    grid: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    if samples.n_draws() == 0 {
        return Err(AsprError::param("no stored draws"));
    }
    if grid.ncols() != samples.s() {
        return Err(AsprError::dim(format!(
            "grid has {} columns, outcomes {}",
            grid.ncols(),
            samples.s()
        )));
    }
    let g = samples.n_draws() as f64;
    let mut out = vec![0.0; grid.nrows()];
    for (d, comps) in samples.components.iter().enumerate() {
        let w = samples.omega1_bar[d];
        for (m, o) in out.iter_mut().enumerate() {
            let y: Vec<f64> = grid.row(m).iter().copied().collect();
            *o += w * comps[0].logpdf(&y).exp() + (1.0 - w) * comps[1].logpdf(&y).exp();
        }
    }
    Ok(out.into_iter().map(|v| v / g).collect())
}
