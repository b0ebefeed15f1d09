use std::path::PathBuf;

use nalgebra::DVector;

use crate::baselines::Combine;
use crate::em::ComponentParams;
use crate::error::{AsprError, Result};
use crate::linalg::SpdMatrix;

/// Where the fixed predictor matrix of a study comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictorSource {
    /// Block-correlated binary carriers with frequencies drawn uniformly
    /// from `[maf_min, maf_max]`.
    Synthetic {
        maf_min: f64,
        maf_max: f64,
        block_corr: f64,
        block_size: usize,
    },
    /// A numeric CSV with a header row.
    File(PathBuf),
}

/// A simulation design. Predictors are generated once and held fixed across
/// replicates; outcomes and labels are redrawn per replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign {
    pub n: usize,
    pub p: usize,
    pub nonnull_count: usize,
    pub nonnull_value: f64,
    /// Mean adverse probability the intercept is solved for.
    pub target_fraction: f64,
    /// Adverse component first.
    pub components: [ComponentParams; 2],
    pub outcome_names: Vec<String>,
    pub predictors: PredictorSource,
    pub replicates: usize,
    pub seed: u64,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub cutoffs: String,
    pub combine: Combine,
    pub enet_a: f64,
    pub folds: usize,
    pub roc_points: usize,
}

/// Posterior means of the two components in the birth-outcome application
/// (gestational age in days, birth weight in grams), adverse first.
pub fn reference_components() -> [ComponentParams; 2] {
    let adverse = ComponentParams {
        mean: DVector::from_row_slice(&[237.52, 2001.55]),
        cov: SpdMatrix::from_row_slice(2, &[829.19, 19322.84, 19322.84, 508531.02]).expect("SPD"),
    };
    let healthy = ComponentParams {
        mean: DVector::from_row_slice(&[273.25, 3182.41]),
        cov: SpdMatrix::from_row_slice(2, &[96.78, 2174.75, 2174.75, 235640.32]).expect("SPD"),
    };
    [adverse, healthy]
}

impl Default for SimDesign {
    fn default() -> Self {
        SimDesign {
            n: 813,
            p: 100,
            nonnull_count: 10,
            nonnull_value: 0.8,
            target_fraction: 0.1,
            components: reference_components(),
            outcome_names: vec!["gest".into(), "bw".into()],
            predictors: PredictorSource::Synthetic {
                maf_min: 0.1,
                maf_max: 0.5,
                block_corr: 0.3,
                block_size: 5,
            },
            replicates: 100,
            seed: 1,
            n_iter: 11_000,
            burn_in: 1_000,
            thin: 10,
            cutoffs: "gest<259,bw<2500".into(),
            combine: Combine::Union,
            enet_a: 0.5,
            folds: 10,
            roc_points: 200,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| AsprError::Parse(format!("bad value for '{key}': '{v}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|t| parse_num(key, t)).collect()
}

fn fmt_list(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Optional mean and covariance overrides for one component.
type MeanCov = (Option<Vec<f64>>, Option<Vec<f64>>);

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        if self.nonnull_count > self.p {
            return Err(AsprError::param("nonnull_count exceeds p"));
        }
        if !(self.target_fraction > 0.0 && self.target_fraction < 1.0) {
            return Err(AsprError::param("target_fraction must lie in (0, 1)"));
        }
        let s = self.components[0].dim();
        if self.components[1].dim() != s || self.outcome_names.len() != s {
            return Err(AsprError::dim(
                "component dimensions and outcome names disagree",
            ));
        }
        if self.replicates == 0 || self.n == 0 {
            return Err(AsprError::param(
                "need at least one replicate and one subject",
            ));
        }
        if self.burn_in >= self.n_iter || self.thin == 0 {
            return Err(AsprError::param("need burn_in < n_iter and thin >= 1"));
        }
        Ok(())
    }

    pub fn beta_true(&self) -> DVector<f64> {
        DVector::from_fn(self.p, |j, _| {
            if j < self.nonnull_count {
                self.nonnull_value
            } else {
                0.0
            }
        })
    }

    pub fn nonnull(&self) -> Vec<bool> {
        (0..self.p).map(|j| j < self.nonnull_count).collect()
    }

    /// Parses flat `key = value` lines over the defaults. `#` starts a comment.
    pub fn from_config(text: &str) -> Result<Self> {
        let mut d = SimDesign::default();
        let (mut maf_min, mut maf_max, mut block_corr, mut block_size) = (0.1, 0.5, 0.3, 5usize);
        let mut file: Option<PathBuf> = None;
        let mut comps: [MeanCov; 2] = [(None, None), (None, None)];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                AsprError::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => d.n = parse_num(key, value)?,
                "p" => d.p = parse_num(key, value)?,
                "nonnull_count" => d.nonnull_count = parse_num(key, value)?,
                "nonnull_value" => d.nonnull_value = parse_num(key, value)?,
                "target_fraction" => d.target_fraction = parse_num(key, value)?,
                "replicates" => d.replicates = parse_num(key, value)?,
                "seed" => d.seed = parse_num(key, value)?,
                "iters" => d.n_iter = parse_num(key, value)?,
                "burn_in" => d.burn_in = parse_num(key, value)?,
                "thin" => d.thin = parse_num(key, value)?,
                "maf_min" => maf_min = parse_num(key, value)?,
                "maf_max" => maf_max = parse_num(key, value)?,
                "block_corr" => block_corr = parse_num(key, value)?,
                "block_size" => block_size = parse_num(key, value)?,
                "predictors" => file = Some(PathBuf::from(value)),
                "outcome_names" => {
                    d.outcome_names = value.split(',').map(|s| s.trim().to_string()).collect()
                }
                "adverse_mean" => comps[0].0 = Some(parse_list(key, value)?),
                "adverse_cov" => comps[0].1 = Some(parse_list(key, value)?),
                "healthy_mean" => comps[1].0 = Some(parse_list(key, value)?),
                "healthy_cov" => comps[1].1 = Some(parse_list(key, value)?),
                "cutoffs" => d.cutoffs = value.to_string(),
                "combine" => {
                    d.combine = match value {
                        "union" => Combine::Union,
                        "intersection" => Combine::Intersection,
                        _ => {
                            return Err(AsprError::Parse(format!(
                                "combine must be union or intersection, got '{value}'"
                            )))
                        }
                    }
                }
                "enet_a" => d.enet_a = parse_num(key, value)?,
                "folds" => d.folds = parse_num(key, value)?,
                "roc_points" => d.roc_points = parse_num(key, value)?,
                _ => {
                    return Err(AsprError::Parse(format!(
                        "line {}: unknown key '{key}'",
                        lineno + 1
                    )))
                }
            }
        }
        for (h, (mean, cov)) in comps.into_iter().enumerate() {
            if mean.is_none() && cov.is_none() {
                continue;
            }
            let mean = mean
                .map(DVector::from_vec)
                .unwrap_or_else(|| d.components[h].mean.clone());
            let s = mean.len();
            let cov = match cov {
                Some(c) if c.len() == s * s => SpdMatrix::from_row_slice(s, &c)?,
                Some(_) => {
                    return Err(AsprError::Parse(format!(
                        "component {} covariance needs {} entries",
                        h + 1,
                        s * s
                    )))
                }
                None => d.components[h].cov.clone(),
            };
            d.components[h] = ComponentParams::new(mean, cov)?;
        }
        d.predictors = match file {
            Some(f) => PredictorSource::File(f),
            None => PredictorSource::Synthetic {
                maf_min,
                maf_max,
                block_corr,
                block_size,
            },
        };
        d.validate()?;
        Ok(d)
    }

    /// Inverse of [`SimDesign::from_config`].
    pub fn to_config(&self) -> String {
        let mut lines = vec![
            format!("n = {}", self.n),
            format!("p = {}", self.p),
            format!("nonnull_count = {}", self.nonnull_count),
            format!("nonnull_value = {}", self.nonnull_value),
            format!("target_fraction = {}", self.target_fraction),
            format!("replicates = {}", self.replicates),
            format!("seed = {}", self.seed),
            format!("iters = {}", self.n_iter),
            format!("burn_in = {}", self.burn_in),
            format!("thin = {}", self.thin),
            format!("outcome_names = {}", self.outcome_names.join(",")),
        ];
        for (h, name) in ["adverse", "healthy"].iter().enumerate() {
            let c = &self.components[h];
            lines.push(format!(
                "{name}_mean = {}",
                fmt_list(c.mean.iter().copied())
            ));
            // row-major
            lines.push(format!(
                "{name}_cov = {}",
                fmt_list(c.cov.matrix().transpose().iter().copied())
            ));
        }
        match &self.predictors {
            PredictorSource::Synthetic {
                maf_min,
                maf_max,
                block_corr,
                block_size,
            } => {
                lines.push(format!("maf_min = {maf_min}"));
                lines.push(format!("maf_max = {maf_max}"));
                lines.push(format!("block_corr = {block_corr}"));
                lines.push(format!("block_size = {block_size}"));
            }
            PredictorSource::File(f) => lines.push(format!("predictors = {}", f.display())),
        }
        lines.push(format!("cutoffs = {}", self.cutoffs));
        lines.push(format!(
            "combine = {}",
            if self.combine == Combine::Union {
                "union"
            } else {
                "intersection"
            }
        ));
        lines.push(format!("enet_a = {}", self.enet_a));
        lines.push(format!("folds = {}", self.folds));
        lines.push(format!("roc_points = {}", self.roc_points));
        lines.join("\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let text = "n = 400\np = 30  # scaled down\nnonnull_count = 5\nblock_corr = 0.5\nhealthy_mean = 270, 3100\n";
        let d = SimDesign::from_config(text).unwrap();
        assert_eq!((d.n, d.p, d.nonnull_count), (400, 30, 5));
        assert_eq!(d.components[1].mean[1], 3100.0);
        assert_eq!(SimDesign::from_config(&d.to_config()).unwrap(), d);
    }

    #[test]
    fn config_errors() {
        assert!(SimDesign::from_config("bogus = 1").is_err());
        assert!(SimDesign::from_config("n 5").is_err());
        assert!(SimDesign::from_config("n = five").is_err());
        assert!(SimDesign::from_config("p = 3\nnonnull_count = 4").is_err());
        assert!(SimDesign::from_config("adverse_cov = 1,2,3").is_err());
    }

    #[test]
    fn reference_design_shape() {
        let d = SimDesign::default();
        assert_eq!((d.n, d.p, d.nonnull_count), (813, 100, 10));
        assert_eq!(d.beta_true().iter().filter(|&&b| b == 0.8).count(), 10);
        let c = &d.components[1].cov;
        let r = c.matrix()[(0, 1)] / (c.matrix()[(0, 0)] * c.matrix()[(1, 1)]).sqrt();
        assert!((r - 0.455).abs() < 1e-3);
    }
}
