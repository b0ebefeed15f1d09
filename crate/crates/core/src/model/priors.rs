use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::em::ComponentParams;
use crate::error::{AsprError, Result};
use crate::linalg::SpdMatrix;
use crate::model::data::AsprData;
use crate::msp::{InterceptPrior, MspConfig};

/// Degrees of freedom of the t approximation to the logistic distribution.
pub const T_LINK_DF: f64 = 7.3;

/// Scale `sigma^2` that matches the t variance `sigma^2 nu / (nu - 2)` to the
/// logistic variance `pi^2 / 3`.
pub fn t_link_scale2(nu: f64) -> f64 {
    PI * PI * (nu - 2.0) / (3.0 * nu)
}

/// Prior mean of the intercept (log odds of a 10% baseline).
pub const DEFAULT_GAMMA0: f64 = -2.20;
/// Prior precision of the intercept.
pub const DEFAULT_LAMBDA0: f64 = 2.42;

/// Whether the component parameters are sampled or held at fixed values.
#[allow(clippy::large_enum_variant)] // built once per fit
#[derive(Debug, Clone, PartialEq)]
pub enum FitMode {
    FullBayes,
    /// Component 0 is the adverse component.
    Plugin([ComponentParams; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsprPriors {
    pub theta0: DVector<f64>,
    pub psi0: f64,
    pub rho0: f64,
    pub sigma0: SpdMatrix,
    pub gamma0: f64,
    /// Intercept prior precision.
    pub lambda0: f64,
    pub msp: MspConfig,
    pub mode: FitMode,
}

impl AsprPriors {
    pub fn validate(&self, s: usize) -> Result<()> {
        if self.theta0.len() != s || self.sigma0.dim() != s {
            return Err(AsprError::dim(format!(
                "priors are for dimension {}, data has {s}",
                self.theta0.len()
            )));
        }
        if !(self.psi0 > 0.0) {
            return Err(AsprError::param("psi0 must be positive"));
        }
        if !(self.rho0 > s as f64 - 1.0) {
            return Err(AsprError::param(format!(
                "rho0 must exceed s - 1 = {}",
                s as f64 - 1.0
            )));
        }
        if !(self.lambda0 > 0.0) {
            return Err(AsprError::param(
                "lambda0 (intercept precision) must be positive",
            ));
        }
        if let FitMode::Plugin(c) = &self.mode {
            if c.iter().any(|ci| ci.dim() != s) {
                return Err(AsprError::dim(
                    "plug-in components have the wrong dimension",
                ));
            }
        }
        self.msp.validate()
    }

    pub fn intercept_prior(&self) -> InterceptPrior {
        InterceptPrior {
            mean: self.gamma0,
            precision: self.lambda0,
        }
    }

    pub fn with_plugin(mut self, components: [ComponentParams; 2]) -> Self {
        self.mode = FitMode::Plugin(components);
        self
    }

    pub fn is_plugin(&self) -> bool {
        matches!(self.mode, FitMode::Plugin(_))
    }
}

/// Sample mean and `n - 1` sample covariance of the rows of `y`.
pub fn sample_moments(y: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = y.nrows();
    let mean = y.row_mean().transpose();
    let mut cov = DMatrix::zeros(y.ncols(), y.ncols());
    for i in 0..n {
        let d = y.row(i).transpose() - &mean;
        cov += &d * d.transpose();
    }
    cov /= (n as f64 - 1.0).max(1.0);
    (mean, cov)
}

/// Empirical-Bayes defaults: `theta0`, `Sigma0` from the pooled sample,
/// `psi0 = 1`, `rho0 = s + 2`, intercept `N(-2.20, 1 / 2.42)`, and the
/// default shrinkage hyperparameters.
pub fn default_priors(data: &AsprData) -> Result<AsprPriors> {
    let (n, s) = (data.n(), data.s());
    if n <= s + 2 {
        return Err(AsprError::dim(format!(
            "default priors need n > s + 2, got n = {n}, s = {s}"
        )));
    }
    let (mean, cov) = sample_moments(data.y());
    for k in 0..s {
        if !(cov[(k, k)] > 0.0) {
            return Err(AsprError::Data(format!(
                "outcome '{}' has zero variance",
                data.outcome_names()[k]
            )));
        }
    }
    Ok(AsprPriors {
        theta0: mean,
        psi0: 1.0,
        rho0: s as f64 + 2.0,
        sigma0: SpdMatrix::new(cov)?,
        gamma0: DEFAULT_GAMMA0,
        lambda0: DEFAULT_LAMBDA0,
        msp: MspConfig::default(),
        mode: FitMode::FullBayes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{logistic, normal_quantile};

    #[test]
    fn intercept_prior_matches_elicitation() {
        assert!((logistic(DEFAULT_GAMMA0) - 0.0998).abs() < 1e-4);
        let sd = (1.0 / DEFAULT_LAMBDA0).sqrt();
        let z = normal_quantile(0.975);
        let lo = logistic(DEFAULT_GAMMA0 - z * sd);
        let hi = logistic(DEFAULT_GAMMA0 + z * sd);
        assert!((lo - 0.030).abs() < 0.001, "{lo}");
        assert!((hi - 0.281).abs() < 0.001, "{hi}");
        // reading 2.42 as a variance would give roughly (0.5%, 70%)
        let wide = DEFAULT_LAMBDA0.sqrt();
        assert!(logistic(DEFAULT_GAMMA0 - z * wide) < 0.01);
        assert!(logistic(DEFAULT_GAMMA0 + z * wide) > 0.6);
    }

    #[test]
    fn t_link_constant() {
        let s2 = t_link_scale2(T_LINK_DF);
        assert!((s2 - 2.3886).abs() < 1e-4, "{s2}");
        // t variance equals logistic variance
        assert!((s2 * T_LINK_DF / (T_LINK_DF - 2.0) - PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn defaults_use_sample_moments() {
        let y = DMatrix::from_row_slice(
            5,
            2,
            &[
                270.0, 3100.0, 280.0, 3400.0, 250.0, 2500.0, 275.0, 3300.0, 265.0, 2900.0,
            ],
        );
        let data = AsprData::from_matrices(y.clone(), DMatrix::zeros(5, 0)).unwrap();
        let p = default_priors(&data).unwrap();
        assert!((p.theta0[0] - 268.0).abs() < 1e-12);
        let (_, cov) = sample_moments(&y);
        assert_eq!(p.sigma0.matrix(), &cov);
        assert_eq!(p.rho0, 4.0);
        assert_eq!(p.psi0, 1.0);
        p.validate(2).unwrap();
    }

    #[test]
    fn zero_variance_outcome_is_rejected() {
        let y = DMatrix::from_row_slice(5, 2, &[1.0, 2.0, 1.0, 3.0, 1.0, 4.0, 1.0, 1.0, 1.0, 0.0]);
        let data = AsprData::from_matrices(y, DMatrix::zeros(5, 0)).unwrap();
        assert!(default_priors(&data).is_err());
    }
}
