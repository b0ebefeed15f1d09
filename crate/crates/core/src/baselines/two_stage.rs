use nalgebra::DVector;

use crate::baselines::cutoff::{dichotomize_cutoff, CutoffRule};
use crate::baselines::cv::cv_select_lambda;
use crate::baselines::logistic::logit_mle;
use crate::baselines::penalized::PenalizedOptions;
use crate::em::{em_fit, map_allocate, EmOptions};
use crate::error::{AsprError, Result};
use crate::model::data::AsprData;
use crate::rng::RngStream;

/// How the binary labels are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum FirstStage {
    /// Known labels (simulation only).
    Truth(Vec<bool>),
    /// MAP allocation from a two-component normal mixture fit.
    Classification,
    Cutoff(CutoffRule),
}

impl FirstStage {
    pub fn label(&self) -> &'static str {
        match self {
            FirstStage::Truth(_) => "truth",
            FirstStage::Classification => "classification",
            FirstStage::Cutoff(_) => "cutoff",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecondStage {
    Standard,
    Lasso,
    /// Elastic net with the given mixing parameter.
    ElasticNet(f64),
}

impl SecondStage {
    pub fn label(&self) -> &'static str {
        match self {
            SecondStage::Standard => "standard",
            SecondStage::Lasso => "lasso",
            SecondStage::ElasticNet(_) => "enet",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TwoStageFit {
    pub z: Vec<bool>,
    pub intercept: f64,
    /// Coefficients on the original predictor scale.
    pub coefficients: DVector<f64>,
    /// Interval widths for the unpenalized fit, `None` for penalized fits.
    pub interval_widths: Option<Vec<f64>>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub selected: Vec<bool>,
    pub lambda: Option<f64>,
    pub separated: bool,
}

#[derive(Debug, Clone)]
pub struct TwoStageOptions {
    /// Interval level for selection by the unpenalized fit.
    pub level: f64,
    pub folds: usize,
    pub em: EmOptions,
    pub penalized: PenalizedOptions,
}

impl Default for TwoStageOptions {
    fn default() -> Self {
        TwoStageOptions {
            level: 0.9,
            folds: 10,
            em: EmOptions::default(),
            penalized: PenalizedOptions::default(),
        }
    }
}

pub fn first_stage_labels(
    data: &AsprData,
    first: &FirstStage,
    em: &EmOptions,
    rng: &RngStream,
) -> Result<Vec<bool>> {
    match first {
        FirstStage::Truth(z) => {
            if z.len() != data.n() {
                return Err(AsprError::dim("true labels have the wrong length"));
            }
            Ok(z.clone())
        }
        FirstStage::Classification => Ok(map_allocate(&em_fit(data.y(), em, &rng.split(0))?)),
        FirstStage::Cutoff(rule) => dichotomize_cutoff(data.y(), rule),
    }
}

/// Dichotomizes, then regresses the labels on the predictors. Selection is
/// "interval excludes zero" for the unpenalized fit and "nonzero at the
/// cross-validated penalty" for the penalized ones.
pub fn two_stage(
    data: &AsprData,
    first: &FirstStage,
    second: SecondStage,
    opts: &TwoStageOptions,
    rng: &RngStream,
) -> Result<TwoStageFit> {
    let z = first_stage_labels(data, first, &opts.em, rng)?;
    let x = data.x();
    match second {
        SecondStage::Standard => {
            let fit = logit_mle(&z, x, opts.level)?;
            let p = data.p();
            Ok(TwoStageFit {
                intercept: fit.intercept(),
                coefficients: fit.coefficients(),
                interval_widths: Some(fit.interval_widths()),
                lower: Some((1..=p).map(|j| fit.lower[j]).collect()),
                upper: Some((1..=p).map(|j| fit.upper[j]).collect()),
                selected: fit.selected(),
                lambda: None,
                separated: fit.separated,
                z,
            })
        }
        SecondStage::Lasso | SecondStage::ElasticNet(_) => {
            let a = if let SecondStage::ElasticNet(a) = second {
                a
            } else {
                1.0
            };
            let popts = PenalizedOptions {
                a,
                ..opts.penalized.clone()
            };
            let cv = cv_select_lambda(&z, x, &popts, opts.folds, &rng.split(1))?;
            let coefficients = cv.path.coef_at(cv.best);
            Ok(TwoStageFit {
                intercept: cv.path.intercepts[cv.best],
                selected: coefficients.iter().map(|&b| b != 0.0).collect(),
                coefficients,
                interval_widths: None,
                lower: None,
                upper: None,
                lambda: Some(cv.lambda()),
                separated: false,
                z,
            })
        }
    }
}
