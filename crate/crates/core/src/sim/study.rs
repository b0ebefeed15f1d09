use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::baselines::two_stage::{two_stage, FirstStage, SecondStage, TwoStageOptions};
use crate::baselines::CutoffRule;
use crate::dist::{logistic, mvn_sample};
use crate::em::{em_fit, EmOptions};
use crate::error::{AsprError, Result};
use crate::io::read_table_csv;
use crate::model::summary::coefficient_summary;
use crate::model::{default_priors, run_chain, AsprData, ChainConfig};
use crate::rng::RngStream;
use crate::sim::design::{PredictorSource, SimDesign};
use crate::sim::metrics::{
    default_eps_grid, mean_split, mse_split, roc_from_effects, selection_metrics,
};
use crate::sim::snps::gen_correlated_snps;

/// First stages available to the two-stage comparators in a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource {
    Truth,
    Classification,
    Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Full model with sampled component parameters.
    Aspr,
    /// Components fixed at the EM estimates.
    AsprPlugin,
    TwoStage(LabelSource, SecondStage),
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Aspr => "aspr".into(),
            Method::AsprPlugin => "aspr-plugin".into(),
            Method::TwoStage(first, second) => {
                let f = match first {
                    LabelSource::Truth => "truth",
                    LabelSource::Classification => "classification",
                    LabelSource::Cutoff => "cutoff",
                };
                format!("{f}+{}", second.label())
            }
        }
    }

    /// Every method, in table order.
    pub fn all(enet_a: f64) -> Vec<Method> {
        let mut out = vec![Method::Aspr, Method::AsprPlugin];
        for first in [
            LabelSource::Truth,
            LabelSource::Classification,
            LabelSource::Cutoff,
        ] {
            for second in [
                SecondStage::Standard,
                SecondStage::Lasso,
                SecondStage::ElasticNet(enet_a),
            ] {
                out.push(Method::TwoStage(first, second));
            }
        }
        out
    }

    /// Comma-separated labels as produced by [`Method::label`], or `all`.
    pub fn parse_list(text: &str, enet_a: f64) -> Result<Vec<Method>> {
        let all = Method::all(enet_a);
        let mut out = Vec::new();
        for token in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if token == "all" {
                out.extend(all.iter().copied());
                continue;
            }
            let m = all
                .iter()
                .find(|m| m.label() == token)
                .ok_or_else(|| AsprError::Parse(format!("unknown method '{token}'")))?;
            out.push(*m);
        }
        if out.is_empty() {
            return Err(AsprError::Parse("no methods given".into()));
        }
        Ok(out)
    }
}

/// Estimates and selections of one method on one replicate.
#[derive(Debug, Clone)]
struct MethodOutcome {
    estimates: Vec<f64>,
    widths: Option<Vec<f64>>,
    selected: Vec<bool>,
}

#[derive(Debug, Clone)]
struct ReplicateMetrics {
    mse: (f64, f64),
    widths: Option<(f64, f64)>,
    tpr: f64,
    fpr: f64,
    auc: f64,
    roc: Vec<(f64, f64)>,
}

/// Replicate-averaged metrics of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: String,
    pub mse_nonnull: f64,
    pub mse_null: f64,
    /// Mean 90% interval length, where the method has intervals.
    pub len_nonnull: Option<f64>,
    pub len_null: Option<f64>,
    pub tpr: f64,
    pub fpr: f64,
    pub auc: f64,
    pub n_ok: usize,
    pub n_failed: usize,
    /// Mean `(FPR, TPR)` at each threshold index of the per-replicate grids.
    pub roc: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub summaries: Vec<MethodSummary>,
    pub gamma: f64,
    pub mean_adverse_fraction: f64,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.6}"))
}

impl StudyResult {
    pub fn table_csv(&self) -> String {
        let mut out = String::from(
            "method,mse_nonnull,mse_null,len_nonnull,len_null,tpr,fpr,auc,n_ok,n_failed\n",
        );
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{},{},{:.6},{:.6},{:.6},{},{}",
                s.method,
                s.mse_nonnull,
                s.mse_null,
                fmt_opt(s.len_nonnull),
                fmt_opt(s.len_null),
                s.tpr,
                s.fpr,
                s.auc,
                s.n_ok,
                s.n_failed
            );
        }
        out
    }

    /// Threshold position is reported as a fraction of each replicate's
    /// largest effect.
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("method,eps_fraction,fpr,tpr\n");
        for s in &self.summaries {
            let m = s.roc.len();
            for (k, (f, t)) in s.roc.iter().enumerate() {
                let frac = if m > 1 {
                    k as f64 / (m - 1) as f64
                } else {
                    0.0
                };
                let _ = writeln!(out, "{},{:.6},{:.6},{:.6}", s.method, frac, f, t);
            }
        }
        out
    }

    pub fn get(&self, method: &str) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Intercept that makes the mean of `logistic(gamma + x' beta)` equal `target`.
pub fn solve_intercept(x: &DMatrix<f64>, beta: &DVector<f64>, target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(AsprError::param("target fraction must lie in (0, 1)"));
    }
    let xb = x * beta;
    let f = |g: f64| xb.iter().map(|&e| logistic(g + e)).sum::<f64>() / xb.len() as f64 - target;
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The predictor matrix held fixed across replicates, with column names.
pub fn fixed_predictors(design: &SimDesign) -> Result<(DMatrix<f64>, Vec<String>)> {
    match &design.predictors {
        PredictorSource::Synthetic {
            maf_min,
            maf_max,
            block_corr,
            block_size,
        } => {
            if !(maf_min <= maf_max) {
                return Err(AsprError::param("maf_min exceeds maf_max"));
            }
            let mut rng = RngStream::new(design.seed, 1);
            let maf: Vec<f64> = (0..design.p)
                .map(|_| maf_min + (maf_max - maf_min) * rng.random::<f64>())
                .collect();
            let x = gen_correlated_snps(design.n, &maf, *block_corr, *block_size, &mut rng)?;
            Ok((x, (1..=design.p).map(|j| format!("snp{j}")).collect()))
        }
        PredictorSource::File(path) => {
            let (names, x) = read_table_csv(path)?;
            if x.nrows() != design.n || x.ncols() != design.p {
                return Err(AsprError::dim(format!(
                    "predictor file is {} x {}, design says {} x {}",
                    x.nrows(),
                    x.ncols(),
                    design.n,
                    design.p
                )));
            }
            Ok((x, names))
        }
    }
}

/// Labels `z_i ~ Bernoulli(logistic(gamma + x_i' beta))` and outcomes from the
/// matching component.
pub fn simulate_dataset(
    design: &SimDesign,
    x: &DMatrix<f64>,
    predictor_names: &[String],
    beta: &DVector<f64>,
    gamma: f64,
    rng: &mut RngStream,
) -> Result<(AsprData, Vec<bool>)> {
    let n = x.nrows();
    let s = design.components[0].dim();
    let xb = x * beta;
    let mut z = Vec::with_capacity(n);
    let mut y = DMatrix::zeros(n, s);
    for i in 0..n {
        let zi = rng.random::<f64>() < logistic(gamma + xb[i]);
        let c = &design.components[if zi { 0 } else { 1 }];
        y.row_mut(i)
            .copy_from(&mvn_sample(&c.mean, &c.cov, rng)?.transpose());
        z.push(zi);
    }
    let data = AsprData::new(
        y,
        x.clone(),
        design.outcome_names.clone(),
        predictor_names.to_vec(),
    )?;
    Ok((data, z))
}

fn run_method(
    method: Method,
    design: &SimDesign,
    data: &AsprData,
    z_true: &[bool],
    rng: &RngStream,
) -> Result<MethodOutcome> {
    match method {
        Method::Aspr | Method::AsprPlugin => {
            let mut priors = default_priors(data)?;
            if method == Method::AsprPlugin {
                let fit = em_fit(data.y(), &EmOptions::default(), &rng.split(7))?;
                priors = priors.with_plugin(fit.components);
            }
            let config = ChainConfig {
                n_iter: design.n_iter,
                burn_in: design.burn_in,
                thin: design.thin,
                seed: rng.split(8).next_u64(),
                store_z: false,
                ..ChainConfig::default()
            };
            let samples = run_chain(data, &priors, &config)?;
            let rows = coefficient_summary(&samples);
            Ok(MethodOutcome {
                estimates: rows.iter().map(|r| r.mean).collect(),
                widths: Some(rows.iter().map(|r| r.width_90()).collect()),
                selected: rows.iter().map(|r| r.selected_90()).collect(),
            })
        }
        Method::TwoStage(source, second) => {
            let first = match source {
                LabelSource::Truth => FirstStage::Truth(z_true.to_vec()),
                LabelSource::Classification => FirstStage::Classification,
                LabelSource::Cutoff => FirstStage::Cutoff(CutoffRule::parse(
                    &design.cutoffs,
                    data.outcome_names(),
                    design.combine,
                )?),
            };
            let opts = TwoStageOptions {
                folds: design.folds,
                ..Default::default()
            };
            let fit = two_stage(data, &first, second, &opts, &rng.split(9))?;
            Ok(MethodOutcome {
                estimates: fit.coefficients.iter().copied().collect(),
                widths: fit.interval_widths,
                selected: fit.selected,
            })
        }
    }
}

fn score(
    outcome: &MethodOutcome,
    truth: &[f64],
    nonnull: &[bool],
    roc_points: usize,
) -> ReplicateMetrics {
    let (tpr, fpr) = selection_metrics(&outcome.selected, nonnull);
    let grid = default_eps_grid(&outcome.estimates, roc_points);
    let roc = roc_from_effects(&outcome.estimates, nonnull, &grid);
    ReplicateMetrics {
        mse: mse_split(&outcome.estimates, truth, nonnull),
        widths: outcome.widths.as_ref().map(|w| mean_split(w, nonnull)),
        tpr,
        fpr,
        auc: roc.auc,
        roc: roc.points.iter().map(|&(_, f, t)| (f, t)).collect(),
    }
}

/// Runs every method on `design.replicates` simulated datasets. Replicates
/// run in parallel; each draws from its own stream split from the design
/// seed, and results are reduced in replicate order, so the output does not
/// depend on scheduling. Failed method runs are logged and counted.
pub fn run_study(design: &SimDesign, methods: &[Method]) -> Result<StudyResult> {
    design.validate()?;
    let (x, names) = fixed_predictors(design)?;
    let beta = design.beta_true();
    let nonnull = design.nonnull();
    let gamma = solve_intercept(&x, &beta, design.target_fraction)?;
    let root = RngStream::new(design.seed, 2);
    let truth: Vec<f64> = beta.iter().copied().collect();

    let per_rep: Vec<(f64, Vec<Option<ReplicateMetrics>>)> = (0..design.replicates)
        .into_par_iter()
        .map(|r| {
            let rep_rng = root.split(r as u64);
            let mut sim_rng = rep_rng.split(0);
            let (data, z) = match simulate_dataset(design, &x, &names, &beta, gamma, &mut sim_rng) {
                Ok(v) => v,
                Err(e) => {
                    log::warn!("replicate {r}: simulation failed: {e}");
                    return (f64::NAN, vec![None; methods.len()]);
                }
            };
            let frac = z.iter().filter(|&&v| v).count() as f64 / z.len() as f64;
            let results = methods
                .iter()
                .enumerate()
                .map(|(k, &m)| {
                    match run_method(m, design, &data, &z, &rep_rng.split(100 + k as u64)) {
                        Ok(o) => Some(score(&o, &truth, &nonnull, design.roc_points)),
                        Err(e) => {
                            log::warn!("replicate {r}, method {}: {e}", m.label());
                            None
                        }
                    }
                })
                .collect();
            log::info!("replicate {r} done");
            (frac, results)
        })
        .collect();

    let mut summaries = Vec::with_capacity(methods.len());
    for (k, m) in methods.iter().enumerate() {
        let ok: Vec<&ReplicateMetrics> =
            per_rep.iter().filter_map(|(_, v)| v[k].as_ref()).collect();
        let n_ok = ok.len();
        let avg = |f: &dyn Fn(&ReplicateMetrics) -> f64| {
            if n_ok == 0 {
                f64::NAN
            } else {
                ok.iter().map(|r| f(r)).sum::<f64>() / n_ok as f64
            }
        };
        let has_widths = n_ok > 0 && ok.iter().all(|r| r.widths.is_some());
        let roc = (0..design.roc_points)
            .map(|i| {
                (
                    avg(&|r: &ReplicateMetrics| r.roc[i].0),
                    avg(&|r: &ReplicateMetrics| r.roc[i].1),
                )
            })
            .collect();
        summaries.push(MethodSummary {
            method: m.label(),
            mse_nonnull: avg(&|r| r.mse.0),
            mse_null: avg(&|r| r.mse.1),
            len_nonnull: has_widths.then(|| avg(&|r| r.widths.unwrap().0)),
            len_null: has_widths.then(|| avg(&|r| r.widths.unwrap().1)),
            tpr: avg(&|r| r.tpr),
            fpr: avg(&|r| r.fpr),
            auc: avg(&|r| r.auc),
            n_ok,
            n_failed: design.replicates - n_ok,
            roc,
        });
    }
    let fracs: Vec<f64> = per_rep
        .iter()
        .map(|(f, _)| *f)
        .filter(|f| f.is_finite())
        .collect();
    let mean_adverse_fraction = fracs.iter().sum::<f64>() / fracs.len().max(1) as f64;
    Ok(StudyResult {
        summaries,
        gamma,
        mean_adverse_fraction,
    })
}
