#![allow(clippy::neg_cmp_op_on_partial_ord)]
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use aspr::baselines::two_stage::TwoStageOptions;
use aspr::baselines::{two_stage, Combine, CutoffRule, FirstStage, SecondStage};
use aspr::em::{em_fit, EmOptions};
use aspr::io;
use aspr::model::summary::posterior_summary;
use aspr::model::{
    add_interactions, allocation_probability, default_priors, effect_probability,
    posterior_predictive_density, run_chain, AsprData, ChainConfig, IndicatorRule,
};
use aspr::sim::study::fixed_predictors;
use aspr::sim::{run_study, simulate_dataset, solve_intercept, Method, SimDesign};
use aspr::RngStream;

type CliResult<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "aspr", version, about = "Adverse subpopulation regression")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rule {
    Augmented,
    Logistic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Cutoff,
    Classification,
}

#[derive(Clone, Copy, ValueEnum)]
enum Second {
    Standard,
    Lasso,
    Enet,
}

#[derive(Clone, Copy, ValueEnum)]
enum CombineArg {
    Union,
    Intersection,
}

impl From<CombineArg> for Combine {
    fn from(c: CombineArg) -> Self {
        match c {
            CombineArg::Union => Combine::Union,
            CombineArg::Intersection => Combine::Intersection,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the Gibbs sampler and write draws and summaries.
    Fit {
        #[arg(long)]
        outcomes: PathBuf,
        #[arg(long)]
        predictors: PathBuf,
        /// Two-column CSV of predictor-name pairs to multiply.
        #[arg(long)]
        interactions: Option<PathBuf>,
        /// Fix the component parameters at EM estimates.
        #[arg(long)]
        plugin: bool,
        /// EM fit file (from `aspr em`) supplying the plug-in components.
        #[arg(long, requires = "plugin")]
        em_source: Option<PathBuf>,
        #[arg(long, default_value_t = 11_000)]
        iters: usize,
        #[arg(long, default_value_t = 1_000)]
        burnin: usize,
        #[arg(long, default_value_t = 10)]
        thin: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Effect-size threshold for the effect probabilities.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = Rule::Augmented)]
        rule: Rule,
        /// Append per-subject allocation draws to samples.csv.
        #[arg(long)]
        include_z: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the two-component normal mixture by EM.
    Em {
        #[arg(long)]
        outcomes: PathBuf,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dichotomize the outcomes, then fit a logistic regression.
    TwoStage {
        #[arg(long)]
        outcomes: PathBuf,
        #[arg(long)]
        predictors: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Second::Standard)]
        second: Second,
        /// e.g. "gest<259,bw<2500"
        #[arg(long)]
        cutoffs: Option<String>,
        #[arg(long, value_enum, default_value_t = CombineArg::Union)]
        combine: CombineArg,
        #[arg(long, default_value_t = 0.5)]
        enet_a: f64,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one simulated dataset from a design file.
    Simulate {
        #[arg(long)]
        design: Option<PathBuf>,
        /// Replicate index; matches the datasets used by `study`.
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a simulation study and write the metrics table and ROC data.
    Study {
        #[arg(long)]
        design: Option<PathBuf>,
        /// Comma-separated method labels, or "all".
        #[arg(long, default_value = "all")]
        methods: String,
        #[arg(long)]
        replicates: Option<usize>,
        /// `table.csv,roc.csv`
        #[arg(long)]
        out: String,
    },
    /// Posterior predictive density of the outcomes on a grid.
    Ppd {
        #[arg(long)]
        samples: PathBuf,
        /// One `lo:hi:count` per outcome, comma-separated; the grid is their product.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_data(
    outcomes: &Path,
    predictors: &Path,
    interactions: Option<&Path>,
) -> CliResult<AsprData> {
    let (y_names, y) = io::read_table_csv(outcomes)?;
    let (mut x_names, mut x) = io::read_table_csv(predictors)?;
    if let Some(path) = interactions {
        let pairs = io::read_pairs_csv(path)?;
        (x, x_names) = add_interactions(&x, &x_names, &pairs)?;
    }
    Ok(AsprData::new(y, x, y_names, x_names)?)
}

fn load_design(path: Option<&Path>) -> CliResult<SimDesign> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok(SimDesign::from_config(&text)?)
        }
        None => Ok(SimDesign::default()),
    }
}

/// Parses `lo:hi:count` axes into the rows of their product grid, last axis fastest.
fn parse_grid(spec: &str) -> CliResult<DMatrix<f64>> {
    let mut axes = Vec::new();
    for part in spec.split(',') {
        let f: Vec<&str> = part.trim().split(':').collect();
        if f.len() != 3 {
            return Err(format!("grid axis '{part}' is not lo:hi:count").into());
        }
        let (lo, hi): (f64, f64) = (f[0].parse()?, f[1].parse()?);
        let m: usize = f[2].parse()?;
        if m < 2 || !(hi > lo) {
            return Err(format!("grid axis '{part}' needs hi > lo and count >= 2").into());
        }
        axes.push(
            (0..m)
                .map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64)
                .collect::<Vec<_>>(),
        );
    }
    let rows: usize = axes.iter().map(Vec::len).product();
    let mut grid = DMatrix::zeros(rows, axes.len());
    for r in 0..rows {
        let mut rem = r;
        for (c, axis) in axes.iter().enumerate().rev() {
            grid[(r, c)] = axis[rem % axis.len()];
            rem /= axis.len();
        }
    }
    Ok(grid)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit {
            outcomes,
            predictors,
            interactions,
            plugin,
            em_source,
            iters,
            burnin,
            thin,
            seed,
            eps,
            rule,
            include_z,
            out,
        } => {
            let data = load_data(&outcomes, &predictors, interactions.as_deref())?;
            let mut priors = default_priors(&data)?;
            if plugin {
                let components = match em_source {
                    Some(path) => io::read_em_fit_csv(&path)?,
                    None => {
                        em_fit(data.y(), &EmOptions::default(), &RngStream::new(seed, 3))?
                            .components
                    }
                };
                priors = priors.with_plugin(components);
            }
            let config = ChainConfig {
                n_iter: iters,
                burn_in: burnin,
                thin,
                seed,
                rule: match rule {
                    Rule::Augmented => IndicatorRule::Augmented,
                    Rule::Logistic => IndicatorRule::Logistic,
                },
                store_z: true,
            };
            log::info!(
                "sampling {} iterations on n = {}, p = {}",
                iters,
                data.n(),
                data.p()
            );
            let samples = run_chain(&data, &priors, &config)?;
            let switch = samples.label_switch_rate(burnin);
            if switch > 0.0 {
                log::warn!(
                    "adverse component held the majority in {:.1}% of post-burn-in sweeps",
                    100.0 * switch
                );
            }
            fs::create_dir_all(&out)?;
            io::write_samples_csv(&out.join("samples.csv"), &samples, include_z)?;
            io::write_summary_csv(&out.join("summary.csv"), &posterior_summary(&samples)?)?;
            let subjects: Vec<String> = (1..=data.n()).map(|i| i.to_string()).collect();
            io::write_named_values_csv(
                &out.join("allocation.csv"),
                ["subject", "p_healthy"],
                &subjects,
                &allocation_probability(&samples)?,
            )?;
            io::write_named_values_csv(
                &out.join("effectprob.csv"),
                ["predictor", "p_effect"],
                data.predictor_names(),
                &effect_probability(&samples, eps)?,
            )?;
            println!("{} draws written to {}", samples.n_draws(), out.display());
        }
        Command::Em {
            outcomes,
            restarts,
            seed,
            out,
        } => {
            let (_, y) = io::read_table_csv(&outcomes)?;
            let opts = EmOptions {
                n_restarts: restarts,
                ..EmOptions::default()
            };
            let fit = em_fit(&y, &opts, &RngStream::new(seed, 0))?;
            io::write_em_fit_csv(&out, &fit)?;
            println!(
                "adverse weight {:.4}, log-likelihood {:.4}",
                fit.weight,
                fit.loglik()
            );
        }
        Command::TwoStage {
            outcomes,
            predictors,
            mode,
            second,
            cutoffs,
            combine,
            enet_a,
            folds,
            level,
            seed,
            out,
        } => {
            let data = load_data(&outcomes, &predictors, None)?;
            let first = match mode {
                Mode::Classification => FirstStage::Classification,
                Mode::Cutoff => {
                    let text = cutoffs.ok_or("--mode cutoff needs --cutoffs")?;
                    FirstStage::Cutoff(CutoffRule::parse(
                        &text,
                        data.outcome_names(),
                        combine.into(),
                    )?)
                }
            };
            let second = match second {
                Second::Standard => SecondStage::Standard,
                Second::Lasso => SecondStage::Lasso,
                Second::Enet => SecondStage::ElasticNet(enet_a),
            };
            let opts = TwoStageOptions {
                level,
                folds,
                ..TwoStageOptions::default()
            };
            let fit = two_stage(&data, &first, second, &opts, &RngStream::new(seed, 0))?;
            if fit.separated {
                log::warn!("the logistic fit shows separation; its intervals are unreliable");
            }
            let mut w =
                csv::Writer::from_path(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            w.write_record(["parameter", "estimate", "lower", "upper", "selected"])?;
            w.write_record(["(intercept)", &io::fmt_num(fit.intercept), "", "", ""])?;
            for (j, name) in data.predictor_names().iter().enumerate() {
                let bound = |b: &Option<Vec<f64>>| {
                    b.as_ref().map_or_else(String::new, |v| io::fmt_num(v[j]))
                };
                w.write_record([
                    name.clone(),
                    io::fmt_num(fit.coefficients[j]),
                    bound(&fit.lower),
                    bound(&fit.upper),
                    u8::from(fit.selected[j]).to_string(),
                ])?;
            }
            w.flush()?;
            let adverse = fit.z.iter().filter(|&&z| z).count();
            println!("{adverse} of {} subjects labeled adverse", data.n());
            if let Some(l) = fit.lambda {
                println!("lambda {l:.6}");
            }
        }
        Command::Simulate {
            design,
            replicate,
            out,
        } => {
            let design = load_design(design.as_deref())?;
            design.validate()?;
            let (x, names) = fixed_predictors(&design)?;
            let beta = design.beta_true();
            let gamma = solve_intercept(&x, &beta, design.target_fraction)?;
            let mut rng = RngStream::new(design.seed, 2).split(replicate).split(0);
            let (data, z) = simulate_dataset(&design, &x, &names, &beta, gamma, &mut rng)?;
            fs::create_dir_all(&out)?;
            io::write_table_csv(&out.join("Y.csv"), data.outcome_names(), data.y())?;
            io::write_table_csv(&out.join("X.csv"), &names, &x)?;
            let zcol =
                DMatrix::from_iterator(z.len(), 1, z.iter().map(|&v| f64::from(u8::from(v))));
            io::write_table_csv(&out.join("z.csv"), &["z".to_string()], &zcol)?;
            io::write_named_values_csv(
                &out.join("beta.csv"),
                ["predictor", "beta"],
                &names,
                beta.as_slice(),
            )?;
            write_text(&out.join("design.cfg"), &design.to_config())?;
            println!(
                "intercept {gamma:.6}; {} of {} adverse",
                z.iter().filter(|&&v| v).count(),
                z.len()
            );
        }
        Command::Study {
            design,
            methods,
            replicates,
            out,
        } => {
            let mut design = load_design(design.as_deref())?;
            if let Some(r) = replicates {
                design.replicates = r;
            }
            let (table_path, roc_path) =
                out.split_once(',').ok_or("--out takes table.csv,roc.csv")?;
            let methods = Method::parse_list(&methods, design.enet_a)?;
            let result = run_study(&design, &methods)?;
            write_text(Path::new(table_path.trim()), &result.table_csv())?;
            write_text(Path::new(roc_path.trim()), &result.roc_csv())?;
            print!("{}", result.table_csv());
        }
        Command::Ppd { samples, grid, out } => {
            let samples = io::read_samples_csv(&samples)?;
            let grid = parse_grid(&grid)?;
            let density = posterior_predictive_density(&samples, &grid)?;
            let mut names = samples.outcome_names.clone();
            names.push("density".into());
            let table = DMatrix::from_fn(grid.nrows(), grid.ncols() + 1, |r, c| {
                if c < grid.ncols() {
                    grid[(r, c)]
                } else {
                    density[r]
                }
            });
            io::write_table_csv(&out, &names, &table)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
