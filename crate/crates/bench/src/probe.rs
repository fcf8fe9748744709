//! Model-fit probe: held-out GP log-likelihood on a fixed trajectory,
//! alongside the BO performance of the same kernel.

use mixbo::engine::{ModelKind, OptimizerSpec};
use mixbo::space::{SearchSpace, UnitPoint};
use mixbo::surrogates::{gp_fit, Dataset, GpFitOptions, Kernel};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::grid::run_single;
use crate::records::{RunRecord, RunSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitQuality {
    pub kernel: String,
    pub n_train: usize,
    pub n_test: usize,
    /// Sum of log predictive densities of the held-out targets.
    pub heldout_ll: f64,
    /// Same on the training targets.
    pub train_ll: f64,
}

/// Unit-space points and targets of a record.
pub fn record_data(record: &RunRecord) -> Result<(SearchSpace, Vec<UnitPoint>, Vec<f64>)> {
    let space = SearchSpace::from_json(&record.header.space)?;
    let mut xs = Vec::with_capacity(record.iterations.len());
    for it in &record.iterations {
        let p = space.point_from_json(&it.x)?;
        xs.push(space.transform(&p)?);
    }
    Ok((space, xs, record.ys()))
}

/// Fits each kernel (a GP model id such as `gp_to`) on the first `n_train`
/// points and scores the remaining ones.
pub fn fit_quality_probe(
    space: &SearchSpace,
    xs: &[UnitPoint],
    ys: &[f64],
    kernels: &[String],
    n_train: usize,
    seed: u64,
) -> Result<Vec<FitQuality>> {
    if xs.len() != ys.len() {
        return Err(BenchError::Invalid("points and targets differ in length".into()));
    }
    if n_train < 2 || n_train >= xs.len() {
        return Err(BenchError::Invalid(format!(
            "trajectory of {} points is too short for a {n_train}-point training split",
            xs.len()
        )));
    }
    let train = Dataset::new(xs[..n_train].to_vec(), ys[..n_train].to_vec())?;
    let mut out = Vec::new();
    for id in kernels {
        let ModelKind::Gp(config) = ModelKind::parse(id, seed)? else {
            return Err(BenchError::Invalid(format!("`{id}` is not a GP model")));
        };
        let kernel = Kernel::new(config, space)?;
        let gp = gp_fit(kernel, &train, &GpFitOptions::default(), None)?;
        let heldout_ll = xs[n_train..]
            .iter()
            .zip(&ys[n_train..])
            .map(|(u, y)| gp.log_predictive_density(u, *y))
            .sum();
        let train_ll = xs[..n_train]
            .iter()
            .zip(&ys[..n_train])
            .map(|(u, y)| gp.log_predictive_density(u, *y))
            .sum();
        out.push(FitQuality {
            kernel: id.clone(),
            n_train,
            n_test: xs.len() - n_train,
            heldout_ll,
            train_ll,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub kernels: Vec<String>,
    /// Length of the GA trajectory used for the fit split.
    pub trajectory_budget: usize,
    pub n_train: usize,
    /// Budget of the BO run per kernel.
    pub bo_budget: usize,
    pub n_init: usize,
    pub acq: String,
    pub acq_opt: String,
    pub tr: String,
    /// Overrides of the BO runs (engine override sections).
    #[serde(default)]
    pub bo_overrides: serde_json::Value,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            kernels: vec!["gp_o".into(), "gp_to".into(), "gp_hed".into()],
            trajectory_budget: 100,
            n_train: 75,
            bo_budget: 100,
            n_init: 20,
            acq: "ei".into(),
            acq_opt: "ga".into(),
            tr: "basic".into(),
            bo_overrides: serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub task: String,
    pub seed: u64,
    pub kernel: String,
    pub heldout_ll: f64,
    pub train_ll: f64,
    pub init_best: f64,
    pub final_best: f64,
    /// `init_best - final_best`.
    pub improvement: f64,
}

/// GA trajectory, fit split, then one BO run per kernel.
pub fn probe_fit(task: &str, seed: u64, config: &ProbeConfig) -> Result<Vec<ProbeRow>> {
    let ga = RunSpec {
        task: task.into(),
        label: "ga".into(),
        optimizer: OptimizerSpec::baseline("ga"),
        n_init: config.n_init,
        budget: config.trajectory_budget,
        seed,
    };
    let (trajectory, _) = run_single(&ga)?;
    let (space, xs, ys) = record_data(&trajectory)?;
    let fits = fit_quality_probe(&space, &xs, &ys, &config.kernels, config.n_train, seed)?;
    let mut rows = Vec::new();
    for fit in fits {
        let spec = RunSpec {
            task: task.into(),
            label: fit.kernel.clone(),
            optimizer: OptimizerSpec::bo(&fit.kernel, &config.acq, &config.acq_opt, &config.tr)
                .with_overrides(config.bo_overrides.clone()),
            n_init: config.n_init,
            budget: config.bo_budget,
            seed,
        };
        let (run, _) = run_single(&spec)?;
        let best = run.best_so_far();
        let init_best = best[config.n_init - 1];
        let final_best = *best.last().expect("non-empty");
        rows.push(ProbeRow {
            task: task.into(),
            seed,
            kernel: fit.kernel,
            heldout_ll: fit.heldout_ll,
            train_ll: fit.train_ll,
            init_best,
            final_best,
            improvement: init_best - final_best,
        });
    }
    Ok(rows)
}
