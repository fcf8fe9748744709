//! Grid runner: (task × optimizer × seed) runs on a bounded worker pool,
//! resumable by fingerprint.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::time::Instant;

use mixbo::engine::OptimizerSpec;
use mixbo::tasks::task_from_id;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{io_err, BenchError, Result};
use crate::records::{
    tr_snapshot, write_atomic, IndexEntry, IterationRecord, Phase, RunHeader, RunRecord, RunSpec,
    Timing, INDEX_FILE, RECORD_VERSION,
};

/// An optimizer entry of a grid with an optional display label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOptimizer {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub spec: OptimizerSpec,
}

impl GridOptimizer {
    pub fn new(spec: OptimizerSpec) -> Self {
        Self { label: None, spec }
    }

    pub fn labeled(label: &str, spec: OptimizerSpec) -> Self {
        Self {
            label: Some(label.into()),
            spec,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.spec.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub tasks: Vec<String>,
    pub optimizers: Vec<GridOptimizer>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_n_init() -> usize {
    20
}

fn default_budget() -> usize {
    200
}

/// Parses `a..b` (half-open) or `a..=b`.
pub fn parse_seed_range(s: &str) -> Result<Vec<u64>> {
    let bad = || BenchError::Config(format!("bad seed range `{s}` (expected a..b)"));
    let (a, b, inclusive) = if let Some((a, b)) = s.split_once("..=") {
        (a, b, true)
    } else if let Some((a, b)) = s.split_once("..") {
        (a, b, false)
    } else {
        let v: u64 = s.trim().parse().map_err(|_| bad())?;
        return Ok(vec![v]);
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    let end = if inclusive { b + 1 } else { b };
    if end <= a {
        return Err(bad());
    }
    Ok((a..end).collect())
}

impl ExperimentConfig {
    /// Accepts the grid form (`tasks`, `optimizers`, `seeds`) or a single
    /// run (`task`, `optimizer`, `seed`). `seeds` may be a list or `"a..b"`.
    pub fn from_json(v: &Json) -> Result<Self> {
        let Json::Object(map) = v else {
            return Err(BenchError::Config("config must be a JSON object".into()));
        };
        let mut m = map.clone();
        for (single, plural) in [("task", "tasks"), ("optimizer", "optimizers"), ("seed", "seeds")] {
            if let Some(x) = m.remove(single) {
                if m.contains_key(plural) {
                    return Err(BenchError::Config(format!("both `{single}` and `{plural}` given")));
                }
                m.insert(plural.into(), Json::Array(vec![x]));
            }
        }
        if let Some(Json::String(s)) = m.get("seeds") {
            let seeds = parse_seed_range(s)?;
            m.insert("seeds".into(), Json::from(seeds));
        }
        let known = ["tasks", "optimizers", "seeds", "n_init", "budget"];
        if let Some(k) = m.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(BenchError::Config(format!("unknown config key `{k}`")));
        }
        let config: Self =
            serde_json::from_value(Json::Object(m)).map_err(|e| BenchError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let v: Json = serde_json::from_str(&text)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() || self.optimizers.is_empty() || self.seeds.is_empty() {
            return Err(BenchError::Config("tasks, optimizers and seeds must be non-empty".into()));
        }
        if self.budget < self.n_init {
            return Err(BenchError::Config(format!(
                "budget {} is below n_init {}",
                self.budget, self.n_init
            )));
        }
        let mut labels = HashSet::new();
        for o in &self.optimizers {
            if !labels.insert(o.label()) {
                return Err(BenchError::Config(format!(
                    "duplicate optimizer label `{}`; give one a `label`",
                    o.label()
                )));
            }
        }
        Ok(())
    }

    /// Runs in (task, optimizer, seed) order.
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut out = Vec::new();
        for task in &self.tasks {
            for o in &self.optimizers {
                for &seed in &self.seeds {
                    out.push(RunSpec {
                        task: task.clone(),
                        label: o.label(),
                        optimizer: o.spec.clone(),
                        n_init: self.n_init,
                        budget: self.budget,
                        seed,
                    });
                }
            }
        }
        out
    }
}

/// Executes one run in memory.
pub fn run_single(spec: &RunSpec) -> Result<(RunRecord, Timing)> {
    if spec.budget < spec.n_init || spec.budget == 0 {
        return Err(BenchError::Config(format!(
            "budget {} must be >= n_init {} and >= 1",
            spec.budget, spec.n_init
        )));
    }
    let task = task_from_id(&spec.task)?;
    let space = task.search_space();
    let mut opt = spec.optimizer.build(space, spec.n_init, spec.seed)?;
    let mut iterations = Vec::with_capacity(spec.budget);
    let mut timing = Timing::default();
    let mut best = f64::INFINITY;
    for i in 1..=spec.budget {
        let t0 = Instant::now();
        let x = opt.suggest()?;
        let t1 = Instant::now();
        let tr = opt.tr_state().map(tr_snapshot);
        let model = opt.diagnostics();
        let y = task.evaluate(&x);
        let t2 = Instant::now();
        if !y.is_finite() {
            return Err(BenchError::Invalid(format!(
                "task `{}` returned a non-finite value at iteration {i}",
                spec.task
            )));
        }
        opt.observe(&x, y)?;
        let t3 = Instant::now();
        best = best.min(y);
        timing.suggest.push((t1 - t0).as_secs_f64());
        timing.evaluate.push((t2 - t1).as_secs_f64());
        timing.observe.push((t3 - t2).as_secs_f64());
        iterations.push(IterationRecord {
            iter: i,
            phase: if i <= spec.n_init { Phase::Init } else { Phase::Search },
            x: space.point_to_json(&x),
            y,
            best_y: best,
            tr,
            model,
        });
    }
    let header = RunHeader {
        version: RECORD_VERSION,
        fingerprint: spec.fingerprint(),
        spec: spec.clone(),
        space: space.to_json(),
    };
    Ok((RunRecord { header, iterations }, timing))
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    /// Records in run order.
    pub records: Vec<RunRecord>,
    pub new_runs: usize,
    pub skipped: usize,
    pub new_evaluations: usize,
}

enum Done {
    Skipped(RunRecord),
    Ran(RunRecord),
}

fn process(spec: &RunSpec, out_dir: &Path) -> Result<Done> {
    let path = out_dir.join(format!("{}.jsonl", spec.file_stem()));
    let expected = spec.fingerprint();
    if path.exists() {
        let existing = RunRecord::read(&path)?;
        if existing.header.fingerprint != expected {
            return Err(BenchError::FingerprintMismatch {
                path,
                expected,
                found: existing.header.fingerprint,
            });
        }
        if existing.is_complete() {
            return Ok(Done::Skipped(existing));
        }
    }
    let (record, timing) = run_single(spec)?;
    record.write(&path)?;
    let timing_path = out_dir.join(format!("{}.timing.json", spec.file_stem()));
    let bytes = serde_json::to_vec(&timing).expect("timing serializes");
    write_atomic(&timing_path, &bytes)?;
    Ok(Done::Ran(record))
}

/// Runs every grid cell not already complete in `out_dir` and writes the
/// index manifest.
pub fn run_grid(config: &ExperimentConfig, out_dir: &Path, workers: usize) -> Result<GridOutcome> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    // Reject incompatible combinations before spending any evaluations.
    for task_id in &config.tasks {
        let task = task_from_id(task_id)?;
        for o in &config.optimizers {
            o.spec
                .build(task.search_space(), config.n_init, config.seeds[0])
                .map_err(|e| BenchError::Config(format!("{} on {task_id}: {e}", o.label())))?;
        }
    }
    let specs = config.runs();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| BenchError::Invalid(e.to_string()))?;
    let done: Vec<Result<Done>> = pool.install(|| specs.par_iter().map(|s| process(s, out_dir)).collect());
    let mut records = Vec::with_capacity(specs.len());
    let (mut new_runs, mut skipped, mut new_evaluations) = (0, 0, 0);
    for d in done {
        match d? {
            Done::Skipped(r) => {
                skipped += 1;
                records.push(r);
            }
            Done::Ran(r) => {
                new_runs += 1;
                new_evaluations += r.iterations.len();
                records.push(r);
            }
        }
    }
    let index: Vec<IndexEntry> = records
        .iter()
        .map(|r| IndexEntry {
            file: format!("{}.jsonl", r.spec().file_stem()),
            task: r.spec().task.clone(),
            optimizer: r.spec().label.clone(),
            seed: r.spec().seed,
            fingerprint: r.header.fingerprint.clone(),
            complete: r.is_complete(),
        })
        .collect();
    let mut bytes = serde_json::to_vec_pretty(&index).expect("index serializes");
    bytes.push(b'\n');
    write_atomic(&out_dir.join(INDEX_FILE), &bytes)?;
    Ok(GridOutcome {
        records,
        new_runs,
        skipped,
        new_evaluations,
    })
}
