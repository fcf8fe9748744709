//! Rank curves over (task, seed) cells.

use std::collections::{BTreeMap, BTreeSet};

use mixbo::engine::OptimizerSpec;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::records::RunRecord;
use crate::stats::average_ranks;

/// Grouping used before ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    Optimizer,
    Model,
    AcqOpt,
    Acq,
    Tr,
}

pub const FACETS: &[Facet] = &[Facet::Optimizer, Facet::Model, Facet::AcqOpt, Facet::Acq, Facet::Tr];

impl Facet {
    pub fn id(&self) -> &'static str {
        match self {
            Self::Optimizer => "optimizer",
            Self::Model => "model",
            Self::AcqOpt => "acq_opt",
            Self::Acq => "acq",
            Self::Tr => "tr",
        }
    }

    /// Group of a record under this facet; baselines form their own group.
    pub fn group(&self, record: &RunRecord) -> String {
        let spec = record.spec();
        if *self == Self::Optimizer {
            return spec.label.clone();
        }
        match &spec.optimizer {
            OptimizerSpec::Baseline { baseline, .. } => baseline.clone(),
            OptimizerSpec::Bo {
                model,
                acq,
                acq_opt,
                tr,
                ..
            } => match self {
                Self::Model => model.clone(),
                Self::AcqOpt => acq_opt.clone(),
                Self::Acq => acq.clone(),
                Self::Tr => tr.clone(),
                Self::Optimizer => unreachable!(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankTable {
    pub facet: Facet,
    /// Group names, sorted.
    pub groups: Vec<String>,
    /// (task, seed) cells, sorted.
    pub cells: Vec<(String, u64)>,
    /// `ranks[step][cell][group]`.
    pub ranks: Vec<Vec<Vec<f64>>>,
    /// `mean[step][group]`.
    pub mean: Vec<Vec<f64>>,
    /// Standard error over cells, `se[step][group]`.
    pub se: Vec<Vec<f64>>,
}

impl RankTable {
    pub fn n_steps(&self) -> usize {
        self.mean.len()
    }

    pub fn final_mean(&self) -> &[f64] {
        self.mean.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Per-cell best-so-far values `[cell][group][step]`, averaging the members
/// of each group. Errors unless every optimizer covers every cell with the
/// same number of steps.
pub fn cell_values(
    records: &[RunRecord],
    facet: Facet,
) -> Result<(Vec<String>, Vec<(String, u64)>, Vec<Vec<Vec<f64>>>)> {
    if records.is_empty() {
        return Err(BenchError::IncompleteGrid("no records".into()));
    }
    let optimizers: BTreeSet<String> = records.iter().map(|r| r.spec().label.clone()).collect();
    let cells: BTreeSet<(String, u64)> =
        records.iter().map(|r| (r.spec().task.clone(), r.spec().seed)).collect();
    let mut by_key: BTreeMap<(String, u64, String), &RunRecord> = BTreeMap::new();
    for r in records {
        let key = (r.spec().task.clone(), r.spec().seed, r.spec().label.clone());
        if by_key.insert(key.clone(), r).is_some() {
            return Err(BenchError::IncompleteGrid(format!("duplicate record for {key:?}")));
        }
    }
    let steps = records[0].iterations.len();
    if steps == 0 {
        return Err(BenchError::IncompleteGrid("empty record".into()));
    }
    let mut groups_of: BTreeMap<String, String> = BTreeMap::new();
    for r in records {
        if !r.is_complete() || r.iterations.len() != steps {
            return Err(BenchError::IncompleteGrid(format!(
                "{} on {} seed {} has {} of {} steps",
                r.spec().label,
                r.spec().task,
                r.spec().seed,
                r.iterations.len(),
                steps
            )));
        }
        groups_of.insert(r.spec().label.clone(), facet.group(r));
    }
    let groups: Vec<String> = groups_of.values().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let mut values = Vec::with_capacity(cells.len());
    for (task, seed) in &cells {
        let mut sums = vec![vec![0.0; steps]; groups.len()];
        let mut counts = vec![0usize; groups.len()];
        for o in &optimizers {
            let r = by_key.get(&(task.clone(), *seed, o.clone())).ok_or_else(|| {
                BenchError::IncompleteGrid(format!("{o} is missing on {task} seed {seed}"))
            })?;
            let g = groups.iter().position(|g| *g == groups_of[o]).expect("known group");
            for (s, v) in sums[g].iter_mut().zip(r.best_so_far()) {
                *s += v;
            }
            counts[g] += 1;
        }
        for (s, c) in sums.iter_mut().zip(&counts) {
            s.iter_mut().for_each(|v| *v /= *c as f64);
        }
        values.push(sums);
    }
    Ok((groups, cells.into_iter().collect(), values))
}

/// Ranks groups by best-so-far within every cell at every step (1 = best,
/// ties averaged), then averages over cells.
pub fn rank_curves(records: &[RunRecord], facet: Facet) -> Result<RankTable> {
    let (groups, cells, values) = cell_values(records, facet)?;
    let steps = values[0][0].len();
    let k = groups.len();
    let n = cells.len() as f64;
    let mut ranks = Vec::with_capacity(steps);
    let mut mean = Vec::with_capacity(steps);
    let mut se = Vec::with_capacity(steps);
    for step in 0..steps {
        let per_cell: Vec<Vec<f64>> = values
            .iter()
            .map(|cell| average_ranks(&cell.iter().map(|g| g[step]).collect::<Vec<_>>()))
            .collect();
        let m: Vec<f64> = (0..k).map(|g| per_cell.iter().map(|r| r[g]).sum::<f64>() / n).collect();
        let s: Vec<f64> = (0..k)
            .map(|g| {
                if per_cell.len() < 2 {
                    return 0.0;
                }
                let var = per_cell.iter().map(|r| (r[g] - m[g]).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            })
            .collect();
        ranks.push(per_cell);
        mean.push(m);
        se.push(s);
    }
    Ok(RankTable {
        facet,
        groups,
        cells,
        ranks,
        mean,
        se,
    })
}
