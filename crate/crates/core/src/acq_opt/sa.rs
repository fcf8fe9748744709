use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AcqFn, AcqResult, Region};
use crate::error::Result;
use crate::space::UnitPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaConfig {
    pub num_iter: usize,
    pub n_restarts: usize,
    pub init_temp: f64,
    /// Geometric factor applied to the temperature after every iteration.
    pub cooling: f64,
    /// Early stop after this many iterations without a new best.
    pub tolerance: usize,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            num_iter: 100,
            n_restarts: 3,
            init_temp: 1.0,
            cooling: 0.95,
            tolerance: 100,
        }
    }
}

/// Metropolis walk over random neighbors with geometric cooling. The first
/// restart starts from the incumbent seed.
pub fn optimize_sa(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &SaConfig,
    seed: u64,
) -> Result<AcqResult> {
    optimize_sa_traced(acq, region, seeds, config, seed).map(|(r, _)| r)
}

/// As [`optimize_sa`], also returning the current value after every
/// iteration, one series per restart.
pub fn optimize_sa_traced(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &SaConfig,
    seed: u64,
) -> Result<(AcqResult, Vec<Vec<f64>>)> {
    let mut traces = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let feasible = region.feasible_seeds(seeds);
    let mut best: Option<(f64, UnitPoint)> = None;
    for r in 0..config.n_restarts.max(1) {
        let start = match (r, feasible.first()) {
            (0, Some(s)) => s.clone(),
            _ => region.start(&[], &mut rng)?,
        };
        let mut cur_v = acq(&start);
        let mut cur = start;
        if best.as_ref().is_none_or(|(b, _)| cur_v > *b) {
            best = Some((cur_v, cur.clone()));
        }
        let mut temp = config.init_temp;
        let mut stale = 0;
        let mut trace = vec![cur_v];
        for _ in 0..config.num_iter {
            let Some(cand) = region.random_neighbor(&cur, &mut rng) else {
                break;
            };
            let v = acq(&cand);
            let delta = v - cur_v;
            let accept = delta >= 0.0 || (temp > 0.0 && rng.random::<f64>() < (delta / temp).exp());
            if accept {
                cur = cand;
                cur_v = v;
            }
            trace.push(cur_v);
            let b = best.as_mut().expect("set above");
            if cur_v > b.0 {
                *b = (cur_v, cur.clone());
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.tolerance {
                    break;
                }
            }
            temp *= config.cooling;
        }
        traces.push(trace);
    }
    let (value, point) = best.expect("at least one restart");
    Ok((AcqResult { point, value }, traces))
}
