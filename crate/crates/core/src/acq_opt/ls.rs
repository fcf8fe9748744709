use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AcqFn, AcqResult, Region};
use crate::error::{Error, Result};
use crate::space::UnitPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LsConfig {
    pub n_random_vertices: usize,
    pub n_greedy_ascent_init: usize,
    pub n_spray: usize,
    pub max_ascent_steps: usize,
}

impl Default for LsConfig {
    fn default() -> Self {
        Self {
            n_random_vertices: 20_000,
            n_greedy_ascent_init: 20,
            n_spray: 10,
            max_ascent_steps: 10_000,
        }
    }
}

/// Exhaustive local search over a purely categorical space: random
/// vertices plus spray neighbors of the incumbent, then greedy ascents from
/// the best starts over the full 1-Hamming neighborhood.
pub fn optimize_ls(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &LsConfig,
    seed: u64,
) -> Result<AcqResult> {
    if region.n_num() > 0 {
        return Err(Error::Incompatible(
            "ls is only applicable to purely categorical spaces".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<(f64, UnitPoint)> = Vec::new();
    for s in region.feasible_seeds(seeds) {
        pool.push((acq(&s), s));
    }
    if let Some((_, incumbent)) = pool.first().cloned() {
        for _ in 0..config.n_spray {
            if let Some(v) = region.random_neighbor(&incumbent, &mut rng) {
                pool.push((acq(&v), v));
            }
        }
    }
    for _ in 0..config.n_random_vertices {
        match region.sample(&mut rng) {
            Some(u) => pool.push((acq(&u), u)),
            None => break,
        }
    }
    if pool.is_empty() {
        return Err(Error::EmptyTrustRegion(
            "local search found no feasible vertex".into(),
        ));
    }
    // Stable sort keeps the incumbent first among equals.
    pool.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = pool[0].clone();
    for (v0, start) in pool.into_iter().take(config.n_greedy_ascent_init.max(1)) {
        let (mut cur_v, mut cur) = (v0, start);
        for _ in 0..config.max_ascent_steps {
            let mut step: Option<(f64, UnitPoint)> = None;
            for n in region.cat_neighbors(&cur) {
                let v = acq(&n);
                if v > cur_v && step.as_ref().is_none_or(|(sv, _)| v > *sv) {
                    step = Some((v, n));
                }
            }
            match step {
                Some((v, n)) => {
                    cur_v = v;
                    cur = n;
                }
                None => break,
            }
        }
        if cur_v > best.0 {
            best = (cur_v, cur);
        }
    }
    Ok(AcqResult {
        point: best.1,
        value: best.0,
    })
}
