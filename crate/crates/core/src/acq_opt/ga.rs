use std::collections::HashMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{AcqFn, AcqResult, Region};
use crate::error::{Error, Result};
use crate::space::UnitPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub num_iter: usize,
    pub pop_size: usize,
    pub num_parents: usize,
    pub num_elite: usize,
    pub tournament_size: usize,
    /// Per-gene mutation probability; `None` means one over the dimension.
    pub mutation_prob: Option<f64>,
    /// Std of numeric mutations in unit space.
    pub num_mutation_std: f64,
    pub repair_cap: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            num_iter: 500,
            pop_size: 100,
            num_parents: 20,
            num_elite: 10,
            tournament_size: 2,
            mutation_prob: None,
            num_mutation_std: 0.1,
            repair_cap: 100,
        }
    }
}

pub fn optimize_ga(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &GaConfig,
    seed: u64,
) -> Result<AcqResult> {
    optimize_ga_traced(acq, region, seeds, config, seed).map(|(r, _)| r)
}

/// As [`optimize_ga`], also returning the best fitness after every
/// generation.
pub fn optimize_ga_traced(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &GaConfig,
    seed: u64,
) -> Result<(AcqResult, Vec<f64>)> {
    if config.pop_size == 0 || config.num_parents == 0 {
        return Err(Error::InvalidParameter("GA needs pop_size and num_parents >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: HashMap<Vec<u64>, f64> = HashMap::new();
    let mut fitness = |u: &UnitPoint| -> f64 {
        *cache.entry(u.key()).or_insert_with(|| acq(u))
    };

    let mut population: Vec<UnitPoint> = region.feasible_seeds(seeds);
    population.truncate(config.pop_size);
    while population.len() < config.pop_size {
        match region.sample(&mut rng) {
            Some(u) => population.push(u),
            None => break,
        }
    }
    if population.is_empty() {
        return Err(Error::EmptyTrustRegion(
            "GA population could not be initialized inside the trust region".into(),
        ));
    }
    let counts = region.space.category_counts();
    let dim = region.n_cat() + region.n_num();
    let p_mut = config.mutation_prob.unwrap_or(1.0 / dim.max(1) as f64);

    let mut scored: Vec<(f64, UnitPoint)> =
        population.into_iter().map(|u| (fitness(&u), u)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0].clone();
    let mut trace = vec![best.0];

    for _ in 0..config.num_iter {
        let n = scored.len();
        let parents: Vec<usize> = (0..config.num_parents)
            .map(|_| {
                (0..config.tournament_size.max(1))
                    .map(|_| rng.random_range(0..n))
                    .min()
                    .expect("non-empty tournament")
            })
            .collect();
        let n_elite = config.num_elite.min(n);
        let mut next: Vec<(f64, UnitPoint)> = scored[..n_elite].to_vec();
        while next.len() < config.pop_size {
            let a = &scored[parents[rng.random_range(0..parents.len())]].1;
            let b = &scored[parents[rng.random_range(0..parents.len())]].1;
            let mut child = a.clone();
            for d in 0..child.cat.len() {
                if rng.random::<bool>() {
                    child.cat[d] = b.cat[d];
                }
                if rng.random::<f64>() < p_mut {
                    child.cat[d] = rng.random_range(0..counts[d]);
                }
            }
            for j in 0..child.num.len() {
                if rng.random::<bool>() {
                    child.num[j] = b.num[j];
                }
                if rng.random::<f64>() < p_mut {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    child.num[j] += config.num_mutation_std * z;
                }
            }
            if !region.repair(&mut child, &mut rng, config.repair_cap) {
                child = a.clone();
            }
            let f = fitness(&child);
            next.push((f, child));
        }
        // Scores are sorted best first, so the lowest index wins a tournament.
        next.sort_by(|a, b| b.0.total_cmp(&a.0));
        scored = next;
        if scored[0].0 > best.0 {
            best = scored[0].clone();
        }
        trace.push(best.0);
    }
    Ok((
        AcqResult {
            point: best.1,
            value: best.0,
        },
        trace,
    ))
}
