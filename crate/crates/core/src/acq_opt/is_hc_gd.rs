use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{numeric_gradient, AcqFn, AcqResult, Region};
use crate::error::Result;
use crate::space::UnitPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsConfig {
    pub n_iter: usize,
    pub n_restarts: usize,
    pub max_n_perturb: usize,
    pub num_lr: f64,
    pub num_inner_iters: usize,
    pub fd_step: f64,
    pub tolerance: usize,
}

impl Default for IsConfig {
    fn default() -> Self {
        Self {
            n_iter: 100,
            n_restarts: 3,
            max_n_perturb: 20,
            num_lr: 1e-3,
            num_inner_iters: 20,
            fd_step: 1e-4,
            tolerance: 100,
        }
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// Ascent step on `x` along gradient `g`.
    fn step(&mut self, x: &mut [f64], g: &[f64], lr: f64) {
        self.t += 1;
        let (b1, b2): (f64, f64) = (0.9, 0.999);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        for i in 0..x.len() {
            self.m[i] = b1 * self.m[i] + (1.0 - b1) * g[i];
            self.v[i] = b2 * self.v[i] + (1.0 - b2) * g[i] * g[i];
            x[i] += lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-8);
        }
    }
}

/// Interleaved search: a hill-climbing step over at most `max_n_perturb`
/// random 1-Hamming moves, then Adam ascent on the numeric block with
/// finite-difference gradients. Adam state persists within a restart.
pub fn optimize_is_hc_gd(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &IsConfig,
    seed: u64,
) -> Result<AcqResult> {
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
        // Relaxed numeric iterate; `cur` holds its projection.
        let mut z = cur.num.clone();
        let mut adam = Adam::new(z.len());
        let mut stale = 0;
        for _ in 0..config.n_iter {
            let mut improved = false;
            if region.n_cat() > 0 {
                let mut moves = region.cat_neighbors(&cur);
                let k = config.max_n_perturb.min(moves.len());
                for i in 0..k {
                    let pick = rng.random_range(i..moves.len());
                    moves.swap(i, pick);
                }
                let mut step: Option<(f64, UnitPoint)> = None;
                for m in moves.into_iter().take(k) {
                    let v = acq(&m);
                    if v > cur_v && step.as_ref().is_none_or(|(s, _)| v > *s) {
                        step = Some((v, m));
                    }
                }
                if let Some((v, m)) = step {
                    cur_v = v;
                    cur = m;
                    improved = true;
                }
            }
            if region.n_num() > 0 {
                for _ in 0..config.num_inner_iters {
                    let mut probe = cur.clone();
                    probe.num.clone_from(&z);
                    let g = numeric_gradient(acq, &probe, config.fd_step);
                    adam.step(&mut z, &g, config.num_lr);
                    for (j, zj) in z.iter_mut().enumerate() {
                        let (lo, hi) = region.num_bounds(j);
                        *zj = zj.clamp(lo, hi);
                    }
                    let mut cand = cur.clone();
                    cand.num.clone_from(&z);
                    region.project(&mut cand);
                    if region.feasible(&cand) {
                        let v = acq(&cand);
                        if v > cur_v {
                            cur_v = v;
                            cur = cand;
                            improved = true;
                        }
                    }
                }
            }
            if improved {
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.tolerance {
                    break;
                }
            }
        }
        if best.as_ref().is_none_or(|(b, _)| cur_v > *b) {
            best = Some((cur_v, cur));
        }
    }
    let (value, point) = best.expect("at least one restart");
    Ok(AcqResult { point, value })
}

/// Pure hill climbing; identical to [`optimize_is_hc_gd`] on a space
/// without numeric dims.
pub fn hill_climb(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &IsConfig,
    seed: u64,
) -> Result<AcqResult> {
    let cfg = IsConfig {
        num_inner_iters: 0,
        ..config.clone()
    };
    optimize_is_hc_gd(acq, region, seeds, &cfg, seed)
}
