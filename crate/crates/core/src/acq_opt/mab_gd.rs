use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{numeric_gradient, AcqFn, AcqResult, Region};
use crate::error::{Error, Result};
use crate::space::UnitPoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MabConfig {
    pub max_n_iter: usize,
    pub resample_tol: usize,
    pub n_cand: usize,
    pub cont_lr: f64,
    pub cont_iters: usize,
    pub fd_step: f64,
    /// Exploration rate; `None` uses `min(1, sqrt(K ln K / ((e - 1) T)))`.
    pub gamma: Option<f64>,
    /// Step of the loss-based weight update; `None` uses
    /// `min(1, sqrt(8 ln K / (K T)))`.
    pub eta: Option<f64>,
}

impl Default for MabConfig {
    fn default() -> Self {
        Self {
            max_n_iter: 200,
            resample_tol: 500,
            n_cand: 5000,
            cont_lr: 3e-3,
            cont_iters: 100,
            fd_step: 1e-4,
            gamma: None,
            eta: None,
        }
    }
}

/// Per-dimension arm pull counts of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MabStats {
    pub pulls: Vec<Vec<usize>>,
}

fn exp3_gamma(k: usize, horizon: usize) -> f64 {
    if k < 2 {
        return 1.0;
    }
    let k = k as f64;
    (k * k.ln() / ((std::f64::consts::E - 1.0) * horizon.max(1) as f64))
        .sqrt()
        .min(1.0)
}

fn exp3_eta(k: usize, horizon: usize) -> f64 {
    if k < 2 {
        return 1.0;
    }
    let k = k as f64;
    (8.0 * k.ln() / (k * horizon.max(1) as f64)).sqrt().min(1.0)
}

fn draw<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

pub fn optimize_is_mab_gd(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &MabConfig,
    seed: u64,
) -> Result<AcqResult> {
    optimize_is_mab_gd_with_stats(acq, region, seeds, config, seed).map(|(r, _)| r)
}

/// One EXP3 learner per categorical dimension picks the categories; the
/// numeric block starts from the best of `n_cand` random candidates and is
/// refined by gradient ascent. Bandit rewards are acquisition values
/// normalized by the running min and max; the weights take the
/// importance-weighted loss `1 - reward`.
pub fn optimize_is_mab_gd_with_stats(
    acq: &AcqFn,
    region: Region,
    seeds: &[UnitPoint],
    config: &MabConfig,
    seed: u64,
) -> Result<(AcqResult, MabStats)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = region.space.category_counts();
    let n_cat = region.n_cat();
    let n_num = region.n_num();
    let mut weights: Vec<Vec<f64>> = counts.iter().map(|&k| vec![1.0; k]).collect();
    let gammas: Vec<f64> = counts
        .iter()
        .map(|&k| config.gamma.unwrap_or_else(|| exp3_gamma(k, config.max_n_iter)))
        .collect();
    let mut pulls: Vec<Vec<usize>> = counts.iter().map(|&k| vec![0; k]).collect();

    let start = region.start(seeds, &mut rng)?;
    let mut best = (acq(&start), start);
    let (mut r_min, mut r_max) = (best.0, best.0);
    let iters = if n_cat == 0 { 1 } else { config.max_n_iter };

    for _ in 0..iters {
        let probs: Vec<Vec<f64>> = weights
            .iter()
            .zip(&gammas)
            .map(|(w, &g)| {
                let s: f64 = w.iter().sum();
                let k = w.len() as f64;
                w.iter().map(|wi| (1.0 - g) * wi / s + g / k).collect()
            })
            .collect();

        let base_num = best.1.num.clone();
        let mut cand = None;
        for _ in 0..config.resample_tol.max(1) {
            let cat: Vec<usize> = probs.iter().map(|p| draw(p, &mut rng)).collect();
            let u = UnitPoint::new(base_num.clone(), cat);
            if region.feasible(&u) {
                cand = Some(u);
                break;
            }
        }
        let mut u = match cand {
            Some(u) => u,
            None => {
                let cat: Vec<usize> = probs.iter().map(|p| draw(p, &mut rng)).collect();
                let mut u = UnitPoint::new(base_num.clone(), cat);
                if !region.repair(&mut u, &mut rng, n_cat + n_num + 100) {
                    return Err(Error::EmptyTrustRegion(
                        "bandit could not sample a feasible categorical assignment".into(),
                    ));
                }
                u
            }
        };

        let mut value = acq(&u);
        if n_num > 0 {
            for _ in 0..config.n_cand {
                let mut c = u.clone();
                for (j, x) in c.num.iter_mut().enumerate() {
                    let (lo, hi) = region.num_bounds(j);
                    *x = lo + rng.random::<f64>() * (hi - lo);
                }
                region.project(&mut c);
                if region.feasible(&c) {
                    let v = acq(&c);
                    if v > value {
                        value = v;
                        u = c;
                    }
                }
            }
            let mut z = u.num.clone();
            for _ in 0..config.cont_iters {
                let mut probe = u.clone();
                probe.num.clone_from(&z);
                let g = numeric_gradient(acq, &probe, config.fd_step);
                for (j, zj) in z.iter_mut().enumerate() {
                    let (lo, hi) = region.num_bounds(j);
                    *zj = (*zj + config.cont_lr * g[j]).clamp(lo, hi);
                }
                let mut c = u.clone();
                c.num.clone_from(&z);
                region.project(&mut c);
                if region.feasible(&c) {
                    let v = acq(&c);
                    if v > value {
                        value = v;
                        u = c;
                    }
                }
            }
        }

        r_min = r_min.min(value);
        r_max = r_max.max(value);
        let reward = if r_max > r_min {
            (value - r_min) / (r_max - r_min)
        } else {
            0.0
        };
        for d in 0..n_cat {
            let a = u.cat[d];
            pulls[d][a] += 1;
            let eta = config.eta.unwrap_or_else(|| exp3_eta(counts[d], config.max_n_iter));
            weights[d][a] *= (-eta * (1.0 - reward) / probs[d][a]).exp();
            let m = weights[d].iter().copied().fold(f64::MIN, f64::max);
            weights[d].iter_mut().for_each(|w| *w /= m);
        }
        if value > best.0 {
            best = (value, u);
        }
    }
    Ok((
        AcqResult {
            point: best.1,
            value: best.0,
        },
        MabStats { pulls },
    ))
}
