//! Pest control along a chain of stations.
//!
//! At every station the operator either applies no pesticide (pests spread)
//! or one of four pesticides (pests are suppressed, the pesticide's
//! effectiveness decays as tolerance builds up, and repeated purchases of the
//! same product earn a volume discount). The objective is the total spend
//! plus, per station, the fraction of simulated populations whose infestation
//! exceeds a threshold. All randomness comes from a fixed internal seed, so
//! the task is deterministic.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Task;
use crate::space::{Point, SearchSpace, Value, VariableSpec};

/// Every constant of the simulation. Golden values are tied to `version`.
#[derive(Debug, Clone, PartialEq)]
pub struct PestControlConstants {
    pub version: u32,
    pub n_stations: usize,
    pub n_simulations: usize,
    pub seed: u64,
    /// Infestation fraction above which a population counts as infected.
    pub threshold: f64,
    /// Beta(1, b) parameter of the initial infestation fraction.
    pub init_beta: f64,
    /// Beta(1, b) parameter of the per-station spread rate.
    pub spread_beta: f64,
    /// Per-pesticide unit price.
    pub price: [f64; 4],
    /// Per-pesticide discount reached when every station buys that product.
    pub max_discount: [f64; 4],
    /// Per-pesticide Beta(1, b) parameter of the control rate before use.
    pub control_beta: [f64; 4],
    /// Per-pesticide increase of `control_beta` over a full chain of uses.
    pub tolerance_rate: [f64; 4],
}

pub fn pest_constants() -> PestControlConstants {
    PestControlConstants {
        version: 1,
        n_stations: 25,
        n_simulations: 100,
        seed: 0,
        threshold: 0.1,
        init_beta: 30.0,
        spread_beta: 17.0 / 3.0,
        price: [1.0, 0.8, 0.7, 0.5],
        max_discount: [0.2, 0.3, 0.3, 0.0],
        control_beta: [2.0 / 7.0, 3.0 / 7.0, 3.0 / 7.0, 5.0 / 7.0],
        tolerance_rate: [1.0 / 7.0, 2.5 / 7.0, 2.0 / 7.0, 0.5 / 7.0],
    }
}

/// Inverse CDF of Beta(1, b): `1 - (1 - u)^(1/b)`.
fn beta1_quantile(u: f64, b: f64) -> f64 {
    1.0 - (1.0 - u).powf(1.0 / b)
}

#[derive(Debug, Clone)]
pub struct PestControl {
    constants: PestControlConstants,
    space: SearchSpace,
}

impl Default for PestControl {
    fn default() -> Self {
        Self::new()
    }
}

impl PestControl {
    pub fn new() -> Self {
        Self::with_constants(pest_constants())
    }

    pub fn with_constants(constants: PestControlConstants) -> Self {
        let labels = ["none", "pest1", "pest2", "pest3", "pest4"];
        let specs = (0..constants.n_stations)
            .map(|i| VariableSpec::categorical(format!("station{i}"), labels))
            .collect();
        let space = SearchSpace::new(specs).expect("valid pest-control space");
        Self { constants, space }
    }

    pub fn constants(&self) -> &PestControlConstants {
        &self.constants
    }

    /// `(total cost, summed infected fraction)`; the objective is their sum.
    pub fn evaluate_components(&self, x: &Point) -> (f64, f64) {
        let c = &self.constants;
        let actions: Vec<usize> = x
            .0
            .iter()
            .map(|v| match v {
                Value::Cat(k) => *k,
                other => panic!("pest control expects categorical values, got {other:?}"),
            })
            .collect();
        let n = c.n_stations as f64;
        let mut uses = [0usize; 4];
        for &a in &actions {
            if a > 0 {
                uses[a - 1] += 1;
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let mut pests: Vec<f64> = (0..c.n_simulations)
            .map(|_| beta1_quantile(rng.random(), c.init_beta))
            .collect();
        let mut control_beta = c.control_beta;
        let mut cost = 0.0;
        let mut infected = 0.0;
        let mut spread = vec![0.0; c.n_simulations];
        let mut control = vec![0.0; c.n_simulations];
        for &a in &actions {
            // Draw both streams every station so the random sequence does
            // not depend on the chosen actions.
            for s in spread.iter_mut() {
                *s = rng.random();
            }
            for s in control.iter_mut() {
                *s = rng.random();
            }
            infected += pests.iter().filter(|&&p| p > c.threshold).count() as f64
                / c.n_simulations as f64;
            if a == 0 {
                for (p, u) in pests.iter_mut().zip(&spread) {
                    let rate = beta1_quantile(*u, c.spread_beta);
                    *p += rate * (1.0 - *p);
                }
            } else {
                let k = a - 1;
                for (p, u) in pests.iter_mut().zip(&control) {
                    let rate = beta1_quantile(*u, control_beta[k]);
                    *p *= 1.0 - rate;
                }
                control_beta[k] += c.tolerance_rate[k] / n;
                cost += c.price[k] * (1.0 - c.max_discount[k] / n * uses[k] as f64);
            }
        }
        (cost, infected)
    }
}

impl Task for PestControl {
    fn id(&self) -> &str {
        "pest"
    }

    fn search_space(&self) -> &SearchSpace {
        &self.space
    }

    fn evaluate(&self, x: &Point) -> f64 {
        let (cost, infected) = self.evaluate_components(x);
        cost + infected
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let t = PestControl::new();
        let p = t.search_space().sample_uniform(1, 3).unwrap().remove(0);
        assert_eq!(t.evaluate(&p).to_bits(), t.evaluate(&p).to_bits());
    }

    #[test]
    fn constant_action_cost_unrolled() {
        let t = PestControl::new();
        let c = pest_constants();
        for k in 1..=4 {
            let (cost, _) = t.evaluate_components(&Point(vec![Value::Cat(k); 25]));
            // Every station pays price * (1 - max_discount * 25 / 25).
            let mut expected = 0.0;
            for _ in 0..25 {
                expected += c.price[k - 1] * (1.0 - c.max_discount[k - 1] / 25.0 * 25.0);
            }
            assert!((cost - expected).abs() < 1e-12, "pesticide {k}: {cost} vs {expected}");
        }
        let (cost, infected) = t.evaluate_components(&Point(vec![Value::Cat(0); 25]));
        assert_eq!(cost, 0.0);
        assert!(infected > 0.0 && infected <= 25.0);
    }

    #[test]
    fn quantile_matches_beta_mean() {
        // Mean of Beta(1, b) is 1 / (1 + b); midpoint-rule integral of the quantile.
        let b = 17.0 / 3.0;
        let m = 200_000;
        let mean: f64 = (0..m).map(|i| beta1_quantile((i as f64 + 0.5) / m as f64, b)).sum::<f64>() / m as f64;
        assert!((mean - 1.0 / (1.0 + b)).abs() < 1e-6);
    }
}
