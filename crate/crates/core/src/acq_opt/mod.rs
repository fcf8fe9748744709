//! Maximizers of an acquisition function over the unit representation of a
//! space, optionally confined to a trust region.

mod ga;
mod is_hc_gd;
mod ls;
mod mab_gd;
mod sa;

pub use ga::{optimize_ga, optimize_ga_traced, GaConfig};
pub use is_hc_gd::{hill_climb, optimize_is_hc_gd, IsConfig};
pub use ls::{optimize_ls, LsConfig};
pub use mab_gd::{optimize_is_mab_gd, optimize_is_mab_gd_with_stats, MabConfig, MabStats};
pub use sa::{optimize_sa, optimize_sa_traced, SaConfig};

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::space::{SearchSpace, UnitPoint, VariableKind, MAX_REJECTION_ATTEMPTS};
use crate::trust_region::TrustRegionState;

/// What an optimizer maximizes.
pub type AcqFn<'a> = dyn Fn(&UnitPoint) -> f64 + 'a;

#[derive(Debug, Clone, PartialEq)]
pub struct AcqResult {
    pub point: UnitPoint,
    pub value: f64,
}

/// The feasible set: space bounds, an optional trust region and the space's
/// constraints.
#[derive(Debug, Clone, Copy)]
pub struct Region<'a> {
    pub space: &'a SearchSpace,
    pub tr: Option<&'a TrustRegionState>,
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

impl<'a> Region<'a> {
    pub fn new(space: &'a SearchSpace, tr: Option<&'a TrustRegionState>) -> Self {
        Self { space, tr }
    }

    pub fn n_cat(&self) -> usize {
        self.space.n_categorical()
    }

    pub fn n_num(&self) -> usize {
        self.space.n_numeric()
    }

    fn center(&self) -> Option<&'a UnitPoint> {
        self.tr.and_then(|t| t.center.as_ref())
    }

    /// Nominal radius in effect (the full dimension without a TR).
    pub fn nominal_radius(&self) -> usize {
        match (self.tr, self.center()) {
            (Some(t), Some(_)) => t.l_h,
            _ => self.n_cat(),
        }
    }

    pub fn num_bounds(&self, j: usize) -> (f64, f64) {
        self.tr.map_or((0.0, 1.0), |t| t.num_bounds(j))
    }

    fn integer_span(&self, j: usize) -> Option<f64> {
        let i = self.space.numeric_indices()[j];
        match self.space.variables()[i].kind {
            VariableKind::Integer { lower, upper } => Some((upper - lower) as f64),
            _ => None,
        }
    }

    pub fn in_tr(&self, u: &UnitPoint) -> bool {
        self.tr.is_none_or(|t| t.contains(u))
    }

    pub fn feasible(&self, u: &UnitPoint) -> bool {
        self.in_tr(u) && self.space.check_unit_constraints(u)
    }

    /// Clamps numeric coordinates into the box and snaps integers onto
    /// their grid without leaving the box.
    pub fn project(&self, u: &mut UnitPoint) {
        for j in 0..u.num.len() {
            let (lo, hi) = self.num_bounds(j);
            let mut v = u.num[j].clamp(lo, hi);
            if let Some(span) = self.integer_span(j) {
                if span == 0.0 {
                    v = 0.0;
                } else {
                    let lo_g = (lo * span - 1e-9).ceil();
                    let hi_g = (hi * span + 1e-9).floor();
                    let g = if lo_g <= hi_g {
                        round_half_up(v * span).clamp(lo_g, hi_g)
                    } else {
                        let c = self.center().map_or(v, |c| c.num[j]);
                        round_half_up(c * span)
                    };
                    v = g / span;
                }
            }
            u.num[j] = v;
        }
    }

    fn sample_unconstrained<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitPoint {
        let counts = self.space.category_counts();
        let num = (0..self.n_num())
            .map(|j| {
                let (lo, hi) = self.num_bounds(j);
                lo + rng.random::<f64>() * (hi - lo)
            })
            .collect();
        let cat = match self.center() {
            Some(c) => {
                let mut cat = c.cat.clone();
                let mut dims: Vec<usize> = (0..cat.len()).collect();
                let r = self.nominal_radius().min(cat.len());
                for k in 0..r {
                    let pick = rng.random_range(k..dims.len());
                    dims.swap(k, pick);
                    let d = dims[k];
                    cat[d] = rng.random_range(0..counts[d]);
                }
                cat
            }
            None => counts.iter().map(|&k| rng.random_range(0..k)).collect(),
        };
        let mut u = UnitPoint { num, cat };
        self.project(&mut u);
        u
    }

    /// A uniform feasible point (uniform within the TR), or `None` after the
    /// rejection cap.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<UnitPoint> {
        for _ in 0..MAX_REJECTION_ATTEMPTS {
            let u = self.sample_unconstrained(rng);
            if self.feasible(&u) {
                return Some(u);
            }
        }
        None
    }

    /// All feasible points at Hamming distance one from `u`.
    pub fn cat_neighbors(&self, u: &UnitPoint) -> Vec<UnitPoint> {
        let counts = self.space.category_counts();
        let mut out = Vec::new();
        for d in 0..u.cat.len() {
            for c in 0..counts[d] {
                if c == u.cat[d] {
                    continue;
                }
                let mut v = u.clone();
                v.cat[d] = c;
                if self.feasible(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// One random move: a 1-Hamming categorical change or a Gaussian
    /// perturbation of one numeric coordinate. `None` when no feasible move
    /// was found within a few attempts.
    pub fn random_neighbor<R: Rng + ?Sized>(&self, u: &UnitPoint, rng: &mut R) -> Option<UnitPoint> {
        let counts = self.space.category_counts();
        let n_cat = self.n_cat();
        let dims = n_cat + self.n_num();
        for _ in 0..100 {
            let d = rng.random_range(0..dims);
            let mut v = u.clone();
            if d < n_cat {
                if counts[d] < 2 {
                    continue;
                }
                let mut c = rng.random_range(0..counts[d] - 1);
                if c >= u.cat[d] {
                    c += 1;
                }
                v.cat[d] = c;
            } else {
                let j = d - n_cat;
                let (lo, hi) = self.num_bounds(j);
                let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                let step = self
                    .integer_span(j)
                    .filter(|s| *s > 0.0)
                    .map_or(0.1 * (hi - lo).max(1e-3), |s| (0.1 * (hi - lo)).max(1.0 / s));
                v.num[j] += z * step;
                self.project(&mut v);
            }
            if v != *u && self.feasible(&v) {
                return Some(v);
            }
        }
        None
    }

    /// Pulls an infeasible point back toward the TR center by copying
    /// center coordinates, at most `cap` moves. Returns whether feasible.
    pub fn repair<R: Rng + ?Sized>(&self, u: &mut UnitPoint, rng: &mut R, cap: usize) -> bool {
        self.project(u);
        for _ in 0..cap {
            if self.feasible(u) {
                return true;
            }
            let Some(c) = self.center() else {
                // Without a TR only constraints can fail: resample one gene.
                if let Some(v) = self.sample(rng) {
                    let d = rng.random_range(0..u.cat.len() + u.num.len());
                    if d < u.cat.len() {
                        u.cat[d] = v.cat[d];
                    } else {
                        u.num[d - u.cat.len()] = v.num[d - u.cat.len()];
                    }
                    continue;
                }
                return false;
            };
            let differing: Vec<usize> = (0..u.cat.len()).filter(|&d| u.cat[d] != c.cat[d]).collect();
            if !differing.is_empty() {
                let d = differing[rng.random_range(0..differing.len())];
                u.cat[d] = c.cat[d];
            } else if !u.num.is_empty() {
                let j = rng.random_range(0..u.num.len());
                u.num[j] = 0.5 * (u.num[j] + c.num[j]);
                self.project(u);
            } else {
                break;
            }
        }
        self.feasible(u)
    }

    /// Feasible copies of `seeds`.
    pub fn feasible_seeds(&self, seeds: &[UnitPoint]) -> Vec<UnitPoint> {
        seeds.iter().filter(|s| self.feasible(s)).cloned().collect()
    }

    /// A starting point: the first feasible seed, else a feasible sample.
    pub fn start<R: Rng + ?Sized>(&self, seeds: &[UnitPoint], rng: &mut R) -> Result<UnitPoint> {
        if let Some(s) = seeds.iter().find(|s| self.feasible(s)) {
            return Ok(s.clone());
        }
        self.sample(rng).ok_or_else(|| {
            Error::EmptyTrustRegion("no feasible point found inside the trust region".into())
        })
    }
}

/// Points inside the trust region.
pub fn tr_filter(points: &[UnitPoint], tr: &TrustRegionState) -> Vec<UnitPoint> {
    points.iter().filter(|p| tr.contains(p)).cloned().collect()
}

/// Central finite-difference gradient of `f` over the numeric block.
pub(crate) fn numeric_gradient(f: &AcqFn, u: &UnitPoint, h: f64) -> Vec<f64> {
    let mut g = vec![0.0; u.num.len()];
    let mut probe = u.clone();
    for j in 0..u.num.len() {
        let x = u.num[j];
        let up = (x + h).min(1.0);
        let dn = (x - h).max(0.0);
        if up <= dn {
            continue;
        }
        probe.num[j] = up;
        let fu = f(&probe);
        probe.num[j] = dn;
        let fd = f(&probe);
        probe.num[j] = x;
        g[j] = (fu - fd) / (up - dn);
        if !g[j].is_finite() {
            g[j] = 0.0;
        }
    }
    g
}

/// Acquisition optimizer with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcqOptConfig {
    Ls(LsConfig),
    Sa(SaConfig),
    Ga(GaConfig),
    Is(IsConfig),
    MabGd(MabConfig),
}

pub const ACQ_OPT_IDS: &[&str] = &["ls", "sa", "ga", "is", "mab_gd"];

fn merge<T: Serialize + serde::de::DeserializeOwned>(base: T, overrides: Option<&Json>) -> Result<T> {
    let Some(o) = overrides else {
        return Ok(base);
    };
    let mut v = serde_json::to_value(base).expect("config serializes");
    if let (Json::Object(dst), Json::Object(src)) = (&mut v, o) {
        for (k, val) in src {
            if !dst.contains_key(k) {
                return Err(Error::InvalidParameter(format!("unknown override `{k}`")));
            }
            dst.insert(k.clone(), val.clone());
        }
    } else {
        return Err(Error::InvalidParameter("overrides must be a JSON object".into()));
    }
    serde_json::from_value(v).map_err(|e| Error::InvalidParameter(e.to_string()))
}

impl AcqOptConfig {
    /// Defaults for an id, with optional field overrides.
    pub fn from_id(id: &str, overrides: Option<&Json>) -> Result<Self> {
        Ok(match id {
            "ls" => Self::Ls(merge(LsConfig::default(), overrides)?),
            "sa" => Self::Sa(merge(SaConfig::default(), overrides)?),
            "ga" => Self::Ga(merge(GaConfig::default(), overrides)?),
            "is" | "is_hc_gd" => Self::Is(merge(IsConfig::default(), overrides)?),
            "mab_gd" | "is_mab_gd" => Self::MabGd(merge(MabConfig::default(), overrides)?),
            _ => {
                return Err(Error::Unsupported {
                    kind: "acquisition optimizer",
                    id: id.to_string(),
                })
            }
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Ls(_) => "ls",
            Self::Sa(_) => "sa",
            Self::Ga(_) => "ga",
            Self::Is(_) => "is",
            Self::MabGd(_) => "mab_gd",
        }
    }

    pub fn check_space(&self, space: &SearchSpace) -> Result<()> {
        if matches!(self, Self::Ls(_)) && !space.is_categorical_only() {
            return Err(Error::Incompatible(
                "ls is only applicable to purely categorical spaces".into(),
            ));
        }
        Ok(())
    }

    pub fn optimize(
        &self,
        acq: &AcqFn,
        space: &SearchSpace,
        tr: Option<&TrustRegionState>,
        seeds: &[UnitPoint],
        seed: u64,
    ) -> Result<AcqResult> {
        let region = Region::new(space, tr);
        match self {
            Self::Ls(c) => optimize_ls(acq, region, seeds, c, seed),
            Self::Sa(c) => optimize_sa(acq, region, seeds, c, seed),
            Self::Ga(c) => optimize_ga(acq, region, seeds, c, seed),
            Self::Is(c) => optimize_is_hc_gd(acq, region, seeds, c, seed),
            Self::MabGd(c) => optimize_is_mab_gd(acq, region, seeds, c, seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::VariableSpec;
    use crate::trust_region::tr_init;

    #[test]
    fn tr_filter_examples() {
        let space = SearchSpace::new(
            (0..3)
                .map(|i| VariableSpec::categorical(format!("x{i}"), ["a", "b", "c"]))
                .collect(),
        )
        .unwrap();
        let mut tr = tr_init(&space);
        let c = UnitPoint::new(vec![], vec![0, 0, 0]);
        tr.set_center(c.clone(), Some(0.0));
        tr.l_h = 1;
        let far = UnitPoint::new(vec![], vec![1, 1, 0]);
        let near = UnitPoint::new(vec![], vec![0, 2, 0]);
        assert_eq!(tr_filter(&[c.clone(), far.clone(), near.clone()], &tr), vec![c.clone(), near]);
        tr.l_h = 3;
        assert_eq!(tr_filter(&[far.clone()], &tr), vec![far]);
    }

    #[test]
    fn overrides_merge() {
        let o = serde_json::json!({"pop_size": 12});
        match AcqOptConfig::from_id("ga", Some(&o)).unwrap() {
            AcqOptConfig::Ga(g) => {
                assert_eq!(g.pop_size, 12);
                assert_eq!(g.num_iter, 500);
            }
            _ => unreachable!(),
        }
        assert!(AcqOptConfig::from_id("ga", Some(&serde_json::json!({"nope": 1}))).is_err());
        assert!(AcqOptConfig::from_id("lbfgs", None).is_err());
    }
}
