use std::collections::{HashSet, VecDeque};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use super::Optimizer;
use crate::acq_opt::Region;
use crate::error::{Error, Result};
use crate::space::{Point, SearchSpace, UnitPoint};

pub const BASELINE_IDS: &[&str] = &["rs", "hc", "ga", "sa", "mab"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Rs,
    Hc,
    Ga,
    Sa,
    Mab,
}

impl BaselineKind {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "rs" | "random" => Self::Rs,
            "hc" => Self::Hc,
            "ga" => Self::Ga,
            "sa" => Self::Sa,
            "mab" => Self::Mab,
            _ => {
                return Err(Error::Unsupported {
                    kind: "baseline",
                    id: id.to_string(),
                })
            }
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Rs => "rs",
            Self::Hc => "hc",
            Self::Ga => "ga",
            Self::Sa => "sa",
            Self::Mab => "mab",
        }
    }
}

/// Tunables shared by the baselines; each kind reads only its own fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub ga_pop_size: usize,
    pub ga_tournament_size: usize,
    /// Per-gene mutation probability; `None` means 1/d.
    pub ga_mutation_prob: Option<f64>,
    pub ga_num_mutation_std: f64,
    pub sa_init_temp: f64,
    pub sa_cooling: f64,
    /// EXP3 exploration rate; `None` picks it from the arm count.
    pub mab_gamma: Option<f64>,
    pub max_dedup_attempts: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            ga_pop_size: 20,
            ga_tournament_size: 2,
            ga_mutation_prob: None,
            ga_num_mutation_std: 0.1,
            sa_init_temp: 1.0,
            sa_cooling: 0.99,
            mab_gamma: None,
            max_dedup_attempts: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub n_init: usize,
    pub seed: u64,
    pub params: BaselineParams,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, n_init: usize, seed: u64) -> Self {
        Self {
            kind,
            n_init,
            seed,
            params: BaselineParams::default(),
        }
    }

    /// Defaults for `kind` with `overrides` merged into the params.
    pub fn from_id(kind: &str, n_init: usize, seed: u64, overrides: &Json) -> Result<Self> {
        let kind = BaselineKind::parse(kind)?;
        let mut v = serde_json::to_value(BaselineParams::default()).expect("params serialize");
        match overrides {
            Json::Null => {}
            Json::Object(src) => {
                let dst = v.as_object_mut().expect("object");
                for (k, val) in src {
                    if !dst.contains_key(k) {
                        return Err(Error::InvalidParameter(format!(
                            "unknown baseline override `{k}`"
                        )));
                    }
                    dst.insert(k.clone(), val.clone());
                }
            }
            _ => return Err(Error::InvalidParameter("overrides must be a JSON object".into())),
        }
        let params = serde_json::from_value(v).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(Self {
            kind,
            n_init,
            seed,
            params,
        })
    }
}

/// State of the search rule behind a baseline.
enum Rule {
    Rs,
    Hc,
    Ga { queue: VecDeque<UnitPoint> },
    Sa { current: Option<(UnitPoint, f64)>, temp: f64 },
    Mab { weights: Vec<Vec<f64>>, gamma: f64 },
}

pub struct Baseline {
    config: BaselineConfig,
    space: SearchSpace,
    init: Vec<Point>,
    points: Vec<Point>,
    units: Vec<UnitPoint>,
    ys: Vec<f64>,
    seen: HashSet<Vec<u64>>,
    best: Option<usize>,
    pending: Option<(Point, UnitPoint)>,
    rng: ChaCha8Rng,
    rule: Rule,
}

impl Baseline {
    pub fn new(config: BaselineConfig, space: SearchSpace) -> Result<Self> {
        let p = &config.params;
        if config.kind != BaselineKind::Rs && config.n_init < 1 {
            return Err(Error::InvalidParameter("n_init must be >= 1".into()));
        }
        if p.ga_pop_size < 2 || p.ga_tournament_size < 1 || p.max_dedup_attempts < 1 {
            return Err(Error::InvalidParameter(
                "ga_pop_size >= 2, ga_tournament_size >= 1 and max_dedup_attempts >= 1 required"
                    .into(),
            ));
        }
        if !(p.sa_init_temp > 0.0) || !(p.sa_cooling > 0.0 && p.sa_cooling <= 1.0) {
            return Err(Error::InvalidParameter(
                "sa_init_temp must be > 0 and sa_cooling in (0, 1]".into(),
            ));
        }
        if let Some(g) = p.mab_gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::InvalidParameter(format!("mab_gamma must be in (0, 1], got {g}")));
            }
        }
        let rule = match config.kind {
            BaselineKind::Rs => Rule::Rs,
            BaselineKind::Hc => Rule::Hc,
            BaselineKind::Ga => Rule::Ga {
                queue: VecDeque::new(),
            },
            BaselineKind::Sa => Rule::Sa {
                current: None,
                temp: p.sa_init_temp,
            },
            BaselineKind::Mab => {
                if !space.is_categorical_only() {
                    return Err(Error::Incompatible(
                        "the mab baseline needs a purely categorical space".into(),
                    ));
                }
                let counts = space.category_counts();
                let k = counts.iter().copied().max().unwrap_or(1).max(2) as f64;
                let gamma = p.mab_gamma.unwrap_or_else(|| (k.ln() / k).sqrt().clamp(0.01, 1.0));
                Rule::Mab {
                    weights: counts.iter().map(|&c| vec![1.0; c]).collect(),
                    gamma,
                }
            }
        };
        // rs draws every point from one seeded stream, so its sequence is
        // the uniform design itself.
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let init = if config.kind == BaselineKind::Rs {
            Vec::new()
        } else {
            let init = space.sample_uniform_with(config.n_init, &mut rng)?;
            rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(1);
            init
        };
        Ok(Self {
            config,
            space,
            init,
            points: Vec::new(),
            units: Vec::new(),
            ys: Vec::new(),
            seen: HashSet::new(),
            best: None,
            pending: None,
            rng,
            rule,
        })
    }

    pub fn config(&self) -> &BaselineConfig {
        &self.config
    }

    fn taken(&self, u: &UnitPoint) -> bool {
        self.seen.contains(&self.space.decode_unchecked(u).key())
    }

    fn uniform(&mut self) -> Result<UnitPoint> {
        let p = self.space.sample_one(&mut self.rng)?;
        self.space.transform(&p)
    }

    /// A fresh uniform point, preferring unseen ones.
    fn fresh(&mut self) -> Result<UnitPoint> {
        let mut u = self.uniform()?;
        for _ in 1..self.config.params.max_dedup_attempts {
            if !self.taken(&u) {
                break;
            }
            u = self.uniform()?;
        }
        Ok(u)
    }

    /// An unseen random neighbor of `u`, or a fresh point if none is found.
    fn neighbor_of(&mut self, u: &UnitPoint) -> Result<UnitPoint> {
        let region = Region::new(&self.space, None);
        for _ in 0..self.config.params.max_dedup_attempts {
            match region.random_neighbor(u, &mut self.rng) {
                Some(v) if !self.taken(&v) => return Ok(v),
                Some(_) => {}
                None => break,
            }
        }
        self.fresh()
    }

    fn ga_generation(&mut self) -> Result<VecDeque<UnitPoint>> {
        let p = self.config.params.clone();
        let mut order: Vec<usize> = (0..self.ys.len()).collect();
        order.sort_by(|&a, &b| self.ys[a].total_cmp(&self.ys[b]));
        order.truncate(p.ga_pop_size);
        let parents: Vec<UnitPoint> = order.iter().map(|&i| self.units[i].clone()).collect();
        let counts = self.space.category_counts();
        let d = counts.len() + self.space.n_numeric();
        let mut_prob = p.ga_mutation_prob.unwrap_or(1.0 / d.max(1) as f64);
        let region = Region::new(&self.space, None);
        let mut out = VecDeque::new();
        let mut batch: HashSet<Vec<u64>> = HashSet::new();
        let mut attempts = 0;
        while out.len() < p.ga_pop_size && attempts < p.ga_pop_size * p.max_dedup_attempts {
            attempts += 1;
            // Population is sorted, so the lowest sampled index wins.
            let mut pick = || {
                (0..p.ga_tournament_size)
                    .map(|_| self.rng.random_range(0..parents.len()))
                    .min()
                    .unwrap()
            };
            let (a, b) = (pick(), pick());
            let (pa, pb) = (&parents[a], &parents[b]);
            let mut child = pa.clone();
            for i in 0..child.cat.len() {
                if self.rng.random::<bool>() {
                    child.cat[i] = pb.cat[i];
                }
                if counts[i] > 1 && self.rng.random::<f64>() < mut_prob {
                    child.cat[i] = self.rng.random_range(0..counts[i]);
                }
            }
            for j in 0..child.num.len() {
                if self.rng.random::<bool>() {
                    child.num[j] = pb.num[j];
                }
                if self.rng.random::<f64>() < mut_prob {
                    let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut self.rng);
                    child.num[j] = (child.num[j] + p.ga_num_mutation_std * z).clamp(0.0, 1.0);
                }
            }
            if !region.repair(&mut child, &mut self.rng, 100) {
                continue;
            }
            let key = self.space.decode_unchecked(&child).key();
            if self.seen.contains(&key) || !batch.insert(key) {
                continue;
            }
            out.push_back(child);
        }
        if out.is_empty() {
            out.push_back(self.fresh()?);
        }
        Ok(out)
    }

    fn mab_draw(&mut self) -> Result<UnitPoint> {
        let Rule::Mab { weights, gamma } = &self.rule else {
            unreachable!()
        };
        let probs: Vec<Vec<f64>> = weights.iter().map(|w| exp3_probs(w, *gamma)).collect();
        let mut last = None;
        for _ in 0..self.config.params.max_dedup_attempts.max(500) {
            let cat: Vec<usize> = probs
                .iter()
                .map(|p| {
                    let r: f64 = self.rng.random();
                    let mut acc = 0.0;
                    for (i, pi) in p.iter().enumerate() {
                        acc += pi;
                        if r < acc {
                            return i;
                        }
                    }
                    p.len() - 1
                })
                .collect();
            let u = UnitPoint::new(vec![], cat);
            if self.space.check_unit_constraints(&u) {
                if !self.taken(&u) {
                    return Ok(u);
                }
                last = Some(u);
            }
        }
        match last {
            Some(u) => Ok(u),
            None => self.fresh(),
        }
    }

    fn next_point(&mut self) -> Result<UnitPoint> {
        if self.config.kind == BaselineKind::Rs {
            return self.uniform();
        }
        if self.points.len() < self.init.len() {
            let p = &self.init[self.points.len()];
            return self.space.transform(p);
        }
        match &mut self.rule {
            Rule::Rs => unreachable!(),
            Rule::Hc => {
                let b = self.units[self.best.expect("observed")].clone();
                self.neighbor_of(&b)
            }
            Rule::Ga { queue } => {
                if let Some(u) = queue.pop_front() {
                    return Ok(u);
                }
                let mut q = self.ga_generation()?;
                let u = q.pop_front().expect("non-empty generation");
                if let Rule::Ga { queue } = &mut self.rule {
                    *queue = q;
                }
                Ok(u)
            }
            Rule::Sa { current, .. } => {
                let c = match current {
                    Some((c, _)) => c.clone(),
                    None => self.units[self.best.expect("observed")].clone(),
                };
                self.neighbor_of(&c)
            }
            Rule::Mab { .. } => self.mab_draw(),
        }
    }
}

fn exp3_probs(w: &[f64], gamma: f64) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    let k = w.len() as f64;
    w.iter().map(|wi| (1.0 - gamma) * wi / s + gamma / k).collect()
}

impl Optimizer for Baseline {
    fn name(&self) -> String {
        self.config.kind.id().to_string()
    }

    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn suggest(&mut self) -> Result<Point> {
        if self.pending.is_some() {
            return Err(Error::Protocol("suggest called with an unobserved suggestion".into()));
        }
        let u = self.next_point()?;
        let p = self.space.decode_unchecked(&u);
        self.pending = Some((p.clone(), u));
        Ok(p)
    }

    fn observe(&mut self, x: &Point, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::InvalidData(format!("observed value must be finite, got {y}")));
        }
        let Some((p, u)) = self.pending.take() else {
            return Err(Error::Protocol("observe called without a pending suggestion".into()));
        };
        if p.key() != x.key() {
            self.pending = Some((p, u));
            return Err(Error::Protocol(
                "observed point does not match the pending suggestion".into(),
            ));
        }
        let in_init = self.points.len() < self.init.len();
        self.seen.insert(p.key());
        self.points.push(p);
        self.units.push(u.clone());
        self.ys.push(y);
        let i = self.ys.len() - 1;
        if self.best.is_none_or(|b| y < self.ys[b]) {
            self.best = Some(i);
        }
        let spread = std_dev(&self.ys);
        let (lo, hi) = self
            .ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        let cooling = self.config.params.sa_cooling;
        match &mut self.rule {
            Rule::Sa { current, temp } if !in_init => {
                let accept = match current {
                    None => true,
                    Some((_, yc)) if y <= *yc => true,
                    Some((_, yc)) => {
                        let scale = *temp * if spread > 0.0 { spread } else { 1.0 };
                        self.rng.random::<f64>() < (-(y - *yc) / scale).exp()
                    }
                };
                if accept {
                    *current = Some((u, y));
                }
                *temp *= cooling;
            }
            Rule::Mab { weights, gamma } => {
                // Reward is the normalized negated objective in [0, 1].
                let reward = if hi > lo { (hi - y) / (hi - lo) } else { 0.0 };
                for (d, w) in weights.iter_mut().enumerate() {
                    let probs = exp3_probs(w, *gamma);
                    let arm = u.cat[d];
                    let k = w.len() as f64;
                    w[arm] *= (*gamma * reward / (probs[arm] * k)).exp();
                    let m = w.iter().copied().fold(0.0, f64::max);
                    w.iter_mut().for_each(|wi| *wi /= m);
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn best(&self) -> Option<(Point, f64)> {
        self.best.map(|i| (self.points[i].clone(), self.ys[i]))
    }

    fn n_observed(&self) -> usize {
        self.points.len()
    }

    fn diagnostics(&self) -> Option<Json> {
        match &self.rule {
            Rule::Sa { temp, .. } => Some(json!({ "temperature": temp })),
            Rule::Mab { gamma, .. } => Some(json!({ "gamma": gamma })),
            _ => None,
        }
    }
}

fn std_dev(y: &[f64]) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let n = y.len() as f64;
    let m = y.iter().sum::<f64>() / n;
    (y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}
