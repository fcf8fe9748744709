use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use super::{BoConfig, ModelKind, Optimizer};
use crate::acq_opt::{AcqOptConfig, Region};
use crate::acquisitions::{Acquisition, AcquisitionKind};
use crate::error::{Error, Result};
use crate::space::{Point, SearchSpace, UnitPoint};
use crate::surrogates::{
    gp_fit, hs_fit, Dataset, GpFitOptions, GpModel, HorseshoeOptions, Kernel, Surrogate,
};
use crate::trust_region::{TrUpdate, TrustRegionConfig, TrustRegionState};

/// Stream id of the optimizer RNG, distinct from the initial-design stream.
const OPTIMIZER_STREAM: u64 = 1;

fn parse_section<T: serde::de::DeserializeOwned + serde::Serialize + Default>(
    config: &BoConfig,
    name: &str,
) -> Result<T> {
    let mut v = serde_json::to_value(T::default()).expect("defaults serialize");
    if let Some(o) = config.override_section(name) {
        let (Json::Object(dst), Json::Object(src)) = (&mut v, o) else {
            return Err(Error::InvalidParameter(format!("override `{name}` must be an object")));
        };
        for (k, val) in src {
            if !dst.contains_key(k) {
                return Err(Error::InvalidParameter(format!("unknown override `{name}.{k}`")));
            }
            dst.insert(k.clone(), val.clone());
        }
    }
    serde_json::from_value(v).map_err(|e| Error::InvalidParameter(e.to_string()))
}

pub struct BoOptimizer {
    config: BoConfig,
    space: SearchSpace,
    model: ModelKind,
    acq: AcquisitionKind,
    acq_opt: AcqOptConfig,
    gp_options: GpFitOptions,
    hs_options: HorseshoeOptions,
    tr: Option<TrustRegionState>,
    init: Vec<Point>,
    points: Vec<Point>,
    units: Vec<UnitPoint>,
    ys: Vec<f64>,
    seen: HashSet<Vec<u64>>,
    best: Option<usize>,
    pending: Vec<Point>,
    hallucinated: Vec<(UnitPoint, f64)>,
    warm_start: Option<Vec<f64>>,
    rng: ChaCha8Rng,
    last_diagnostics: Option<Json>,
}

/// Builds a BO optimizer after checking the configuration.
pub fn bo_build(config: BoConfig, space: SearchSpace) -> Result<BoOptimizer> {
    config.validate(&space)?;
    let model = ModelKind::parse(&config.model, config.seed)?;
    let acq = AcquisitionKind::parse(&config.acq)?;
    let acq_opt = AcqOptConfig::from_id(&config.acq_opt, config.override_section("acq_opt"))?;
    let gp_options: GpFitOptions = parse_section(&config, "gp")?;
    let hs_options: HorseshoeOptions = parse_section(&config, "hs")?;
    let tr = if config.uses_tr()? {
        let tr_config: TrustRegionConfig = parse_section(&config, "tr")?;
        Some(TrustRegionState::new(&space, tr_config))
    } else {
        None
    };
    let init = space.sample_uniform(config.n_init, config.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(OPTIMIZER_STREAM);
    Ok(BoOptimizer {
        config,
        space,
        model,
        acq,
        acq_opt,
        gp_options,
        hs_options,
        tr,
        init,
        points: Vec::new(),
        units: Vec::new(),
        ys: Vec::new(),
        seen: HashSet::new(),
        best: None,
        pending: Vec::new(),
        hallucinated: Vec::new(),
        warm_start: None,
        rng,
        last_diagnostics: None,
    })
}

impl BoOptimizer {
    pub fn config(&self) -> &BoConfig {
        &self.config
    }

    /// Observed data only; hallucinated targets are kept apart.
    pub fn dataset(&self) -> Dataset {
        Dataset {
            x: self.units.clone(),
            y: self.ys.clone(),
        }
    }

    pub fn n_hallucinated(&self) -> usize {
        self.hallucinated.len()
    }

    pub fn best_y(&self) -> Option<f64> {
        self.best.map(|i| self.ys[i])
    }

    fn in_init_phase(&self) -> bool {
        self.points.len() + self.pending.len() < self.init.len()
    }

    fn kernel_config(&self) -> Option<&crate::surrogates::KernelConfig> {
        match &self.model {
            ModelKind::Gp(k) => Some(k),
            ModelKind::Horseshoe => None,
        }
    }

    /// Training set: in-TR observations (all of them if fewer than two lie
    /// in the TR), plus current hallucinations.
    fn training_data(&self) -> Dataset {
        let mut data = Dataset::default();
        if let Some(tr) = &self.tr {
            for (u, y) in self.units.iter().zip(&self.ys) {
                if tr.contains(u) {
                    data.push(u.clone(), *y);
                }
            }
        }
        if data.len() < 2 {
            data = self.dataset();
        }
        for (u, y) in &self.hallucinated {
            data.push(u.clone(), *y);
        }
        data
    }

    fn fit(&mut self, data: &Dataset) -> Result<Surrogate> {
        match &self.model {
            ModelKind::Gp(k) => {
                let kernel = Kernel::new(k.clone(), &self.space)?;
                let gp = gp_fit(kernel, data, &self.gp_options, self.warm_start.as_deref())
                    .map_err(|e| Error::Fit(format!("GP fit on {} points: {e}", data.len())))?;
                self.warm_start = Some(gp.raw_params().to_vec());
                self.last_diagnostics = Some(json!({
                    "n_train": data.len(),
                    "nll_initial": gp.diagnostics().initial_nll,
                    "nll": gp.diagnostics().final_nll,
                    "epochs": gp.diagnostics().epochs,
                    "jitter": gp.jitter(),
                }));
                Ok(Surrogate::Gp(gp))
            }
            ModelKind::Horseshoe => {
                let seed = self.rng.next_u64();
                let hs = hs_fit(&self.space, data, &self.hs_options, seed)
                    .map_err(|e| Error::Fit(format!("horseshoe fit on {} points: {e}", data.len())))?;
                self.last_diagnostics = Some(json!({ "n_train": data.len() }));
                Ok(Surrogate::Horseshoe(hs))
            }
        }
    }

    fn is_taken(&self, p: &Point) -> bool {
        let k = p.key();
        self.seen.contains(&k) || self.pending.iter().any(|q| q.key() == k)
    }

    fn decode(&self, u: &UnitPoint) -> Point {
        self.space.decode_unchecked(u)
    }

    /// Best non-duplicate feasible neighbor of `u` by acquisition value, or
    /// a fresh in-region sample, or `u` itself when nothing else is left.
    fn dedup(&mut self, u: UnitPoint, acq: &dyn Fn(&UnitPoint) -> f64) -> UnitPoint {
        if !self.is_taken(&self.decode(&u)) {
            return u;
        }
        let region = Region::new(&self.space, self.tr.as_ref());
        let mut neighbors = region.cat_neighbors(&u);
        for _ in 0..20 {
            if let Some(v) = region.random_neighbor(&u, &mut self.rng) {
                neighbors.push(v);
            }
        }
        let mut best: Option<(f64, UnitPoint)> = None;
        for v in neighbors {
            if self.is_taken(&self.decode(&v)) {
                continue;
            }
            let a = acq(&v);
            if best.as_ref().is_none_or(|(b, _)| a > *b) {
                best = Some((a, v));
            }
        }
        if let Some((_, v)) = best {
            return v;
        }
        for _ in 0..1000 {
            match region.sample(&mut self.rng) {
                Some(v) if !self.is_taken(&self.decode(&v)) => return v,
                Some(_) => {}
                None => break,
            }
        }
        u
    }

    /// The next suggestion and, for GP models, its posterior mean.
    fn suggest_one(&mut self) -> Result<(Point, Option<f64>)> {
        if self.in_init_phase() {
            let p = self.init[self.points.len() + self.pending.len()].clone();
            return Ok((p, None));
        }
        // A freshly restarted TR evaluates its new center first.
        if let Some(tr) = &self.tr {
            if let (Some(c), None) = (&tr.center, tr.center_value) {
                let p = self.decode(c);
                if !self.is_taken(&p) {
                    return Ok((p, None));
                }
            }
        }
        let data = self.training_data();
        let model = self.fit(&data)?;
        let y_best = data.y.iter().copied().fold(f64::INFINITY, f64::min);
        let acq_seed = self.rng.next_u64();
        let acquisition = Acquisition::new(&model, self.acq.spec(y_best, acq_seed))?;
        let acq_fn = |u: &UnitPoint| acquisition.evaluate(u);
        let incumbent = match self.tr.as_ref().and_then(|t| t.center.clone()) {
            Some(c) => c,
            None => self.units[self.best.expect("observed")].clone(),
        };
        let opt_seed = self.rng.next_u64();
        let result = self
            .acq_opt
            .optimize(&acq_fn, &self.space, self.tr.as_ref(), &[incumbent], opt_seed)?;
        let u = self.dedup(result.point, &acq_fn);
        let mean = match &model {
            Surrogate::Gp(gp) => Some(gp.predict(&u).0),
            Surrogate::Horseshoe(_) => None,
        };
        Ok((self.decode(&u), mean))
    }

    /// Kriging Believer: `b` suggestions, each conditioned on the posterior
    /// mean at the previous ones.
    pub fn suggest_batch(&mut self, b: usize) -> Result<Vec<Point>> {
        if b == 0 {
            return Err(Error::InvalidParameter("batch size must be >= 1".into()));
        }
        if !self.pending.is_empty() {
            return Err(Error::Protocol("suggest called with unobserved suggestions".into()));
        }
        if b > 1 && matches!(self.model, ModelKind::Horseshoe) {
            return Err(Error::Incompatible(
                "batch suggestions need a GP model for the posterior mean".into(),
            ));
        }
        self.last_diagnostics = None;
        let mut out = Vec::with_capacity(b);
        for i in 0..b {
            let (p, mean) = self.suggest_one()?;
            self.pending.push(p.clone());
            if i + 1 < b && !self.in_init_phase() {
                let u = self.space.transform(&p)?;
                let m = match mean {
                    Some(m) => m,
                    None => self.posterior_mean(&u)?,
                };
                self.hallucinated.push((u, m));
            }
            out.push(p);
        }
        Ok(out)
    }

    fn posterior_mean(&mut self, u: &UnitPoint) -> Result<f64> {
        let data = self.training_data();
        if data.len() < 2 {
            return Ok(data.y.first().copied().unwrap_or(0.0));
        }
        let model: GpModel = match self.fit(&data)? {
            Surrogate::Gp(gp) => gp,
            Surrogate::Horseshoe(_) => unreachable!("rejected in suggest_batch"),
        };
        Ok(model.predict(u).0)
    }

    fn update_trust_region(&mut self, u: &UnitPoint, y: f64) -> Result<()> {
        let n_init = self.init.len();
        let Some(tr) = self.tr.as_mut() else {
            return Ok(());
        };
        if self.points.len() < n_init {
            return Ok(());
        }
        if self.points.len() == n_init {
            let b = self.best.expect("observed");
            tr.set_center(self.units[b].clone(), Some(self.ys[b]));
            return Ok(());
        }
        match tr.center_value {
            None => {
                tr.set_center(u.clone(), Some(y));
            }
            Some(cv) => {
                let improved = y < cv;
                if improved {
                    if tr.contains(u) {
                        tr.recenter(u, y)?;
                    } else {
                        tr.set_center(u.clone(), Some(y));
                    }
                }
                if tr.update(improved) == TrUpdate::Restart {
                    let seed = self.rng.next_u64();
                    let kernel = match &self.model {
                        ModelKind::Gp(k) => Some(k.clone()),
                        ModelKind::Horseshoe => None,
                    };
                    let tr = self.tr.as_mut().expect("checked");
                    tr.restart(&self.space, kernel.as_ref(), seed)?;
                }
            }
        }
        Ok(())
    }
}

impl Optimizer for BoOptimizer {
    fn name(&self) -> String {
        self.config.name()
    }

    fn space(&self) -> &SearchSpace {
        &self.space
    }

    fn suggest(&mut self) -> Result<Point> {
        Ok(self.suggest_batch(1)?.remove(0))
    }

    fn observe(&mut self, x: &Point, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::InvalidData(format!("observed value must be finite, got {y}")));
        }
        let key = x.key();
        let Some(slot) = self.pending.iter().position(|p| p.key() == key) else {
            return Err(Error::Protocol(if self.pending.is_empty() {
                "observe called without a pending suggestion".into()
            } else {
                "observed point does not match a pending suggestion".into()
            }));
        };
        let u = self.space.transform(x)?;
        self.pending.remove(slot);
        self.points.push(x.clone());
        self.units.push(u.clone());
        self.ys.push(y);
        self.seen.insert(key);
        let i = self.ys.len() - 1;
        if self.best.is_none_or(|b| y < self.ys[b]) {
            self.best = Some(i);
        }
        self.update_trust_region(&u, y)?;
        if self.pending.is_empty() {
            self.hallucinated.clear();
        }
        Ok(())
    }

    fn best(&self) -> Option<(Point, f64)> {
        self.best.map(|i| (self.points[i].clone(), self.ys[i]))
    }

    fn n_observed(&self) -> usize {
        self.points.len()
    }

    fn tr_state(&self) -> Option<&TrustRegionState> {
        self.tr.as_ref()
    }

    fn diagnostics(&self) -> Option<Json> {
        self.last_diagnostics.clone()
    }
}

impl BoOptimizer {
    pub fn kernel(&self) -> Option<&crate::surrogates::KernelConfig> {
        self.kernel_config()
    }
}
