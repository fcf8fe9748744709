//! Trust region over a mixed space: a Hamming ball on the categorical block
//! times a box of per-dimension radii on the numeric block.

use serde::{Deserialize, Serialize};

use crate::acquisitions::{lcb, DEFAULT_LCB_BETA};
use crate::error::{Error, Result};
use crate::space::{hamming, SearchSpace, UnitPoint};
use crate::surrogates::{
    gp_fit, CategoricalKernel, Dataset, GpFitOptions, Kernel, KernelConfig, KernelKind,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrustRegionConfig {
    pub min_num_radius: f64,
    pub max_num_radius: f64,
    pub init_num_ratio: f64,
    pub init_nominal_ratio: f64,
    pub multiplier: f64,
    pub succ_tol: usize,
    pub fail_tol: usize,
    pub restart_cand_per_dim: usize,
    pub restart_cand_max: usize,
    pub restart_beta: f64,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            min_num_radius: 0.5f64.powi(5),
            max_num_radius: 1.0,
            init_num_ratio: 0.8,
            init_nominal_ratio: 0.8,
            multiplier: 1.5,
            succ_tol: 3,
            fail_tol: 40,
            restart_cand_per_dim: 100,
            restart_cand_max: 5000,
            restart_beta: DEFAULT_LCB_BETA,
        }
    }
}

impl TrustRegionConfig {
    pub fn restart_candidates(&self, dim: usize) -> usize {
        (self.restart_cand_per_dim * dim).min(self.restart_cand_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrUpdate {
    Continue,
    Restart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRegionState {
    /// `None` until the first center is chosen.
    pub center: Option<UnitPoint>,
    /// `None` while the center has not been evaluated.
    pub center_value: Option<f64>,
    pub l_h: usize,
    pub l_n: Vec<f64>,
    pub succ_count: usize,
    pub fail_count: usize,
    pub restart_index: usize,
    pub restart_incumbents: Vec<(UnitPoint, f64)>,
    pub n_categorical: usize,
    pub config: TrustRegionConfig,
}

pub fn tr_init(space: &SearchSpace) -> TrustRegionState {
    TrustRegionState::new(space, TrustRegionConfig::default())
}

fn initial_nominal_radius(d_h: usize, ratio: f64) -> usize {
    if d_h == 0 {
        return 0;
    }
    ((ratio * d_h as f64 + 0.5).floor() as usize).clamp(1, d_h)
}

impl TrustRegionState {
    pub fn new(space: &SearchSpace, config: TrustRegionConfig) -> Self {
        let d_h = space.n_categorical();
        Self {
            center: None,
            center_value: None,
            l_h: initial_nominal_radius(d_h, config.init_nominal_ratio),
            l_n: vec![config.init_num_ratio * config.max_num_radius; space.n_numeric()],
            succ_count: 0,
            fail_count: 0,
            restart_index: 0,
            restart_incumbents: Vec::new(),
            n_categorical: d_h,
            config,
        }
    }

    fn reset_radii(&mut self) {
        self.l_h = initial_nominal_radius(self.n_categorical, self.config.init_nominal_ratio);
        let init = self.config.init_num_ratio * self.config.max_num_radius;
        self.l_n.iter_mut().for_each(|l| *l = init);
        self.succ_count = 0;
        self.fail_count = 0;
    }

    /// Numeric bounds `[lo, hi]` of dimension `j` intersected with `[0, 1]`.
    pub fn num_bounds(&self, j: usize) -> (f64, f64) {
        match &self.center {
            Some(c) => ((c.num[j] - self.l_n[j]).max(0.0), (c.num[j] + self.l_n[j]).min(1.0)),
            None => (0.0, 1.0),
        }
    }

    /// Membership: Hamming distance at most `L_h` and every numeric offset
    /// at most its radius.
    pub fn contains(&self, u: &UnitPoint) -> bool {
        let Some(c) = &self.center else {
            return true;
        };
        if hamming(&u.cat, &c.cat) > self.l_h {
            return false;
        }
        u.num
            .iter()
            .zip(&c.num)
            .zip(&self.l_n)
            .all(|((x, y), l)| (x - y).abs() <= *l * (1.0 + 1e-12))
    }

    /// Applies one success/failure. On `Restart` the radii are left as they
    /// were and the caller is expected to invoke [`restart`](Self::restart).
    pub fn update(&mut self, improved: bool) -> TrUpdate {
        let m = self.config.multiplier;
        if improved {
            self.succ_count += 1;
            self.fail_count = 0;
            if self.succ_count >= self.config.succ_tol {
                self.succ_count = 0;
                if self.n_categorical > 0 {
                    let grown = (self.l_h as f64 * m + 0.5).floor() as usize;
                    self.l_h = grown.clamp(1, self.n_categorical);
                }
                let max = self.config.max_num_radius;
                self.l_n.iter_mut().for_each(|l| *l = (*l * m).min(max));
            }
            return TrUpdate::Continue;
        }
        self.fail_count += 1;
        self.succ_count = 0;
        if self.fail_count < self.config.fail_tol {
            return TrUpdate::Continue;
        }
        self.fail_count = 0;
        let shrunk_h = self.l_h as f64 / m;
        let nominal_too_small = self.n_categorical > 0 && shrunk_h < 1.0;
        let numeric_too_small = self.l_n.iter().any(|l| l / m < self.config.min_num_radius);
        if nominal_too_small || numeric_too_small {
            return TrUpdate::Restart;
        }
        if self.n_categorical > 0 {
            self.l_h = ((shrunk_h + 0.5).floor() as usize).clamp(1, self.n_categorical);
        }
        self.l_n.iter_mut().for_each(|l| *l /= m);
        TrUpdate::Continue
    }

    /// Moves the center to `point` if `value` is strictly better than the
    /// current center's value (or the center is unevaluated).
    pub fn recenter(&mut self, point: &UnitPoint, value: f64) -> Result<bool> {
        if !self.contains(point) {
            return Err(Error::InvalidPoint("recenter target lies outside the trust region".into()));
        }
        let better = self.center_value.is_none_or(|cv| value < cv);
        if better {
            self.center = Some(point.clone());
            self.center_value = Some(value);
        }
        Ok(better)
    }

    /// Sets a center without a containment check (initial placement).
    pub fn set_center(&mut self, point: UnitPoint, value: Option<f64>) {
        self.center = Some(point);
        self.center_value = value;
    }

    /// Records the current incumbent and places a new center: uniformly at
    /// random with fewer than two incumbents, otherwise the LCB argmax of a
    /// GP fitted on the incumbents over uniform candidates. Radii and
    /// counters are reset; the new center is unevaluated.
    pub fn restart(
        &mut self,
        space: &SearchSpace,
        kernel: Option<&KernelConfig>,
        seed: u64,
    ) -> Result<RestartOutcome> {
        if let (Some(c), Some(v)) = (&self.center, self.center_value) {
            self.restart_incumbents.push((c.clone(), v));
        }
        let outcome = if self.restart_incumbents.len() < 2 {
            let p = space.sample_uniform(1, seed)?.remove(0);
            self.center = Some(space.transform(&p)?);
            RestartOutcome {
                n_candidates: 1,
                used_model: false,
            }
        } else {
            let config = kernel
                .filter(|c| Kernel::new((*c).clone(), space).is_ok())
                .cloned()
                .unwrap_or_else(|| default_kernel(space));
            let kernel = Kernel::new(config, space)?;
            let data = Dataset::new(
                self.restart_incumbents.iter().map(|(u, _)| u.clone()).collect(),
                self.restart_incumbents.iter().map(|(_, v)| *v).collect(),
            )?;
            let gp = gp_fit(kernel, &data, &GpFitOptions::default(), None)?;
            let n = self.config.restart_candidates(space.dim());
            let candidates = space.sample_uniform(n, seed)?;
            let mut best: Option<(f64, UnitPoint)> = None;
            for p in &candidates {
                let u = space.transform(p)?;
                let (mu, var) = gp.predict(&u);
                let score = lcb(mu, var.sqrt(), self.config.restart_beta)?;
                if best.as_ref().is_none_or(|(s, _)| score > *s) {
                    best = Some((score, u));
                }
            }
            self.center = best.map(|(_, u)| u);
            RestartOutcome {
                n_candidates: n,
                used_model: true,
            }
        };
        self.center_value = None;
        self.reset_radii();
        self.restart_index += 1;
        Ok(outcome)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RestartOutcome {
    pub n_candidates: usize,
    pub used_model: bool,
}

/// Kernel used by the restart model when none is supplied.
pub fn default_kernel(space: &SearchSpace) -> KernelConfig {
    if space.is_categorical_only() {
        KernelConfig::transformed_overlap()
    } else if space.is_numeric_only() {
        KernelConfig::matern52()
    } else {
        KernelConfig::new(KernelKind::Mixture(CategoricalKernel::TransformedOverlap))
    }
}

pub fn tr_update(state: &mut TrustRegionState, improved: bool) -> TrUpdate {
    state.update(improved)
}

pub fn tr_recenter(state: &mut TrustRegionState, point: &UnitPoint, value: f64) -> Result<bool> {
    state.recenter(point, value)
}

pub fn tr_restart(
    state: &mut TrustRegionState,
    space: &SearchSpace,
    kernel: Option<&KernelConfig>,
    seed: u64,
) -> Result<RestartOutcome> {
    state.restart(space, kernel, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::VariableSpec;

    fn cat_space(d: usize) -> SearchSpace {
        SearchSpace::new(
            (0..d)
                .map(|i| VariableSpec::categorical(format!("x{i}"), ["a", "b", "c"]))
                .collect(),
        )
        .unwrap()
    }

    fn num_space(d: usize) -> SearchSpace {
        SearchSpace::new(
            (0..d)
                .map(|i| VariableSpec::continuous(format!("x{i}"), 0.0, 1.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn init_radii() {
        assert_eq!(tr_init(&cat_space(20)).l_h, 16);
        assert_eq!(tr_init(&cat_space(1)).l_h, 1);
        assert_eq!(tr_init(&num_space(3)).l_n, vec![0.8; 3]);
    }

    #[test]
    fn expansion_and_shrink() {
        let mut s = tr_init(&num_space(2));
        s.l_n = vec![0.5, 0.5];
        for _ in 0..3 {
            assert_eq!(s.update(true), TrUpdate::Continue);
        }
        assert!((s.l_n[0] - 0.75).abs() < 1e-15);
        let mut s = tr_init(&num_space(2));
        for _ in 0..40 {
            assert_eq!(s.update(false), TrUpdate::Continue);
        }
        assert!((s.l_n[0] - 0.8 / 1.5).abs() < 1e-15);
        s.l_n = vec![0.04, 0.5];
        for _ in 0..39 {
            assert_eq!(s.update(false), TrUpdate::Continue);
        }
        assert_eq!(s.update(false), TrUpdate::Restart);
    }

    #[test]
    fn recenter_ties_keep_center() {
        let space = cat_space(3);
        let mut s = tr_init(&space);
        let a = UnitPoint::new(vec![], vec![0, 0, 0]);
        let b = UnitPoint::new(vec![], vec![1, 0, 0]);
        s.set_center(a.clone(), Some(1.0));
        assert!(!s.recenter(&b, 1.0).unwrap());
        assert!(!s.recenter(&b, 2.0).unwrap());
        assert_eq!(s.center.as_ref(), Some(&a));
        assert!(s.recenter(&b, 0.5).unwrap());
        assert_eq!(s.center.as_ref(), Some(&b));
        s.l_h = 1;
        assert!(s.recenter(&UnitPoint::new(vec![], vec![0, 1, 1]), 0.0).is_err());
    }

    #[test]
    fn restart_candidate_counts() {
        let c = TrustRegionConfig::default();
        assert_eq!(c.restart_candidates(25), 2500);
        assert_eq!(c.restart_candidates(100), 5000);
    }
}
