//! The mix-and-match BO builder, its suggest/observe loop, and baselines
//! sharing the same interface.

mod baselines;
mod bo;

pub use baselines::{Baseline, BaselineConfig, BaselineKind, BASELINE_IDS};
pub use bo::{bo_build, BoOptimizer};

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::acquisitions::AcquisitionKind;
use crate::acq_opt::{AcqOptConfig, ACQ_OPT_IDS};
use crate::error::{Error, Result};
use crate::space::{Point, SearchSpace};
use crate::surrogates::{CategoricalKernel, KernelConfig, KernelKind};
use crate::trust_region::TrustRegionState;

/// The stateful suggest/observe interface shared by BO and baselines.
/// Calls must alternate: one `suggest` (or one batch) then its observes.
pub trait Optimizer: Send {
    fn name(&self) -> String;

    fn space(&self) -> &SearchSpace;

    fn suggest(&mut self) -> Result<Point>;

    fn observe(&mut self, x: &Point, y: f64) -> Result<()>;

    /// Best observed point and value.
    fn best(&self) -> Option<(Point, f64)>;

    fn n_observed(&self) -> usize;

    fn tr_state(&self) -> Option<&TrustRegionState> {
        None
    }

    /// Free-form diagnostics of the last suggestion (model fit, etc).
    fn diagnostics(&self) -> Option<Json> {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Gp(KernelConfig),
    Horseshoe,
}

pub const MODEL_IDS: &[&str] = &[
    "gp_o",
    "gp_to",
    "gp_hed",
    "gp_mat52",
    "gp_mix_o",
    "gp_mix_to",
    "gp_mix_hed",
    "lr_sh",
];

impl ModelKind {
    pub fn parse(id: &str, hed_seed: u64) -> Result<Self> {
        let kernel = |kind| KernelConfig {
            hed_seed,
            ..KernelConfig::new(kind)
        };
        Ok(match id {
            "gp_o" => Self::Gp(kernel(KernelKind::Overlap)),
            "gp_to" => Self::Gp(kernel(KernelKind::TransformedOverlap)),
            "gp_hed" => Self::Gp(kernel(KernelKind::Hed)),
            "gp_mat52" => Self::Gp(kernel(KernelKind::Matern52)),
            "gp_mix_o" => Self::Gp(kernel(KernelKind::Mixture(CategoricalKernel::Overlap))),
            "gp_mix_to" => Self::Gp(kernel(KernelKind::Mixture(
                CategoricalKernel::TransformedOverlap,
            ))),
            "gp_mix_hed" => Self::Gp(kernel(KernelKind::Mixture(CategoricalKernel::Hed))),
            "lr_sh" | "lr_hs" => Self::Horseshoe,
            _ => {
                return Err(Error::Unsupported {
                    kind: "model",
                    id: id.to_string(),
                })
            }
        })
    }

    /// Checks the model against the space's variable types.
    pub fn check_space(&self, id: &str, space: &SearchSpace) -> Result<()> {
        let ok = match self {
            Self::Gp(k) => match k.kind {
                KernelKind::Overlap | KernelKind::TransformedOverlap | KernelKind::Hed => {
                    space.is_categorical_only()
                }
                KernelKind::Matern52 => space.is_numeric_only(),
                KernelKind::Mixture(_) => space.is_mixed(),
            },
            Self::Horseshoe => space.is_categorical_only(),
        };
        if ok {
            return Ok(());
        }
        let need = match self {
            Self::Gp(k) => match k.kind {
                KernelKind::Matern52 => "a purely numeric space",
                KernelKind::Mixture(_) => "a mixed space",
                _ => "a purely categorical space",
            },
            Self::Horseshoe => "a purely categorical space",
        };
        Err(Error::Incompatible(format!("model `{id}` requires {need}")))
    }
}

/// A BO configuration by string ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoConfig {
    pub model: String,
    #[serde(default = "default_acq")]
    pub acq: String,
    pub acq_opt: String,
    #[serde(default = "default_tr")]
    pub tr: String,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default)]
    pub seed: u64,
    /// Sections `gp`, `hs`, `acq_opt`, `tr` with field overrides.
    #[serde(default)]
    pub overrides: Json,
}

fn default_acq() -> String {
    "ei".into()
}

fn default_tr() -> String {
    "none".into()
}

fn default_n_init() -> usize {
    20
}

impl BoConfig {
    pub fn new(model: &str, acq: &str, acq_opt: &str, tr: &str) -> Self {
        Self {
            model: model.into(),
            acq: acq.into(),
            acq_opt: acq_opt.into(),
            tr: tr.into(),
            n_init: default_n_init(),
            seed: 0,
            overrides: Json::Null,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_n_init(mut self, n: usize) -> Self {
        self.n_init = n;
        self
    }

    pub fn with_overrides(mut self, overrides: Json) -> Self {
        self.overrides = overrides;
        self
    }

    pub fn override_section(&self, name: &str) -> Option<&Json> {
        self.overrides.get(name)
    }

    pub fn uses_tr(&self) -> Result<bool> {
        match self.tr.as_str() {
            "none" => Ok(false),
            "basic" => Ok(true),
            other => Err(Error::Unsupported {
                kind: "trust region",
                id: other.to_string(),
            }),
        }
    }

    pub fn name(&self) -> String {
        let tr = if self.tr == "basic" { "+tr" } else { "" };
        format!("{}+{}+{}{tr}", self.model, self.acq_opt, self.acq)
    }

    /// Validates the combination against the compatibility rules.
    pub fn validate(&self, space: &SearchSpace) -> Result<()> {
        if self.n_init < 2 {
            return Err(Error::InvalidParameter(format!(
                "n_init must be >= 2, got {}",
                self.n_init
            )));
        }
        let model = ModelKind::parse(&self.model, self.seed)?;
        let acq = AcquisitionKind::parse(&self.acq)?;
        let opt = AcqOptConfig::from_id(&self.acq_opt, self.override_section("acq_opt"))?;
        self.uses_tr()?;
        match (&model, acq.requires_horseshoe()) {
            (ModelKind::Gp(_), true) => {
                return Err(Error::Incompatible("ts requires the lr_sh model".into()))
            }
            (ModelKind::Horseshoe, false) => {
                return Err(Error::Incompatible(format!(
                    "lr_sh has no closed-form posterior; `{}` requires a GP model (use ts)",
                    self.acq
                )))
            }
            _ => {}
        }
        model.check_space(&self.model, space)?;
        opt.check_space(space)?;
        Ok(())
    }
}

/// An optimizer entry of a run or grid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptimizerSpec {
    Baseline {
        baseline: String,
        #[serde(default)]
        overrides: Json,
    },
    Bo {
        model: String,
        #[serde(default = "default_acq")]
        acq: String,
        acq_opt: String,
        #[serde(default = "default_tr")]
        tr: String,
        #[serde(default)]
        overrides: Json,
    },
}

impl OptimizerSpec {
    pub fn bo(model: &str, acq: &str, acq_opt: &str, tr: &str) -> Self {
        Self::Bo {
            model: model.into(),
            acq: acq.into(),
            acq_opt: acq_opt.into(),
            tr: tr.into(),
            overrides: Json::Null,
        }
    }

    pub fn baseline(kind: &str) -> Self {
        Self::Baseline {
            baseline: kind.into(),
            overrides: Json::Null,
        }
    }

    pub fn with_overrides(mut self, o: Json) -> Self {
        match &mut self {
            Self::Baseline { overrides, .. } | Self::Bo { overrides, .. } => *overrides = o,
        }
        self
    }

    pub fn name(&self) -> String {
        match self {
            Self::Baseline { baseline, .. } => baseline.clone(),
            Self::Bo {
                model,
                acq,
                acq_opt,
                tr,
                ..
            } => BoConfig::new(model, acq, acq_opt, tr).name(),
        }
    }

    /// Builds an optimizer for `space` at `seed`.
    pub fn build(&self, space: &SearchSpace, n_init: usize, seed: u64) -> Result<Box<dyn Optimizer>> {
        match self {
            Self::Baseline {
                baseline,
                overrides,
            } => {
                let config = BaselineConfig::from_id(baseline, n_init, seed, overrides)?;
                Ok(Box::new(Baseline::new(config, space.clone())?))
            }
            Self::Bo {
                model,
                acq,
                acq_opt,
                tr,
                overrides,
            } => {
                let config = BoConfig::new(model, acq, acq_opt, tr)
                    .with_seed(seed)
                    .with_n_init(n_init)
                    .with_overrides(overrides.clone());
                Ok(Box::new(bo_build(config, space.clone())?))
            }
        }
    }
}

/// Every accepted optimizer id family, for listings.
pub fn optimizer_ids() -> Vec<String> {
    let mut out: Vec<String> = BASELINE_IDS.iter().map(|s| s.to_string()).collect();
    for m in MODEL_IDS {
        for o in ACQ_OPT_IDS {
            let acqs: &[&str] = if *m == "lr_sh" { &["ts"] } else { &["ei", "pi", "lcb"] };
            for a in acqs {
                for tr in ["none", "basic"] {
                    out.push(BoConfig::new(m, a, o, tr).name());
                }
            }
        }
    }
    out
}
