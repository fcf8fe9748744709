//! Surrogate models: Gaussian processes with categorical, numeric and mixed
//! kernels, and a sparse Bayesian linear model for categorical spaces.

pub mod gp;
pub mod horseshoe;
pub mod kernels;

pub use gp::{gp_fit, standardization, GpDiagnostics, GpFitOptions, GpModel};
pub use horseshoe::{hs_fit, hs_sample_objective, FeatureMap, HorseshoeModel, HorseshoeOptions};
pub use kernels::{
    kernel_hed, kernel_matern52, kernel_mixture, kernel_overlap, kernel_transformed_overlap,
    CategoricalKernel, Kernel, KernelConfig, KernelKind, KernelParams, NOISE_FLOOR,
};

use crate::error::{Error, Result};
use crate::space::UnitPoint;

/// Observations in unit space.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub x: Vec<UnitPoint>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<UnitPoint>, y: Vec<f64>) -> Result<Self> {
        let d = Self { x, y };
        d.validate()?;
        Ok(d)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn push(&mut self, x: UnitPoint, y: f64) {
        self.x.push(x);
        self.y.push(y);
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::InvalidData(format!(
                "{} inputs but {} targets",
                self.x.len(),
                self.y.len()
            )));
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("targets must be finite".into()));
        }
        Ok(())
    }
}

/// A fitted surrogate.
#[derive(Debug, Clone)]
pub enum Surrogate {
    Gp(GpModel),
    Horseshoe(HorseshoeModel),
}
