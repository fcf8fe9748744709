//! Exact GP regression with hyperparameters fitted by Adam on the negative
//! log marginal likelihood.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::kernels::{Kernel, KernelInput, KernelParams};
use super::Dataset;
use crate::error::{Error, Result};
use crate::space::UnitPoint;

const JITTER_START: f64 = 1e-8;
const JITTER_MAX: f64 = 1e-4;
const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpFitOptions {
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for GpFitOptions {
    fn default() -> Self {
        Self {
            epochs: 100,
            lr: 0.03,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpDiagnostics {
    pub initial_nll: f64,
    pub final_nll: f64,
    pub epochs: usize,
    pub jitter: f64,
}

/// Mean and unbiased std, with unit std for (near-)constant targets.
pub fn standardization(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    if y.len() < 2 {
        return (mean, 1.0);
    }
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    (mean, if std < 1e-12 { 1.0 } else { std })
}

#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: Kernel,
    raw: Vec<f64>,
    inputs: Vec<KernelInput>,
    y_std: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
    jitter: f64,
    diagnostics: GpDiagnostics,
}

fn gram(kernel: &Kernel, raw: &[f64], inputs: &[KernelInput]) -> DMatrix<f64> {
    let n = inputs.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(raw, &inputs[i], &inputs[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Cholesky of `k + noise I`, escalating diagonal jitter on failure.
fn factor(mut k: DMatrix<f64>, noise: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = k.nrows();
    for i in 0..n {
        k[(i, i)] += noise;
    }
    if let Some(c) = Cholesky::new(k.clone()) {
        return Ok((c, 0.0));
    }
    let mut jitter = JITTER_START;
    while jitter <= JITTER_MAX * (1.0 + 1e-9) {
        let mut kj = k.clone();
        for i in 0..n {
            kj[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(kj) {
            return Ok((c, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::NotPositiveDefinite { jitter: JITTER_MAX })
}

fn nll_from(chol: &Cholesky<f64, Dyn>, y: &DVector<f64>) -> (f64, DVector<f64>) {
    let alpha = chol.solve(y);
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let n = y.len() as f64;
    (0.5 * y.dot(&alpha) + 0.5 * log_det + 0.5 * n * LN_2PI, alpha)
}

/// NLL of standardized targets `y` at raw parameters.
pub fn negative_log_likelihood(
    kernel: &Kernel,
    raw: &[f64],
    inputs: &[KernelInput],
    y: &[f64],
) -> Result<f64> {
    let noise = kernel.raw_to_params(raw).noise;
    let (chol, _) = factor(gram(kernel, raw, inputs), noise)?;
    Ok(nll_from(&chol, &DVector::from_column_slice(y)).0)
}

/// NLL and its gradient with respect to the raw parameters.
pub fn nll_and_grad(
    kernel: &Kernel,
    raw: &[f64],
    inputs: &[KernelInput],
    y: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let n = inputs.len();
    let np = kernel.n_params();
    let noise_idx = kernel.noise_index();
    // Kernel values and per-pair gradients.
    let mut k = DMatrix::zeros(n, n);
    let mut dk = vec![0.0; n * (n + 1) / 2 * np];
    let mut g = vec![0.0; np];
    let mut t = 0;
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval_grad(raw, &inputs[i], &inputs[j], &mut g);
            k[(i, j)] = v;
            k[(j, i)] = v;
            dk[t * np..(t + 1) * np].copy_from_slice(&g);
            t += 1;
        }
    }
    let noise = kernel.raw_to_params(raw).noise;
    let (chol, _) = factor(k, noise)?;
    let yv = DVector::from_column_slice(y);
    let (nll, alpha) = nll_from(&chol, &yv);
    // W = K^{-1} - α αᵀ ; dNLL/dθ = ½ Σ_ij W_ij dK_ij / dθ.
    let mut w = chol.inverse();
    w -= &alpha * alpha.transpose();
    let mut grad = vec![0.0; np];
    let mut t = 0;
    for i in 0..n {
        for j in 0..=i {
            let scale = if i == j { 0.5 * w[(i, i)] } else { w[(i, j)] };
            let row = &dk[t * np..(t + 1) * np];
            for p in 0..noise_idx {
                grad[p] += scale * row[p];
            }
            t += 1;
        }
    }
    let trace_w: f64 = w.diagonal().iter().sum();
    grad[noise_idx] = 0.5 * trace_w * raw[noise_idx].exp();
    Ok((nll, grad))
}

impl GpModel {
    /// Conditions on data at fixed hyperparameters. With `standardize` off
    /// the targets are used as given (zero mean, unit scale).
    pub fn condition(
        kernel: Kernel,
        params: &KernelParams,
        data: &Dataset,
        standardize: bool,
    ) -> Result<Self> {
        let raw = kernel.params_to_raw(params)?;
        Self::condition_raw(kernel, raw, data, standardize, None)
    }

    fn condition_raw(
        kernel: Kernel,
        raw: Vec<f64>,
        data: &Dataset,
        standardize: bool,
        diagnostics: Option<GpDiagnostics>,
    ) -> Result<Self> {
        data.validate()?;
        let (y_mean, y_scale) = if standardize {
            standardization(&data.y)
        } else {
            (0.0, 1.0)
        };
        let y_std: Vec<f64> = data.y.iter().map(|v| (v - y_mean) / y_scale).collect();
        let inputs: Vec<KernelInput> = data.x.iter().map(|u| kernel.prepare(u)).collect();
        let noise = kernel.raw_to_params(&raw).noise;
        let (chol, jitter) = factor(gram(&kernel, &raw, &inputs), noise)?;
        let yv = DVector::from_column_slice(&y_std);
        let (nll, alpha) = nll_from(&chol, &yv);
        let diagnostics = diagnostics.unwrap_or(GpDiagnostics {
            initial_nll: nll,
            final_nll: nll,
            epochs: 0,
            jitter,
        });
        Ok(Self {
            kernel,
            raw,
            inputs,
            y_std,
            y_mean,
            y_scale,
            chol,
            alpha,
            jitter,
            diagnostics: GpDiagnostics { jitter, ..diagnostics },
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn raw_params(&self) -> &[f64] {
        &self.raw
    }

    pub fn params(&self) -> KernelParams {
        self.kernel.raw_to_params(&self.raw)
    }

    pub fn diagnostics(&self) -> &GpDiagnostics {
        &self.diagnostics
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_scale)
    }

    pub fn n_train(&self) -> usize {
        self.inputs.len()
    }

    /// NLL of the standardized training targets at the current parameters.
    pub fn nll(&self) -> f64 {
        nll_from(&self.chol, &DVector::from_column_slice(&self.y_std)).0
    }

    /// Posterior mean and latent variance on the standardized scale.
    pub fn predict_standardized(&self, u: &UnitPoint) -> (f64, f64) {
        let x = self.kernel.prepare(u);
        let k = DVector::from_iterator(
            self.inputs.len(),
            self.inputs.iter().map(|xi| self.kernel.eval(&self.raw, &x, xi)),
        );
        let mean = k.dot(&self.alpha);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&k)
            .expect("triangular factor is non-singular");
        let prior = self.kernel.eval(&self.raw, &x, &x);
        (mean, (prior - v.norm_squared()).max(0.0))
    }

    /// Posterior mean and variance on the raw target scale.
    pub fn predict(&self, u: &UnitPoint) -> (f64, f64) {
        let (m, v) = self.predict_standardized(u);
        (self.y_mean + self.y_scale * m, v * self.y_scale * self.y_scale)
    }

    /// Gaussian log predictive density of `y` (raw scale) including noise.
    pub fn log_predictive_density(&self, u: &UnitPoint, y: f64) -> f64 {
        let (m, v) = self.predict(u);
        let noise = self.params().noise * self.y_scale * self.y_scale;
        let s2 = v + noise;
        -0.5 * (LN_2PI + s2.ln() + (y - m).powi(2) / s2)
    }
}

/// Fits hyperparameters by Adam on the NLL and conditions on the data.
/// `warm_start` is a raw parameter vector from a previous fit.
pub fn gp_fit(
    kernel: Kernel,
    data: &Dataset,
    options: &GpFitOptions,
    warm_start: Option<&[f64]>,
) -> Result<GpModel> {
    data.validate()?;
    if data.len() < 2 {
        return Err(Error::InvalidData("GP fit needs at least 2 observations".into()));
    }
    let (mean, scale) = standardization(&data.y);
    let y: Vec<f64> = data.y.iter().map(|v| (v - mean) / scale).collect();
    let inputs: Vec<KernelInput> = data.x.iter().map(|u| kernel.prepare(u)).collect();

    let mut raw = match warm_start {
        Some(w) if w.len() == kernel.n_params() && w.iter().all(|v| v.is_finite()) => w.to_vec(),
        _ => kernel.params_to_raw(&kernel.default_params())?,
    };
    kernel.clamp_raw(&mut raw);

    let (initial_nll, mut grad) = nll_and_grad(&kernel, &raw, &inputs, &y)?;
    let mut best = (initial_nll, raw.clone());
    let np = raw.len();
    let mut m = vec![0.0; np];
    let mut v = vec![0.0; np];
    let mut epochs = 0;
    for epoch in 1..=options.epochs {
        let b1t = 1.0 - options.beta1.powi(epoch as i32);
        let b2t = 1.0 - options.beta2.powi(epoch as i32);
        for i in 0..np {
            m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * grad[i];
            v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * grad[i] * grad[i];
            raw[i] -= options.lr * (m[i] / b1t) / ((v[i] / b2t).sqrt() + options.eps);
        }
        kernel.clamp_raw(&mut raw);
        epochs = epoch;
        match nll_and_grad(&kernel, &raw, &inputs, &y) {
            Ok((nll, g)) if nll.is_finite() && g.iter().all(|x| x.is_finite()) => {
                if nll < best.0 {
                    best = (nll, raw.clone());
                }
                grad = g;
            }
            _ => break,
        }
    }
    GpModel::condition_raw(
        kernel,
        best.1,
        data,
        true,
        Some(GpDiagnostics {
            initial_nll,
            final_nll: best.0,
            epochs,
            jitter: 0.0,
        }),
    )
}
