//! Covariance functions over unit-space points.
//!
//! The scalar functions (`kernel_overlap`, ...) mirror the textbook formulas
//! and are the reference used in tests. [`Kernel`] is the configured object
//! the GP uses: it owns the HED dictionary, maps a flat vector of raw
//! log-space hyperparameters to values, and returns per-pair gradients.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{hamming, SearchSpace, UnitPoint};

const SQRT5: f64 = 2.236_067_977_499_79;

pub const DEFAULT_HED_DICTIONARY_SIZE: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoricalKernel {
    Overlap,
    TransformedOverlap,
    Hed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Overlap,
    TransformedOverlap,
    Hed,
    Matern52,
    /// `σ [λ (K_cat + K_num) + (1 - λ) K_cat K_num]`.
    Mixture(CategoricalKernel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub hed_dictionary_size: usize,
    pub hed_seed: u64,
}

impl KernelConfig {
    pub fn new(kind: KernelKind) -> Self {
        Self {
            kind,
            hed_dictionary_size: DEFAULT_HED_DICTIONARY_SIZE,
            hed_seed: 0,
        }
    }

    pub fn overlap() -> Self {
        Self::new(KernelKind::Overlap)
    }

    pub fn transformed_overlap() -> Self {
        Self::new(KernelKind::TransformedOverlap)
    }

    pub fn hed(m: usize, seed: u64) -> Self {
        Self {
            kind: KernelKind::Hed,
            hed_dictionary_size: m,
            hed_seed: seed,
        }
    }

    pub fn matern52() -> Self {
        Self::new(KernelKind::Matern52)
    }

    pub fn mixture(cat: CategoricalKernel) -> Self {
        Self::new(KernelKind::Mixture(cat))
    }

    fn categorical_part(&self) -> Option<CategoricalKernel> {
        match self.kind {
            KernelKind::Overlap => Some(CategoricalKernel::Overlap),
            KernelKind::TransformedOverlap => Some(CategoricalKernel::TransformedOverlap),
            KernelKind::Hed => Some(CategoricalKernel::Hed),
            KernelKind::Matern52 => None,
            KernelKind::Mixture(c) => Some(c),
        }
    }

    fn uses_numeric(&self) -> bool {
        matches!(self.kind, KernelKind::Matern52 | KernelKind::Mixture(_))
    }
}

/// Hyperparameters in natural units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub sigma: f64,
    /// Overlap-family weights, one per categorical dim.
    pub cat_lengthscales: Vec<f64>,
    /// Matérn lengthscales, one per numeric dim.
    pub num_lengthscales: Vec<f64>,
    /// Matérn lengthscales over the HED embedding, one per anchor.
    pub hed_lengthscales: Vec<f64>,
    pub mix_weight: f64,
    pub noise: f64,
}

pub const NOISE_FLOOR: f64 = 1e-5;

// Boxes for the raw parameters.
const LOG_SIGMA_BOX: (f64, f64) = (-7.0, 7.0);
const LOG_LENGTHSCALE_BOX: (f64, f64) = (-5.0, 5.0);
const MIX_RAW_BOX: (f64, f64) = (-10.0, 10.0);
const NOISE_RAW_BOX: (f64, f64) = (-16.0, 1.0);

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

// ---------------------------------------------------------------------------
// Reference formulas

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

/// `(σ/d) Σ_p λ_p δ(x_p, x'_p)`.
pub fn kernel_overlap(x: &[usize], y: &[usize], sigma: f64, lengthscales: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    check_len(x.len(), lengthscales.len())?;
    if x.is_empty() {
        return Err(Error::InvalidKernel("overlap kernel needs d >= 1".into()));
    }
    let s: f64 = x
        .iter()
        .zip(y)
        .zip(lengthscales)
        .filter(|((a, b), _)| a == b)
        .map(|(_, l)| l)
        .sum();
    Ok(sigma / x.len() as f64 * s)
}

/// Overlap passed through `exp(.) - 1` and normalized so that `k(x, x) = σ`.
pub fn kernel_transformed_overlap(
    x: &[usize],
    y: &[usize],
    sigma: f64,
    lengthscales: &[f64],
) -> Result<f64> {
    check_len(x.len(), y.len())?;
    check_len(x.len(), lengthscales.len())?;
    if x.is_empty() {
        return Err(Error::InvalidKernel("overlap kernel needs d >= 1".into()));
    }
    let d = x.len() as f64;
    let total: f64 = lengthscales.iter().sum::<f64>() / d;
    if total == 0.0 {
        return Ok(if x == y { sigma } else { 0.0 });
    }
    let matched = kernel_overlap(x, y, 1.0, lengthscales)?;
    Ok(sigma * matched.exp_m1() / total.exp_m1())
}

/// Matérn-5/2 with ARD lengthscales.
pub fn kernel_matern52(u: &[f64], v: &[f64], sigma: f64, lengthscales: &[f64]) -> Result<f64> {
    check_len(u.len(), v.len())?;
    check_len(u.len(), lengthscales.len())?;
    let r2: f64 = u
        .iter()
        .zip(v)
        .zip(lengthscales)
        .map(|((a, b), l)| ((a - b) / l).powi(2))
        .sum();
    Ok(sigma * matern52_unit(r2.sqrt()))
}

fn matern52_unit(r: f64) -> f64 {
    let s = SQRT5 * r;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

/// `[hamming(x, a_1)/d, ..., hamming(x, a_m)/d]`.
pub fn hed_embedding(x: &[usize], dictionary: &[Vec<usize>]) -> Vec<f64> {
    let d = x.len().max(1) as f64;
    dictionary
        .iter()
        .map(|a| hamming(x, a) as f64 / d)
        .collect()
}

/// Matérn-5/2 on the Hamming embeddings of `x` and `y`.
pub fn kernel_hed(
    x: &[usize],
    y: &[usize],
    dictionary: &[Vec<usize>],
    sigma: f64,
    lengthscales: &[f64],
) -> Result<f64> {
    if dictionary.is_empty() {
        return Err(Error::InvalidKernel("HED dictionary is empty".into()));
    }
    check_len(x.len(), y.len())?;
    kernel_matern52(
        &hed_embedding(x, dictionary),
        &hed_embedding(y, dictionary),
        sigma,
        lengthscales,
    )
}

/// `σ [λ (k_cat + k_num) + (1 - λ) k_cat k_num]` from unit-diagonal parts.
pub fn kernel_mixture(k_cat: f64, k_num: f64, sigma: f64, mix_weight: f64) -> f64 {
    sigma * (mix_weight * (k_cat + k_num) + (1.0 - mix_weight) * k_cat * k_num)
}

// ---------------------------------------------------------------------------
// Configured kernel

/// A point prepared for repeated kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelInput {
    pub cat: Vec<usize>,
    pub num: Vec<f64>,
    pub hed: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Kernel {
    config: KernelConfig,
    n_cat: usize,
    n_num: usize,
    dictionary: Vec<Vec<usize>>,
}

impl Kernel {
    pub fn new(config: KernelConfig, space: &SearchSpace) -> Result<Self> {
        let n_cat = space.n_categorical();
        let n_num = space.n_numeric();
        match config.kind {
            KernelKind::Overlap | KernelKind::TransformedOverlap | KernelKind::Hed if n_cat == 0 => {
                return Err(Error::InvalidKernel(format!(
                    "{:?} kernel needs categorical dims",
                    config.kind
                )))
            }
            KernelKind::Matern52 if n_num == 0 => {
                return Err(Error::InvalidKernel("matern52 needs numeric dims".into()))
            }
            KernelKind::Mixture(_) if n_cat == 0 || n_num == 0 => {
                return Err(Error::InvalidKernel(
                    "mixture kernel needs both numeric and categorical dims".into(),
                ))
            }
            _ => {}
        }
        let mut dictionary = Vec::new();
        if config.categorical_part() == Some(CategoricalKernel::Hed) {
            if config.hed_dictionary_size == 0 {
                return Err(Error::InvalidKernel("HED dictionary is empty".into()));
            }
            let counts = space.category_counts();
            let mut rng = ChaCha8Rng::seed_from_u64(config.hed_seed);
            dictionary = (0..config.hed_dictionary_size)
                .map(|_| counts.iter().map(|&k| rng.random_range(0..k)).collect())
                .collect();
        }
        Ok(Self {
            config,
            n_cat,
            n_num,
            dictionary,
        })
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn dictionary(&self) -> &[Vec<usize>] {
        &self.dictionary
    }

    fn cat_kind(&self) -> Option<CategoricalKernel> {
        self.config.categorical_part()
    }

    fn n_cat_params(&self) -> usize {
        match self.cat_kind() {
            Some(CategoricalKernel::Hed) => self.dictionary.len(),
            Some(_) => self.n_cat,
            None => 0,
        }
    }

    fn n_num_params(&self) -> usize {
        if self.config.uses_numeric() {
            self.n_num
        } else {
            0
        }
    }

    fn is_mixture(&self) -> bool {
        matches!(self.config.kind, KernelKind::Mixture(_))
    }

    /// Length of the raw vector:
    /// `[log σ, cat block, num block, mix weight (mixture only), noise]`.
    pub fn n_params(&self) -> usize {
        1 + self.n_cat_params() + self.n_num_params() + usize::from(self.is_mixture()) + 1
    }

    pub fn noise_index(&self) -> usize {
        self.n_params() - 1
    }

    pub fn default_params(&self) -> KernelParams {
        let hed = self.cat_kind() == Some(CategoricalKernel::Hed);
        KernelParams {
            sigma: 1.0,
            cat_lengthscales: if hed { Vec::new() } else { vec![1.0; self.n_cat_params()] },
            num_lengthscales: vec![0.5; self.n_num_params()],
            hed_lengthscales: if hed { vec![1.0; self.dictionary.len()] } else { Vec::new() },
            mix_weight: 0.5,
            noise: 1e-2,
        }
    }

    pub fn params_to_raw(&self, p: &KernelParams) -> Result<Vec<f64>> {
        let cat = match self.cat_kind() {
            Some(CategoricalKernel::Hed) => &p.hed_lengthscales,
            _ => &p.cat_lengthscales,
        };
        if cat.len() != self.n_cat_params() || p.num_lengthscales.len() != self.n_num_params() {
            return Err(Error::InvalidParameter(
                "lengthscale count does not match the kernel".into(),
            ));
        }
        let positive = std::iter::once(p.sigma)
            .chain(cat.iter().copied())
            .chain(p.num_lengthscales.iter().copied());
        if positive.clone().any(|v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("kernel parameters must be positive".into()));
        }
        if p.noise < NOISE_FLOOR {
            return Err(Error::InvalidParameter(format!(
                "noise {} below floor {NOISE_FLOOR}",
                p.noise
            )));
        }
        let mut raw: Vec<f64> = positive.map(f64::ln).collect();
        if self.is_mixture() {
            if !(0.0..=1.0).contains(&p.mix_weight) {
                return Err(Error::InvalidParameter("mixture weight outside [0, 1]".into()));
            }
            raw.push(logit(p.mix_weight));
        }
        let excess = p.noise - NOISE_FLOOR;
        raw.push(if excess > 0.0 { excess.ln() } else { f64::NEG_INFINITY });
        Ok(raw)
    }

    pub fn raw_to_params(&self, raw: &[f64]) -> KernelParams {
        let nc = self.n_cat_params();
        let nn = self.n_num_params();
        let cat: Vec<f64> = raw[1..1 + nc].iter().map(|v| v.exp()).collect();
        let hed = self.cat_kind() == Some(CategoricalKernel::Hed);
        KernelParams {
            sigma: raw[0].exp(),
            cat_lengthscales: if hed { Vec::new() } else { cat.clone() },
            num_lengthscales: raw[1 + nc..1 + nc + nn].iter().map(|v| v.exp()).collect(),
            hed_lengthscales: if hed { cat } else { Vec::new() },
            mix_weight: if self.is_mixture() { sigmoid(raw[1 + nc + nn]) } else { 0.5 },
            noise: NOISE_FLOOR + raw[self.noise_index()].exp(),
        }
    }

    /// Clamps every raw coordinate to its box.
    pub fn clamp_raw(&self, raw: &mut [f64]) {
        let nc = self.n_cat_params();
        let nn = self.n_num_params();
        let noise = self.noise_index();
        for (i, v) in raw.iter_mut().enumerate() {
            let (lo, hi) = if i == 0 {
                LOG_SIGMA_BOX
            } else if i <= nc + nn {
                LOG_LENGTHSCALE_BOX
            } else if i == noise {
                NOISE_RAW_BOX
            } else {
                MIX_RAW_BOX
            };
            *v = v.clamp(lo, hi);
        }
    }

    pub fn prepare(&self, u: &UnitPoint) -> KernelInput {
        KernelInput {
            cat: u.cat.clone(),
            num: u.num.clone(),
            hed: if self.dictionary.is_empty() {
                Vec::new()
            } else {
                hed_embedding(&u.cat, &self.dictionary)
            },
        }
    }

    /// Kernel value at raw parameters `raw`.
    pub fn eval(&self, raw: &[f64], a: &KernelInput, b: &KernelInput) -> f64 {
        self.eval_impl(raw, a, b, None)
    }

    /// Kernel value; `grad[i]` receives `dk/d raw[i]` for every kernel
    /// parameter (the noise slot is left untouched).
    pub fn eval_grad(&self, raw: &[f64], a: &KernelInput, b: &KernelInput, grad: &mut [f64]) -> f64 {
        self.eval_impl(raw, a, b, Some(grad))
    }

    fn eval_impl(
        &self,
        raw: &[f64],
        a: &KernelInput,
        b: &KernelInput,
        mut grad: Option<&mut [f64]>,
    ) -> f64 {
        let sigma = raw[0].exp();
        let nc = self.n_cat_params();
        let nn = self.n_num_params();
        let cat_raw = &raw[1..1 + nc];
        let num_raw = &raw[1 + nc..1 + nc + nn];
        let mixture = self.is_mixture();
        // Sub-kernels are unit-diagonal except the standalone overlap kernel,
        // whose diagonal is the mean weight.
        let standalone_overlap = self.config.kind == KernelKind::Overlap;

        let mut g_cat = vec![0.0; if grad.is_some() { nc } else { 0 }];
        let mut g_num = vec![0.0; if grad.is_some() { nn } else { 0 }];
        let want = grad.is_some();

        let kc = match self.cat_kind() {
            None => 1.0,
            Some(CategoricalKernel::Overlap) => {
                let d = self.n_cat as f64;
                let mut s = 0.0;
                let mut total = 0.0;
                for p in 0..nc {
                    let l = cat_raw[p].exp();
                    total += l;
                    if a.cat[p] == b.cat[p] {
                        s += l;
                    }
                }
                if standalone_overlap {
                    if want {
                        for p in 0..nc {
                            if a.cat[p] == b.cat[p] {
                                g_cat[p] = cat_raw[p].exp() / d;
                            }
                        }
                    }
                    s / d
                } else {
                    let k = s / total;
                    if want {
                        for p in 0..nc {
                            let delta = if a.cat[p] == b.cat[p] { 1.0 } else { 0.0 };
                            g_cat[p] = cat_raw[p].exp() * (delta - k) / total;
                        }
                    }
                    k
                }
            }
            Some(CategoricalKernel::TransformedOverlap) => {
                let d = self.n_cat as f64;
                let mut s = 0.0;
                let mut total = 0.0;
                for p in 0..nc {
                    let l = cat_raw[p].exp();
                    total += l;
                    if a.cat[p] == b.cat[p] {
                        s += l;
                    }
                }
                let (sa, sb) = (s / d, total / d);
                let denom = sb.exp_m1();
                let k = sa.exp_m1() / denom;
                if want {
                    let (ea, eb) = (sa.exp(), sb.exp());
                    for p in 0..nc {
                        let delta = if a.cat[p] == b.cat[p] { 1.0 } else { 0.0 };
                        g_cat[p] = cat_raw[p].exp() / d * (ea * delta - k * eb) / denom;
                    }
                }
                k
            }
            Some(CategoricalKernel::Hed) => matern_with_grad(&a.hed, &b.hed, cat_raw, want.then_some(&mut g_cat[..])),
        };
        let kn = if nn > 0 {
            matern_with_grad(&a.num, &b.num, num_raw, want.then_some(&mut g_num[..]))
        } else {
            1.0
        };

        let (value, d_kc, d_kn, d_mix) = if mixture {
            let lam = sigmoid(raw[1 + nc + nn]);
            let inner = lam * (kc + kn) + (1.0 - lam) * kc * kn;
            (
                sigma * inner,
                sigma * (lam + (1.0 - lam) * kn),
                sigma * (lam + (1.0 - lam) * kc),
                sigma * ((kc + kn) - kc * kn) * lam * (1.0 - lam),
            )
        } else if nn > 0 {
            (sigma * kn, 0.0, sigma, 0.0)
        } else {
            (sigma * kc, sigma, 0.0, 0.0)
        };

        if let Some(g) = grad.as_deref_mut() {
            g[0] = value;
            for p in 0..nc {
                g[1 + p] = d_kc * g_cat[p];
            }
            for i in 0..nn {
                g[1 + nc + i] = d_kn * g_num[i];
            }
            if mixture {
                g[1 + nc + nn] = d_mix;
            }
        }
        value
    }
}

/// Unit-variance Matérn-5/2 with `log ℓ = log_ls`; writes `dk/d log ℓ_i`.
fn matern_with_grad(u: &[f64], v: &[f64], log_ls: &[f64], grad: Option<&mut [f64]>) -> f64 {
    let mut r2 = 0.0;
    for i in 0..u.len() {
        let t = (u[i] - v[i]) / log_ls[i].exp();
        r2 += t * t;
    }
    let r = r2.sqrt();
    let e = (-SQRT5 * r).exp();
    if let Some(g) = grad {
        // d k / d log ℓ_i = (5/3)(1 + √5 r) e^{-√5 r} (Δ_i / ℓ_i)^2
        let c = 5.0 / 3.0 * (1.0 + SQRT5 * r) * e;
        for i in 0..u.len() {
            let t = (u[i] - v[i]) / log_ls[i].exp();
            g[i] = c * t * t;
        }
    }
    (1.0 + SQRT5 * r + 5.0 * r2 / 3.0) * e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::VariableSpec;

    #[test]
    fn overlap_examples() {
        assert_eq!(kernel_overlap(&[0, 1, 2], &[0, 1, 2], 1.0, &[1.0; 3]).unwrap(), 1.0);
        assert_eq!(kernel_overlap(&[0, 1], &[1, 0], 1.0, &[1.0; 2]).unwrap(), 0.0);
        let k = kernel_overlap(&[0, 1], &[1, 1], 2.0, &[1.0, 3.0]).unwrap();
        assert!((k - 3.0).abs() < 1e-12);
        assert!(kernel_overlap(&[0], &[0, 1], 1.0, &[1.0]).is_err());
    }

    #[test]
    fn transformed_overlap_examples() {
        let k = kernel_transformed_overlap(&[0, 1], &[0, 0], 1.0, &[1.0, 1.0]).unwrap();
        let oracle = (0.5f64.exp() - 1.0) / (1f64.exp() - 1.0);
        assert!((k - oracle).abs() < 1e-12);
        assert!((oracle - 0.37754).abs() < 1e-5);
        assert_eq!(kernel_transformed_overlap(&[0, 1], &[1, 0], 1.0, &[1.0; 2]).unwrap(), 0.0);
        assert_eq!(kernel_transformed_overlap(&[2, 1], &[2, 1], 1.7, &[0.3, 2.0]).unwrap(), 1.7);
        assert_eq!(kernel_transformed_overlap(&[2, 1], &[2, 0], 1.7, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn matern_examples() {
        let k = kernel_matern52(&[0.0], &[1.0], 1.0, &[1.0]).unwrap();
        let s5 = 5f64.sqrt();
        assert!((k - (1.0 + s5 + 5.0 / 3.0) * (-s5).exp()).abs() < 1e-12);
        assert!((k - 0.52399).abs() < 1e-5);
        assert_eq!(kernel_matern52(&[0.3, 0.1], &[0.3, 0.1], 2.5, &[0.2, 0.7]).unwrap(), 2.5);
        assert!(kernel_matern52(&[0.0], &[1e4], 1.0, &[1.0]).unwrap() < 1e-300);
    }

    #[test]
    fn hed_examples() {
        let x = vec![0, 1, 2];
        let y = vec![1, 2, 0];
        let k = kernel_hed(&x, &y, &[x.clone()], 1.0, &[0.7]).unwrap();
        let r = 1.0 / 0.7;
        let s = 5f64.sqrt() * r;
        assert!((k - (1.0 + s + s * s / 3.0) * (-s).exp()).abs() < 1e-12);
        assert_eq!(kernel_hed(&x, &x, &[y.clone()], 1.3, &[0.7]).unwrap(), 1.3);
        assert!(kernel_hed(&x, &y, &[], 1.0, &[]).is_err());
    }

    #[test]
    fn mixture_endpoints() {
        assert_eq!(kernel_mixture(0.3, 0.6, 1.0, 1.0), 0.3 + 0.6);
        assert_eq!(kernel_mixture(0.3, 0.6, 1.0, 0.0), 0.3 * 0.6);
        assert_eq!(kernel_mixture(1.0, 1.0, 2.0, 0.25), 2.0 * (0.25 * 2.0 + 0.75));
    }

    fn mixed_space() -> SearchSpace {
        SearchSpace::new(vec![
            VariableSpec::categorical("a", ["x", "y", "z"]),
            VariableSpec::continuous("b", 0.0, 1.0),
            VariableSpec::categorical("c", ["x", "y"]),
            VariableSpec::continuous("d", -1.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn configured_kernel_matches_reference() {
        let space = mixed_space();
        let a = UnitPoint::new(vec![0.2, 0.9], vec![2, 1]);
        let b = UnitPoint::new(vec![0.5, 0.4], vec![2, 0]);
        for cat in [
            CategoricalKernel::Overlap,
            CategoricalKernel::TransformedOverlap,
            CategoricalKernel::Hed,
        ] {
            let k = Kernel::new(KernelConfig::mixture(cat), &space).unwrap();
            let mut p = k.default_params();
            p.sigma = 1.7;
            p.mix_weight = 0.3;
            p.num_lengthscales = vec![0.4, 1.3];
            if cat != CategoricalKernel::Hed {
                p.cat_lengthscales = vec![0.5, 2.0];
            }
            let raw = k.params_to_raw(&p).unwrap();
            let got = k.eval(&raw, &k.prepare(&a), &k.prepare(&b));
            let kn = kernel_matern52(&a.num, &b.num, 1.0, &p.num_lengthscales).unwrap();
            let kc = match cat {
                CategoricalKernel::Overlap => {
                    let s = kernel_overlap(&a.cat, &b.cat, 1.0, &p.cat_lengthscales).unwrap();
                    s / kernel_overlap(&a.cat, &a.cat, 1.0, &p.cat_lengthscales).unwrap()
                }
                CategoricalKernel::TransformedOverlap => {
                    kernel_transformed_overlap(&a.cat, &b.cat, 1.0, &p.cat_lengthscales).unwrap()
                }
                CategoricalKernel::Hed => {
                    kernel_hed(&a.cat, &b.cat, k.dictionary(), 1.0, &p.hed_lengthscales).unwrap()
                }
            };
            let want = kernel_mixture(kc, kn, 1.7, 0.3);
            assert!((got - want).abs() < 1e-12, "{cat:?}: {got} vs {want}");
        }
    }

    #[test]
    fn kernel_gradients_match_finite_differences() {
        let space = mixed_space();
        let cat_space = SearchSpace::new(vec![
            VariableSpec::categorical("a", ["x", "y", "z"]),
            VariableSpec::categorical("b", ["x", "y", "z"]),
            VariableSpec::categorical("c", ["x", "y"]),
        ])
        .unwrap();
        let cases = [
            (KernelConfig::overlap(), &cat_space),
            (KernelConfig::transformed_overlap(), &cat_space),
            (KernelConfig::hed(5, 3), &cat_space),
            (KernelConfig::matern52(), &space),
            (KernelConfig::mixture(CategoricalKernel::TransformedOverlap), &space),
            (KernelConfig::mixture(CategoricalKernel::Overlap), &space),
            (KernelConfig::mixture(CategoricalKernel::Hed), &space),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (config, sp) in cases {
            let k = Kernel::new(config.clone(), sp).unwrap();
            let pts = sp.sample_uniform(2, 4).unwrap();
            let a = k.prepare(&sp.transform(&pts[0]).unwrap());
            let b = k.prepare(&sp.transform(&pts[1]).unwrap());
            let raw: Vec<f64> = (0..k.n_params()).map(|_| rng.random_range(-0.8..0.8)).collect();
            let mut g = vec![0.0; k.n_params()];
            k.eval_grad(&raw, &a, &b, &mut g);
            for i in 0..k.noise_index() {
                let h = 1e-6;
                let mut up = raw.clone();
                up[i] += h;
                let mut dn = raw.clone();
                dn[i] -= h;
                let fd = (k.eval(&up, &a, &b) - k.eval(&dn, &a, &b)) / (2.0 * h);
                assert!((fd - g[i]).abs() < 1e-6, "{config:?} param {i}: {fd} vs {}", g[i]);
            }
        }
    }
}
