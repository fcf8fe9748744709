//! Sparse second-order Bayesian linear regression with a Horseshoe prior,
//! sampled by Gibbs with the inverse-gamma auxiliary-variable scheme.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::gp::standardization;
use super::Dataset;
use crate::error::{Error, Result};
use crate::space::{SearchSpace, UnitPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HorseshoeOptions {
    pub order: usize,
    pub threshold: f64,
    /// Shape and scale of the inverse-gamma prior on the noise variance.
    pub noise_a: f64,
    pub noise_b: f64,
    pub burn_in: usize,
    pub n_draws: usize,
}

impl Default for HorseshoeOptions {
    fn default() -> Self {
        Self {
            order: 2,
            threshold: 0.1,
            noise_a: 2.0,
            noise_b: 1.0,
            burn_in: 100,
            n_draws: 100,
        }
    }
}

/// One-hot (first category as baseline) main effects plus products of
/// dummies from different variables, after a leading constant.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    /// `(variable, category)` of every dummy.
    dummies: Vec<(usize, usize)>,
    order: usize,
    n_features: usize,
}

impl FeatureMap {
    pub fn new(category_counts: &[usize], order: usize) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(Error::InvalidParameter(format!(
                "feature order must be 1 or 2, got {order}"
            )));
        }
        let dummies: Vec<(usize, usize)> = category_counts
            .iter()
            .enumerate()
            .flat_map(|(v, &k)| (1..k).map(move |c| (v, c)))
            .collect();
        let m = dummies.len();
        let mut n_features = 1 + m;
        if order == 2 {
            for a in 0..m {
                n_features += dummies[a + 1..]
                    .iter()
                    .filter(|d| d.0 != dummies[a].0)
                    .count();
            }
        }
        Ok(Self {
            dummies,
            order,
            n_features,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn features(&self, cat: &[usize]) -> Vec<f64> {
        let z: Vec<f64> = self
            .dummies
            .iter()
            .map(|&(v, c)| if cat[v] == c { 1.0 } else { 0.0 })
            .collect();
        let mut out = Vec::with_capacity(self.n_features);
        out.push(1.0);
        out.extend_from_slice(&z);
        if self.order == 2 {
            for a in 0..z.len() {
                for b in a + 1..z.len() {
                    if self.dummies[a].0 != self.dummies[b].0 {
                        out.push(z[a] * z[b]);
                    }
                }
            }
        }
        out
    }
}

/// Draw from IG(shape, scale) as `scale / Gamma(shape, 1)`.
fn inv_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
    scale / g.max(1e-300)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone)]
pub struct HorseshoeModel {
    features: FeatureMap,
    draws: Vec<Vec<f64>>,
    posterior_mean: Vec<f64>,
    y_mean: f64,
    y_scale: f64,
    threshold: f64,
}

/// Samples `β ~ N(Q⁻¹ Xᵀy / σ², Q⁻¹)`, `Q = (XᵀX + D⁻¹) / σ²`, where `D` is
/// the prior variance of β divided by σ².
fn sample_coefficients<R: Rng + ?Sized>(
    rng: &mut R,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    prior_var: &[f64],
    sigma2: f64,
) -> DVector<f64> {
    let (n, p) = x.shape();
    let sigma = sigma2.sqrt();
    if p > n {
        // Fast sampler for p > n: with Φ = X/σ, α = y/σ and D = σ² prior_var,
        // u ~ N(0, D), δ ~ N(0, I), v = Φu + δ,
        // (Φ D Φᵀ + I) w = α - v, β = u + D Φᵀ w.
        let d: Vec<f64> = prior_var.iter().map(|v| v * sigma2).collect();
        let u = DVector::from_iterator(p, d.iter().map(|dj| dj.sqrt() * normal(rng)));
        let delta = DVector::from_iterator(n, (0..n).map(|_| normal(rng)));
        let phi = x / sigma;
        let v = &phi * &u + delta;
        let mut phi_d = phi.clone();
        for (j, mut col) in phi_d.column_iter_mut().enumerate() {
            col *= d[j];
        }
        let mut m = &phi_d * phi.transpose();
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        let rhs = y / sigma - v;
        let w = m
            .cholesky()
            .map(|c| c.solve(&rhs))
            .unwrap_or_else(|| DVector::zeros(n));
        u + phi_d.transpose() * w
    } else {
        let mut q = x.transpose() * x;
        for j in 0..p {
            q[(j, j)] += 1.0 / prior_var[j];
        }
        q /= sigma2;
        let chol = match q.clone().cholesky() {
            Some(c) => c,
            None => {
                for j in 0..p {
                    q[(j, j)] += 1e-8;
                }
                q.cholesky().expect("regularized precision is SPD")
            }
        };
        let mean = chol.solve(&(x.transpose() * y / sigma2));
        let z = DVector::from_iterator(p, (0..p).map(|_| normal(rng)));
        let noise = chol
            .l_dirty()
            .transpose()
            .solve_upper_triangular(&z)
            .expect("non-singular factor");
        mean + noise
    }
}

pub fn hs_fit(
    space: &SearchSpace,
    data: &Dataset,
    options: &HorseshoeOptions,
    seed: u64,
) -> Result<HorseshoeModel> {
    if space.n_numeric() > 0 {
        return Err(Error::Incompatible(
            "the horseshoe model supports only categorical spaces".into(),
        ));
    }
    data.validate()?;
    if data.len() < 2 {
        return Err(Error::InvalidData("horseshoe fit needs at least 2 observations".into()));
    }
    if options.n_draws == 0 || options.threshold < 0.0 {
        return Err(Error::InvalidParameter("need n_draws >= 1 and threshold >= 0".into()));
    }
    let features = FeatureMap::new(&space.category_counts(), options.order)?;
    let n = data.len();
    let p = features.n_features();
    let mut x = DMatrix::zeros(n, p);
    for (i, u) in data.x.iter().enumerate() {
        for (j, f) in features.features(&u.cat).into_iter().enumerate() {
            x[(i, j)] = f;
        }
    }
    let (y_mean, y_scale) = standardization(&data.y);
    let y = DVector::from_iterator(n, data.y.iter().map(|v| (v - y_mean) / y_scale));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lambda2: Vec<f64> = vec![1.0; p];
    let mut nu = vec![1.0; p];
    let mut tau2: f64 = 1.0;
    let mut xi = 1.0;
    let mut sigma2 = 1.0;
    let mut draws = Vec::with_capacity(options.n_draws);
    for sweep in 0..options.burn_in + options.n_draws {
        let prior_var: Vec<f64> = lambda2.iter().map(|l| (l * tau2).max(1e-300)).collect();
        let beta = sample_coefficients(&mut rng, &x, &y, &prior_var, sigma2);

        let resid = &y - &x * &beta;
        let shrink: f64 = beta
            .iter()
            .zip(&prior_var)
            .map(|(b, v)| b * b / v)
            .sum();
        sigma2 = inv_gamma(
            &mut rng,
            options.noise_a + (n + p) as f64 / 2.0,
            options.noise_b + (resid.norm_squared() + shrink) / 2.0,
        );
        for j in 0..p {
            lambda2[j] = inv_gamma(
                &mut rng,
                1.0,
                1.0 / nu[j] + beta[j] * beta[j] / (2.0 * tau2 * sigma2),
            );
            nu[j] = inv_gamma(&mut rng, 1.0, 1.0 + 1.0 / lambda2[j]);
        }
        let s: f64 = beta.iter().zip(&lambda2).map(|(b, l)| b * b / l).sum();
        tau2 = inv_gamma(&mut rng, (p as f64 + 1.0) / 2.0, 1.0 / xi + s / (2.0 * sigma2));
        xi = inv_gamma(&mut rng, 1.0, 1.0 + 1.0 / tau2);

        if sweep >= options.burn_in {
            draws.push(beta.iter().copied().collect::<Vec<f64>>());
        }
    }

    let mut posterior_mean = vec![0.0; p];
    for d in &draws {
        for (m, b) in posterior_mean.iter_mut().zip(d) {
            *m += b / draws.len() as f64;
        }
    }
    for j in 0..p {
        if posterior_mean[j].abs() < options.threshold {
            posterior_mean[j] = 0.0;
            for d in draws.iter_mut() {
                d[j] = 0.0;
            }
        }
    }
    Ok(HorseshoeModel {
        features,
        draws,
        posterior_mean,
        y_mean,
        y_scale,
        threshold: options.threshold,
    })
}

impl HorseshoeModel {
    pub fn feature_map(&self) -> &FeatureMap {
        &self.features
    }

    pub fn draws(&self) -> &[Vec<f64>] {
        &self.draws
    }

    /// Posterior-mean coefficients on the standardized scale, thresholded.
    pub fn posterior_mean(&self) -> &[f64] {
        &self.posterior_mean
    }

    /// Posterior-mean coefficients on the raw target scale.
    pub fn posterior_mean_raw(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.posterior_mean.iter().map(|b| b * self.y_scale).collect();
        c[0] += self.y_mean;
        c
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn standardization(&self) -> (f64, f64) {
        (self.y_mean, self.y_scale)
    }

    /// One uniformly chosen stored draw.
    pub fn sample_objective(&self, seed: u64) -> Result<Vec<f64>> {
        if self.draws.is_empty() {
            return Err(Error::Fit("horseshoe model has no stored draws".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.draws[rng.random_range(0..self.draws.len())].clone())
    }

    /// `coefficients · features(u)` on the raw target scale.
    pub fn evaluate(&self, coefficients: &[f64], u: &UnitPoint) -> f64 {
        let f = self.features.features(&u.cat);
        let s: f64 = f.iter().zip(coefficients).map(|(a, b)| a * b).sum();
        self.y_mean + self.y_scale * s
    }
}

pub fn hs_sample_objective(model: &HorseshoeModel, seed: u64) -> Result<Vec<f64>> {
    model.sample_objective(seed)
}
