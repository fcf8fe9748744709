//! Acquisition functions. Every utility is "larger is better" for a
//! minimization problem.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::space::UnitPoint;
use crate::surrogates::Surrogate;

pub const DEFAULT_LCB_BETA: f64 = 1.96 * 1.96;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn check_moments(mu: f64, sigma: f64) -> Result<()> {
    if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "posterior moments must be finite with sigma >= 0 (mu = {mu}, sigma = {sigma})"
        )));
    }
    Ok(())
}

/// Expected improvement below `y_best`.
pub fn ei(mu: f64, sigma: f64, y_best: f64) -> Result<f64> {
    check_moments(mu, sigma)?;
    let gain = y_best - mu;
    if sigma == 0.0 {
        return Ok(gain.max(0.0));
    }
    let z = gain / sigma;
    Ok((gain * normal_cdf(z) + sigma * normal_pdf(z)).max(0.0))
}

/// Probability of improving on `y_best`.
pub fn pi(mu: f64, sigma: f64, y_best: f64) -> Result<f64> {
    check_moments(mu, sigma)?;
    if sigma == 0.0 {
        return Ok(if mu < y_best { 1.0 } else { 0.0 });
    }
    Ok(normal_cdf((y_best - mu) / sigma))
}

/// `-μ - √β σ`: the negated lower confidence bound.
pub fn lcb(mu: f64, sigma: f64, beta: f64) -> Result<f64> {
    check_moments(mu, sigma)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
    }
    Ok(-mu - beta.sqrt() * sigma)
}

/// `μ + √β σ`.
pub fn ucb(mu: f64, sigma: f64, beta: f64) -> Result<f64> {
    check_moments(mu, sigma)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")));
    }
    Ok(mu + beta.sqrt() * sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcquisitionSpec {
    Ei { y_best: f64 },
    Pi { y_best: f64 },
    Lcb { beta: f64 },
    /// Upper bound on the negated objective; ranks points like `Lcb`.
    Ucb { beta: f64 },
    Ts { seed: u64 },
}

/// Acquisition kind without its runtime incumbent or seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AcquisitionKind {
    Ei,
    Pi,
    Lcb { beta: f64 },
    Ucb { beta: f64 },
    Ts,
}

impl AcquisitionKind {
    /// Parses `ei`, `pi`, `lcb`, `lcb:beta=3.84`, `ucb[:beta=..]`, `ts`.
    pub fn parse(id: &str) -> Result<Self> {
        let mut parts = id.split(':');
        let head = parts.next().unwrap_or_default();
        let mut beta = DEFAULT_LCB_BETA;
        for part in parts {
            match part.split_once('=') {
                Some(("beta", v)) => {
                    beta = v.parse().map_err(|_| {
                        Error::InvalidParameter(format!("bad beta in acquisition `{id}`"))
                    })?;
                    if !(beta > 0.0) {
                        return Err(Error::InvalidParameter(format!("beta must be > 0 in `{id}`")));
                    }
                }
                _ => {
                    return Err(Error::Unsupported {
                        kind: "acquisition",
                        id: id.to_string(),
                    })
                }
            }
        }
        let kind = match head {
            "ei" => Self::Ei,
            "pi" => Self::Pi,
            "lcb" => Self::Lcb { beta },
            "ucb" => Self::Ucb { beta },
            "ts" => Self::Ts,
            _ => {
                return Err(Error::Unsupported {
                    kind: "acquisition",
                    id: id.to_string(),
                })
            }
        };
        if matches!(kind, Self::Ei | Self::Pi | Self::Ts) && id.contains(':') {
            return Err(Error::Unsupported {
                kind: "acquisition",
                id: id.to_string(),
            });
        }
        Ok(kind)
    }

    pub fn id(&self) -> String {
        match self {
            Self::Ei => "ei".into(),
            Self::Pi => "pi".into(),
            Self::Lcb { beta } => format!("lcb:beta={beta}"),
            Self::Ucb { beta } => format!("ucb:beta={beta}"),
            Self::Ts => "ts".into(),
        }
    }

    pub fn spec(&self, y_best: f64, seed: u64) -> AcquisitionSpec {
        match *self {
            Self::Ei => AcquisitionSpec::Ei { y_best },
            Self::Pi => AcquisitionSpec::Pi { y_best },
            Self::Lcb { beta } => AcquisitionSpec::Lcb { beta },
            Self::Ucb { beta } => AcquisitionSpec::Ucb { beta },
            Self::Ts => AcquisitionSpec::Ts { seed },
        }
    }

    pub fn requires_horseshoe(&self) -> bool {
        matches!(self, Self::Ts)
    }
}

/// An acquisition bound to a fitted surrogate.
#[derive(Debug, Clone)]
pub struct Acquisition<'a> {
    model: &'a Surrogate,
    spec: AcquisitionSpec,
    coefficients: Option<Vec<f64>>,
}

impl<'a> Acquisition<'a> {
    pub fn new(model: &'a Surrogate, spec: AcquisitionSpec) -> Result<Self> {
        let coefficients = match (model, spec) {
            (Surrogate::Gp(_), AcquisitionSpec::Ts { .. }) => {
                return Err(Error::Incompatible(
                    "ts supports only the horseshoe linear model".into(),
                ))
            }
            (Surrogate::Horseshoe(_), AcquisitionSpec::Ts { seed }) => match model {
                Surrogate::Horseshoe(h) => Some(h.sample_objective(seed)?),
                Surrogate::Gp(_) => unreachable!(),
            },
            (Surrogate::Horseshoe(_), _) => {
                return Err(Error::Incompatible(
                    "the horseshoe model has no closed-form posterior; ei, pi and lcb need a GP"
                        .into(),
                ))
            }
            (Surrogate::Gp(_), AcquisitionSpec::Lcb { beta } | AcquisitionSpec::Ucb { beta })
                if !(beta > 0.0) =>
            {
                return Err(Error::InvalidParameter(format!("beta must be > 0, got {beta}")))
            }
            _ => None,
        };
        Ok(Self {
            model,
            spec,
            coefficients,
        })
    }

    pub fn spec(&self) -> &AcquisitionSpec {
        &self.spec
    }

    pub fn evaluate(&self, u: &UnitPoint) -> f64 {
        match self.model {
            Surrogate::Gp(gp) => {
                let (mu, var) = gp.predict(u);
                let sigma = var.max(0.0).sqrt();
                let v = match self.spec {
                    AcquisitionSpec::Ei { y_best } => ei(mu, sigma, y_best),
                    AcquisitionSpec::Pi { y_best } => pi(mu, sigma, y_best),
                    AcquisitionSpec::Lcb { beta } => lcb(mu, sigma, beta),
                    AcquisitionSpec::Ucb { beta } => ucb(-mu, sigma, beta),
                    AcquisitionSpec::Ts { .. } => unreachable!("rejected in new"),
                };
                v.unwrap_or(f64::NEG_INFINITY)
            }
            Surrogate::Horseshoe(h) => {
                -h.evaluate(self.coefficients.as_deref().expect("ts coefficients"), u)
            }
        }
    }
}

pub fn acq_evaluate(model: &Surrogate, spec: AcquisitionSpec, u: &UnitPoint) -> Result<f64> {
    Ok(Acquisition::new(model, spec)?.evaluate(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        assert_eq!(ei(1.0, 0.0, 2.0).unwrap(), 1.0);
        assert_eq!(ei(3.0, 0.0, 2.0).unwrap(), 0.0);
        assert!((ei(2.0, 1.0, 2.0).unwrap() - normal_pdf(0.0)).abs() < 1e-15);
        assert!(ei(12.0, 0.1, 2.0).unwrap() < 1e-12);
        assert_eq!(pi(2.0, 1.0, 2.0).unwrap(), 0.5);
        assert_eq!(pi(1.0, 0.0, 2.0).unwrap(), 1.0);
        let p = pi(3.0, 1.0, 2.0).unwrap();
        assert!((p - 0.158_655_253_931_457_05).abs() < 1e-12, "{p:e}");
        assert_eq!(lcb(1.5, 0.0, 2.0).unwrap(), -1.5);
        assert_eq!(lcb(0.0, 1.0, 4.0).unwrap(), -2.0);
        assert!(lcb(0.0, 1.0, 0.0).is_err());
        assert!(ei(f64::NAN, 1.0, 0.0).is_err());
        assert_eq!(ucb(1.0, 1.0, 4.0).unwrap(), 3.0);
    }

    #[test]
    fn parse_ids() {
        assert_eq!(AcquisitionKind::parse("ei").unwrap(), AcquisitionKind::Ei);
        assert_eq!(
            AcquisitionKind::parse("lcb:beta=3.84").unwrap(),
            AcquisitionKind::Lcb { beta: 3.84 }
        );
        assert_eq!(
            AcquisitionKind::parse("lcb").unwrap(),
            AcquisitionKind::Lcb { beta: DEFAULT_LCB_BETA }
        );
        assert!(AcquisitionKind::parse("lcb:beta=-1").is_err());
        assert!(AcquisitionKind::parse("qei").is_err());
        assert!(AcquisitionKind::parse("ei:beta=2").is_err());
    }
}
