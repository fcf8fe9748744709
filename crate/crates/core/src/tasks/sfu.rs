//! Standard d-dimensional test functions generalized to mixed domains.
//!
//! Continuous variables range over the function's canonical domain, integer
//! variables over the integers inside it, and nominal variables decode through
//! an evenly spaced grid that includes both domain endpoints.

use std::f64::consts::{E, PI};

use super::Task;
use crate::error::{Error, Result};
use crate::space::{Point, SearchSpace, Value, VariableSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfuFunction {
    Ackley,
    Sphere,
    RotatedHyperEllipsoid,
    Rastrigin,
    Rosenbrock,
    Levy,
    Griewank,
    StyblinskiTang,
}

pub fn sfu_function_ids() -> &'static [&'static str] {
    &[
        "ackley",
        "sphere",
        "rotated_hyper_ellipsoid",
        "rastrigin",
        "rosenbrock",
        "levy",
        "griewank",
        "styblinski_tang",
    ]
}

/// Root of `4x^3 - 32x + 5` closest to the Styblinski-Tang minimum.
const STYBLINSKI_TANG_ARGMIN: f64 = -2.903_534_027_771_178;

impl SfuFunction {
    pub fn from_id(id: &str) -> Result<Self> {
        Ok(match id {
            "ackley" => Self::Ackley,
            "sphere" => Self::Sphere,
            "rotated_hyper_ellipsoid" => Self::RotatedHyperEllipsoid,
            "rastrigin" => Self::Rastrigin,
            "rosenbrock" => Self::Rosenbrock,
            "levy" => Self::Levy,
            "griewank" => Self::Griewank,
            "styblinski_tang" => Self::StyblinskiTang,
            _ => return Err(Error::UnknownTask(format!("sfu:{id}"))),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Ackley => "ackley",
            Self::Sphere => "sphere",
            Self::RotatedHyperEllipsoid => "rotated_hyper_ellipsoid",
            Self::Rastrigin => "rastrigin",
            Self::Rosenbrock => "rosenbrock",
            Self::Levy => "levy",
            Self::Griewank => "griewank",
            Self::StyblinskiTang => "styblinski_tang",
        }
    }

    /// Canonical per-coordinate domain.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Ackley => (-32.768, 32.768),
            Self::Sphere | Self::Rastrigin => (-5.12, 5.12),
            Self::RotatedHyperEllipsoid => (-65.536, 65.536),
            Self::Rosenbrock => (-5.0, 10.0),
            Self::Levy => (-10.0, 10.0),
            Self::Griewank => (-600.0, 600.0),
            Self::StyblinskiTang => (-5.0, 5.0),
        }
    }

    /// Per-coordinate location of the global minimum.
    pub fn argmin_coordinate(&self) -> f64 {
        match self {
            Self::Rosenbrock | Self::Levy => 1.0,
            Self::StyblinskiTang => STYBLINSKI_TANG_ARGMIN,
            _ => 0.0,
        }
    }

    pub fn minimum(&self, d: usize) -> f64 {
        match self {
            Self::StyblinskiTang => {
                let x = STYBLINSKI_TANG_ARGMIN;
                d as f64 * 0.5 * (x.powi(4) - 16.0 * x * x + 5.0 * x)
            }
            _ => 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        match self {
            Self::Ackley => {
                let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
                let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
                -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
            }
            Self::Sphere => x.iter().map(|v| v * v).sum(),
            Self::RotatedHyperEllipsoid => {
                let mut prefix = 0.0;
                let mut total = 0.0;
                for v in x {
                    prefix += v * v;
                    total += prefix;
                }
                total
            }
            Self::Rastrigin => {
                10.0 * d
                    + x.iter()
                        .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
                        .sum::<f64>()
            }
            Self::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2))
                .sum(),
            Self::Levy => {
                let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
                let n = w.len();
                let head = (PI * w[0]).sin().powi(2);
                let body: f64 = w[..n - 1]
                    .iter()
                    .map(|wi| (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2)))
                    .sum();
                let wd = w[n - 1];
                let tail = (wd - 1.0).powi(2) * (1.0 + (2.0 * PI * wd).sin().powi(2));
                head + body + tail
            }
            Self::Griewank => {
                let s: f64 = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let p: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product();
                s - p + 1.0
            }
            Self::StyblinskiTang => {
                0.5 * x
                    .iter()
                    .map(|v| v.powi(4) - 16.0 * v * v + 5.0 * v)
                    .sum::<f64>()
            }
        }
    }
}

/// Decoding table from category index to a real coordinate, one list per
/// nominal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryValueMap {
    values: Vec<Vec<f64>>,
}

impl CategoryValueMap {
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        for list in &values {
            if list.len() < 2 || list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidTask(
                    "category values must be strictly increasing with at least two entries".into(),
                ));
            }
        }
        Ok(Self { values })
    }

    /// `n_dims` copies of `k` evenly spaced values on `[lo, hi]`, endpoints
    /// included.
    pub fn evenly_spaced(n_dims: usize, k: usize, lo: f64, hi: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidTask("need at least two categories".into()));
        }
        let step = (hi - lo) / (k - 1) as f64;
        let grid: Vec<f64> = (0..k)
            .map(|j| if j == k - 1 { hi } else { lo + j as f64 * step })
            .collect();
        Self::new(vec![grid; n_dims])
    }

    pub fn decode(&self, dim: usize, index: usize) -> f64 {
        self.values[dim][index]
    }

    pub fn values(&self, dim: usize) -> &[f64] {
        &self.values[dim]
    }

    pub fn n_dims(&self) -> usize {
        self.values.len()
    }
}

/// Dimension counts per variable kind.
#[derive(Debug, Clone, PartialEq)]
pub struct SfuConfig {
    pub n_continuous: usize,
    pub n_integer: usize,
    pub n_nominal: usize,
    pub n_categories: usize,
}

impl Default for SfuConfig {
    fn default() -> Self {
        Self {
            n_continuous: 0,
            n_integer: 0,
            n_nominal: 0,
            n_categories: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SfuTask {
    id: String,
    function: SfuFunction,
    space: SearchSpace,
    decoding: CategoryValueMap,
    /// (range start, count) of nominal variables in declaration order.
    nominal_start: usize,
    known_optimum: Option<f64>,
    optimum: Option<Point>,
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

impl SfuTask {
    fn build(
        id: String,
        function: SfuFunction,
        continuous: Vec<(f64, f64)>,
        integer: Vec<(i64, i64)>,
        decoding: CategoryValueMap,
    ) -> Result<Self> {
        let mut specs = Vec::new();
        for (i, (lo, hi)) in continuous.iter().enumerate() {
            specs.push(VariableSpec::continuous(format!("c{i}"), *lo, *hi));
        }
        for (i, (lo, hi)) in integer.iter().enumerate() {
            specs.push(VariableSpec::integer(format!("i{i}"), *lo, *hi));
        }
        let nominal_start = specs.len();
        for dim in 0..decoding.n_dims() {
            let labels: Vec<String> = decoding.values(dim).iter().map(|v| label(*v)).collect();
            specs.push(VariableSpec::categorical(format!("h{dim}"), labels));
        }
        if specs.is_empty() {
            return Err(Error::InvalidTask("dimension must be at least 1".into()));
        }
        let space = SearchSpace::new(specs)?;

        let target = function.argmin_coordinate();
        let mut optimum = Vec::with_capacity(space.dim());
        let mut representable = true;
        for (lo, hi) in &continuous {
            representable &= (*lo..=*hi).contains(&target);
            optimum.push(Value::Real(target));
        }
        for (lo, hi) in &integer {
            representable &= target.fract() == 0.0 && (*lo as f64..=*hi as f64).contains(&target);
            optimum.push(Value::Int(target as i64));
        }
        for dim in 0..decoding.n_dims() {
            match decoding
                .values(dim)
                .iter()
                .position(|v| (v - target).abs() < 1e-9)
            {
                Some(idx) => optimum.push(Value::Cat(idx)),
                None => representable = false,
            }
        }
        let (known_optimum, optimum) = if representable {
            (Some(function.minimum(space.dim())), Some(Point(optimum)))
        } else {
            (None, None)
        };
        Ok(Self {
            id,
            function,
            space,
            decoding,
            nominal_start,
            known_optimum,
            optimum,
        })
    }

    pub(crate) fn set_id(&mut self, id: &str) {
        self.id = id.to_string();
    }

    pub fn function(&self) -> SfuFunction {
        self.function
    }

    pub fn decoding(&self) -> &CategoryValueMap {
        &self.decoding
    }

    /// Real-valued input vector the test function sees for `x`.
    pub fn decode(&self, x: &Point) -> Vec<f64> {
        x.0.iter()
            .enumerate()
            .map(|(i, v)| match *v {
                Value::Real(r) => r,
                Value::Int(k) => k as f64,
                Value::Cat(c) => self.decoding.decode(i - self.nominal_start, c),
            })
            .collect()
    }
}

impl Task for SfuTask {
    fn id(&self) -> &str {
        &self.id
    }

    fn search_space(&self) -> &SearchSpace {
        &self.space
    }

    fn evaluate(&self, x: &Point) -> f64 {
        self.function.eval(&self.decode(x))
    }

    fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    fn optimum_point(&self) -> Option<Point> {
        self.optimum.clone()
    }
}

pub fn make_sfu_task(fn_id: &str, config: &SfuConfig) -> Result<SfuTask> {
    let function = SfuFunction::from_id(fn_id)?;
    let total = config.n_continuous + config.n_integer + config.n_nominal;
    if total == 0 {
        return Err(Error::InvalidTask("dimension must be at least 1".into()));
    }
    let (lo, hi) = function.domain();
    let continuous = vec![(lo, hi); config.n_continuous];
    let integer = vec![(lo.ceil() as i64, hi.floor() as i64); config.n_integer];
    let decoding = if config.n_nominal == 0 {
        CategoryValueMap { values: Vec::new() }
    } else {
        CategoryValueMap::evenly_spaced(config.n_nominal, config.n_categories, lo, hi)?
    };
    let id = format!(
        "sfu:{fn_id}:num={}:int={}:d={}:cat={}",
        config.n_continuous, config.n_integer, config.n_nominal, config.n_categories
    );
    SfuTask::build(id, function, continuous, integer, decoding)
}

/// 20 nominal variables, 11 categories each, decoding onto
/// `{-32.768, ..., 32.768}`.
pub fn make_ackley20() -> SfuTask {
    let decoding = CategoryValueMap::evenly_spaced(20, 11, -32.768, 32.768).expect("valid grid");
    SfuTask::build("ackley20".into(), SfuFunction::Ackley, vec![], vec![], decoding)
        .expect("valid preset")
}

/// 3 continuous variables on `[-1, 1]` followed by 50 binary variables
/// decoding to `{0, 1}`.
pub fn make_ackley53() -> SfuTask {
    let decoding = CategoryValueMap::new(vec![vec![0.0, 1.0]; 50]).expect("valid grid");
    SfuTask::build(
        "ackley53".into(),
        SfuFunction::Ackley,
        vec![(-1.0, 1.0); 3],
        vec![],
        decoding,
    )
    .expect("valid preset")
}
