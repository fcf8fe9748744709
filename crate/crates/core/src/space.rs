//! Mixed search spaces: variable specs, points, the unit-cube transform,
//! uniform sampling and constraint predicates.
//!
//! A [`Point`] stores one [`Value`] per variable in declaration order.
//! Categorical values are indices into the variable's category list; labels
//! only appear when reading or writing JSON. The [`UnitPoint`] form splits a
//! point into its numeric block (continuous and integer variables scaled to
//! `[0, 1]`) and its categorical block (indices), which is the representation
//! every kernel and acquisition optimizer works on.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};

/// Attempts allowed per requested point before rejection sampling gives up.
pub const MAX_REJECTION_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum VariableKind {
    Continuous { lower: f64, upper: f64 },
    Integer { lower: i64, upper: i64 },
    Categorical { categories: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
}

impl VariableSpec {
    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Continuous { lower, upper },
        }
    }

    pub fn integer(name: impl Into<String>, lower: i64, upper: i64) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Integer { lower, upper },
        }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: VariableKind::Categorical {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, VariableKind::Categorical { .. })
    }

    /// Number of categories, or `None` for numeric variables.
    pub fn n_categories(&self) -> Option<usize> {
        match &self.kind {
            VariableKind::Categorical { categories } => Some(categories.len()),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            VariableKind::Continuous { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite()) {
                    return Err(Error::InvalidSpace(format!(
                        "variable `{}` has non-finite bounds",
                        self.name
                    )));
                }
                if lower >= upper {
                    return Err(Error::InvalidSpace(format!(
                        "variable `{}` has inverted bounds [{lower}, {upper}]",
                        self.name
                    )));
                }
            }
            VariableKind::Integer { lower, upper } => {
                if lower > upper {
                    return Err(Error::InvalidSpace(format!(
                        "variable `{}` has inverted bounds [{lower}, {upper}]",
                        self.name
                    )));
                }
            }
            VariableKind::Categorical { categories } => {
                if categories.is_empty() {
                    return Err(Error::InvalidSpace(format!(
                        "variable `{}` has an empty category list",
                        self.name
                    )));
                }
                let distinct: HashSet<&String> = categories.iter().collect();
                if distinct.len() != categories.len() {
                    return Err(Error::InvalidSpace(format!(
                        "variable `{}` has duplicate categories",
                        self.name
                    )));
                }
                if categories.len() < 2 {
                    return Err(Error::InvalidSpace(format!(
                        "variable `{}` needs at least two categories",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One coordinate of a [`Point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Int(i64),
    Cat(usize),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Real(v) => v,
            Value::Int(v) => v as f64,
            Value::Cat(v) => v as f64,
        }
    }

    fn key_bits(&self) -> u64 {
        match *self {
            Value::Real(v) => v.to_bits(),
            Value::Int(v) => v as u64,
            Value::Cat(v) => v as u64,
        }
    }
}

/// A full assignment, one value per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<Value>);

impl Point {
    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bitwise identity key, usable in hash sets for exact-duplicate checks.
    pub fn key(&self) -> Vec<u64> {
        self.0.iter().map(Value::key_bits).collect()
    }
}

/// Numeric block mapped to `[0, 1]`, categorical block kept as indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UnitPoint {
    pub num: Vec<f64>,
    pub cat: Vec<usize>,
}

impl UnitPoint {
    pub fn new(num: Vec<f64>, cat: Vec<usize>) -> Self {
        Self { num, cat }
    }

    pub fn key(&self) -> Vec<u64> {
        self.num
            .iter()
            .map(|v| v.to_bits())
            .chain(self.cat.iter().map(|&c| c as u64))
            .collect()
    }
}

/// Hamming distance between two categorical blocks.
pub fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

type Predicate = dyn Fn(&SearchSpace, &Point) -> bool + Send + Sync;

/// A named, pure validity predicate over points.
///
/// Built-in predicates are addressed by string id so configs stay
/// serializable:
///
/// * `eq:<var>=<value>` / `neq:<var>=<value>`: a variable equals (does not
///   equal) a category label or integer value.
/// * `weighted_sum:<lo>:<hi>:<label>=<w>,...`: the summed weights of the
///   labels assigned to all categorical variables lie in `[lo, hi]`
///   (unlisted labels weigh 0).
/// * `max_run:<k>`: no more than `k` consecutive categorical variables share
///   a label.
/// * `reject_all`: always invalid.
#[derive(Clone)]
pub struct Constraint {
    id: String,
    predicate: Arc<Predicate>,
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Constraint").field(&self.id).finish()
    }
}

impl PartialEq for Constraint {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Constraint {
    /// Wraps an arbitrary predicate. The id is what gets serialized, so it
    /// should be unique per predicate.
    pub fn custom<F>(id: impl Into<String>, f: F) -> Self
    where
        F: Fn(&SearchSpace, &Point) -> bool + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            predicate: Arc::new(f),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn check(&self, space: &SearchSpace, p: &Point) -> bool {
        (self.predicate)(space, p)
    }

    /// Resolves a built-in predicate id against a list of variables.
    pub fn parse(id: &str, variables: &[VariableSpec]) -> Result<Self> {
        let unknown = || Error::UnknownConstraint(id.to_string());
        if id == "reject_all" {
            return Ok(Self::custom(id, |_, _| false));
        }
        let (head, rest) = id.split_once(':').ok_or_else(unknown)?;
        match head {
            "eq" | "neq" => {
                let (var, raw) = rest.split_once('=').ok_or_else(unknown)?;
                let index = variables
                    .iter()
                    .position(|v| v.name == var)
                    .ok_or_else(unknown)?;
                let target = match &variables[index].kind {
                    VariableKind::Categorical { categories } => Value::Cat(
                        categories
                            .iter()
                            .position(|c| c == raw)
                            .ok_or_else(unknown)?,
                    ),
                    VariableKind::Integer { .. } => {
                        Value::Int(raw.parse().map_err(|_| unknown())?)
                    }
                    VariableKind::Continuous { .. } => {
                        Value::Real(raw.parse().map_err(|_| unknown())?)
                    }
                };
                let negate = head == "neq";
                Ok(Self::custom(id, move |_, p| {
                    (p.0.get(index) == Some(&target)) != negate
                }))
            }
            "weighted_sum" => {
                let mut parts = rest.splitn(3, ':');
                let lo: f64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(unknown)?;
                let hi: f64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(unknown)?;
                let mut weights: Vec<(String, f64)> = Vec::new();
                for item in parts.next().unwrap_or("").split(',').filter(|s| !s.is_empty()) {
                    let (label, w) = item.split_once('=').ok_or_else(unknown)?;
                    weights.push((label.to_string(), w.parse().map_err(|_| unknown())?));
                }
                // Per-variable lookup table: category index -> weight.
                let table: Vec<Option<Vec<f64>>> = variables
                    .iter()
                    .map(|v| match &v.kind {
                        VariableKind::Categorical { categories } => Some(
                            categories
                                .iter()
                                .map(|c| {
                                    weights
                                        .iter()
                                        .find(|(l, _)| l == c)
                                        .map_or(0.0, |(_, w)| *w)
                                })
                                .collect(),
                        ),
                        _ => None,
                    })
                    .collect();
                Ok(Self::custom(id, move |_, p| {
                    let total: f64 = p
                        .0
                        .iter()
                        .zip(&table)
                        .filter_map(|(v, t)| match (v, t) {
                            (Value::Cat(c), Some(t)) => t.get(*c).copied(),
                            _ => None,
                        })
                        .sum();
                    (lo..=hi).contains(&total)
                }))
            }
            "max_run" => {
                let limit: usize = rest.parse().map_err(|_| unknown())?;
                Ok(Self::custom(id, move |space, p| {
                    let mut run = 0usize;
                    let mut prev: Option<&str> = None;
                    for (spec, v) in space.variables().iter().zip(&p.0) {
                        let label = match (&spec.kind, v) {
                            (VariableKind::Categorical { categories }, Value::Cat(c)) => {
                                categories.get(*c).map(String::as_str)
                            }
                            _ => None,
                        };
                        match label {
                            Some(l) if Some(l) == prev => run += 1,
                            Some(_) => run = 1,
                            None => run = 0,
                        }
                        if run > limit {
                            return false;
                        }
                        prev = label;
                    }
                    true
                }))
            }
            _ => Err(unknown()),
        }
    }
}

/// Ordered list of variables plus optional constraint predicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    variables: Vec<VariableSpec>,
    constraints: Vec<Constraint>,
    num_idx: Vec<usize>,
    cat_idx: Vec<usize>,
}

impl SearchSpace {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidSpace("no variables".into()));
        }
        let mut names = HashSet::new();
        for v in &variables {
            v.validate()?;
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidSpace(format!(
                    "duplicate variable name `{}`",
                    v.name
                )));
            }
        }
        let (cat_idx, num_idx): (Vec<usize>, Vec<usize>) =
            (0..variables.len()).partition(|&i| variables[i].is_categorical());
        Ok(Self {
            variables,
            constraints: Vec::new(),
            num_idx,
            cat_idx,
        })
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraints.push(c);
        self
    }

    /// Adds a built-in constraint by id.
    pub fn with_constraint_id(self, id: &str) -> Result<Self> {
        let c = Constraint::parse(id, &self.variables)?;
        Ok(self.with_constraint(c))
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Indices of continuous and integer variables, in declaration order.
    pub fn numeric_indices(&self) -> &[usize] {
        &self.num_idx
    }

    /// Indices of categorical variables, in declaration order.
    pub fn categorical_indices(&self) -> &[usize] {
        &self.cat_idx
    }

    pub fn n_numeric(&self) -> usize {
        self.num_idx.len()
    }

    pub fn n_categorical(&self) -> usize {
        self.cat_idx.len()
    }

    pub fn is_categorical_only(&self) -> bool {
        self.num_idx.is_empty()
    }

    pub fn is_numeric_only(&self) -> bool {
        self.cat_idx.is_empty()
    }

    pub fn is_mixed(&self) -> bool {
        !self.num_idx.is_empty() && !self.cat_idx.is_empty()
    }

    /// Category count per categorical dimension (categorical block order).
    pub fn category_counts(&self) -> Vec<usize> {
        self.cat_idx
            .iter()
            .filter_map(|&i| self.variables[i].n_categories())
            .collect()
    }

    /// Whether numeric-block coordinate `j` is integer valued.
    pub fn numeric_is_integer(&self, j: usize) -> bool {
        matches!(
            self.variables[self.num_idx[j]].kind,
            VariableKind::Integer { .. }
        )
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        for (spec, v) in self.variables.iter().zip(&p.0) {
            let ok = match (&spec.kind, v) {
                (VariableKind::Continuous { lower, upper }, Value::Real(x)) => {
                    x.is_finite() && lower <= x && x <= upper
                }
                (VariableKind::Integer { lower, upper }, Value::Int(x)) => lower <= x && x <= upper,
                (VariableKind::Categorical { categories }, Value::Cat(c)) => *c < categories.len(),
                _ => false,
            };
            if !ok {
                return Err(Error::InvalidPoint(format!(
                    "value {v:?} is invalid for variable `{}`",
                    spec.name
                )));
            }
        }
        Ok(())
    }

    /// Maps a point into the unit representation.
    pub fn transform(&self, p: &Point) -> Result<UnitPoint> {
        self.validate_point(p)?;
        let num = self
            .num_idx
            .iter()
            .map(|&i| match (&self.variables[i].kind, p.0[i]) {
                (VariableKind::Continuous { lower, upper }, Value::Real(x)) => {
                    (x - lower) / (upper - lower)
                }
                (VariableKind::Integer { lower, upper }, Value::Int(x)) => {
                    if upper == lower {
                        0.0
                    } else {
                        (x - lower) as f64 / (upper - lower) as f64
                    }
                }
                _ => unreachable!("validated above"),
            })
            .collect();
        let cat = self
            .cat_idx
            .iter()
            .map(|&i| match p.0[i] {
                Value::Cat(c) => c,
                _ => unreachable!("validated above"),
            })
            .collect();
        Ok(UnitPoint { num, cat })
    }

    /// Inverse of [`transform`](Self::transform). Integer coordinates round
    /// to the nearest integer, ties upward.
    pub fn inverse_transform(&self, u: &UnitPoint) -> Result<Point> {
        self.check_unit_shape(u)?;
        if let Some(x) = u.num.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidPoint(format!(
                "unit coordinate {x} outside [0, 1]"
            )));
        }
        for (c, n) in u.cat.iter().zip(self.category_counts()) {
            if *c >= n {
                return Err(Error::InvalidPoint(format!(
                    "category index {c} out of range (n = {n})"
                )));
            }
        }
        Ok(self.decode_unchecked(u))
    }

    fn check_unit_shape(&self, u: &UnitPoint) -> Result<()> {
        if u.num.len() != self.n_numeric() {
            return Err(Error::DimensionMismatch {
                expected: self.n_numeric(),
                got: u.num.len(),
            });
        }
        if u.cat.len() != self.n_categorical() {
            return Err(Error::DimensionMismatch {
                expected: self.n_categorical(),
                got: u.cat.len(),
            });
        }
        Ok(())
    }

    /// Decodes a unit point whose coordinates are already known to be in
    /// range. Numeric coordinates are clamped to `[0, 1]`.
    pub fn decode_unchecked(&self, u: &UnitPoint) -> Point {
        let mut values = vec![Value::Cat(0); self.dim()];
        for (j, &i) in self.num_idx.iter().enumerate() {
            let t = u.num[j].clamp(0.0, 1.0);
            values[i] = match &self.variables[i].kind {
                VariableKind::Continuous { lower, upper } => {
                    // Exact endpoints survive the round trip.
                    let v = if t == 1.0 {
                        *upper
                    } else {
                        lower + t * (upper - lower)
                    };
                    Value::Real(v.clamp(*lower, *upper))
                }
                VariableKind::Integer { lower, upper } => {
                    let v = *lower as f64 + t * (upper - lower) as f64;
                    Value::Int(((v + 0.5).floor() as i64).clamp(*lower, *upper))
                }
                VariableKind::Categorical { .. } => unreachable!(),
            };
        }
        for (j, &i) in self.cat_idx.iter().enumerate() {
            values[i] = Value::Cat(u.cat[j]);
        }
        Point(values)
    }

    /// Rounds integer coordinates of a unit point onto their grid.
    pub fn snap(&self, u: &mut UnitPoint) {
        for (j, &i) in self.num_idx.iter().enumerate() {
            u.num[j] = u.num[j].clamp(0.0, 1.0);
            if let VariableKind::Integer { lower, upper } = self.variables[i].kind {
                if upper == lower {
                    u.num[j] = 0.0;
                } else {
                    let span = (upper - lower) as f64;
                    let v = ((u.num[j] * span) + 0.5).floor();
                    u.num[j] = v / span;
                }
            }
        }
    }

    pub fn check_constraints(&self, p: &Point) -> bool {
        self.constraints.iter().all(|c| c.check(self, p))
    }

    /// Constraint check on a unit point.
    pub fn check_unit_constraints(&self, u: &UnitPoint) -> bool {
        self.constraints.is_empty() || self.check_constraints(&self.decode_unchecked(u))
    }

    fn sample_unconstrained<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point(
            self.variables
                .iter()
                .map(|v| match &v.kind {
                    VariableKind::Continuous { lower, upper } => {
                        Value::Real(lower + rng.random::<f64>() * (upper - lower))
                    }
                    VariableKind::Integer { lower, upper } => {
                        Value::Int(rng.random_range(*lower..=*upper))
                    }
                    VariableKind::Categorical { categories } => {
                        Value::Cat(rng.random_range(0..categories.len()))
                    }
                })
                .collect(),
        )
    }

    /// Draws one constraint-satisfying point by rejection sampling.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point> {
        for _ in 0..MAX_REJECTION_ATTEMPTS {
            let p = self.sample_unconstrained(rng);
            if self.check_constraints(&p) {
                return Ok(p);
            }
        }
        Err(Error::SamplingExhausted {
            attempts: MAX_REJECTION_ATTEMPTS,
        })
    }

    pub fn sample_uniform_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Point>> {
        if n == 0 {
            return Err(Error::InvalidParameter("sample count must be >= 1".into()));
        }
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    /// `n` independent uniform points, deterministic for a fixed seed. The
    /// stream is prefix-stable: the first `k` points of `n > k` samples equal
    /// the `k`-point sample at the same seed.
    pub fn sample_uniform(&self, n: usize, seed: u64) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_uniform_with(n, &mut rng)
    }

    /// Human-readable label of one coordinate (category label for
    /// categorical variables).
    pub fn format_value(&self, index: usize, v: &Value) -> Json {
        match (&self.variables[index].kind, v) {
            (VariableKind::Categorical { categories }, Value::Cat(c)) => {
                Json::String(categories[*c].clone())
            }
            (_, Value::Int(x)) => Json::from(*x),
            (_, Value::Real(x)) => Json::from(*x),
            (_, Value::Cat(c)) => Json::from(*c),
        }
    }

    /// JSON array of the point's values, labels for categorical variables.
    pub fn point_to_json(&self, p: &Point) -> Json {
        Json::Array(
            p.0.iter()
                .enumerate()
                .map(|(i, v)| self.format_value(i, v))
                .collect(),
        )
    }

    /// Parses a JSON array produced by [`point_to_json`](Self::point_to_json).
    pub fn point_from_json(&self, json: &Json) -> Result<Point> {
        let items = json
            .as_array()
            .ok_or_else(|| Error::InvalidPoint("expected a JSON array".into()))?;
        if items.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: items.len(),
            });
        }
        let values = self
            .variables
            .iter()
            .zip(items)
            .map(|(spec, item)| match &spec.kind {
                VariableKind::Continuous { .. } => item.as_f64().map(Value::Real),
                VariableKind::Integer { .. } => item.as_i64().map(Value::Int),
                VariableKind::Categorical { categories } => item
                    .as_str()
                    .and_then(|s| categories.iter().position(|c| c == s))
                    .map(Value::Cat),
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidPoint(format!("cannot parse {json}")))?;
        let p = Point(values);
        self.validate_point(&p)?;
        Ok(p)
    }

    pub fn to_json(&self) -> Json {
        let vars: Vec<Json> = self
            .variables
            .iter()
            .map(|v| serde_json::to_value(SpecDoc::from(v)).expect("spec serializes"))
            .collect();
        if self.constraints.is_empty() {
            Json::Array(vars)
        } else {
            serde_json::json!({
                "variables": vars,
                "constraints": self.constraints.iter().map(|c| c.id.clone()).collect::<Vec<_>>(),
            })
        }
    }

    /// Reads either a bare list of variable documents or an object with
    /// `variables` and built-in `constraints` ids.
    pub fn from_json(json: &Json) -> Result<Self> {
        let (vars, constraints) = match json {
            Json::Array(_) => (json.clone(), Vec::new()),
            Json::Object(map) => {
                let vars = map
                    .get("variables")
                    .cloned()
                    .ok_or_else(|| Error::InvalidSpace("missing `variables`".into()))?;
                let constraints: Vec<String> = match map.get("constraints") {
                    Some(c) => serde_json::from_value(c.clone())
                        .map_err(|e| Error::InvalidSpace(e.to_string()))?,
                    None => Vec::new(),
                };
                (vars, constraints)
            }
            _ => return Err(Error::InvalidSpace("expected an array or object".into())),
        };
        let docs: Vec<SpecDoc> =
            serde_json::from_value(vars).map_err(|e| Error::InvalidSpace(e.to_string()))?;
        let specs = docs
            .into_iter()
            .map(VariableSpec::try_from)
            .collect::<Result<Vec<_>>>()?;
        let mut space = SearchSpace::new(specs)?;
        for id in constraints {
            space = space.with_constraint_id(&id)?;
        }
        Ok(space)
    }
}

pub fn build_search_space(specs: Vec<VariableSpec>) -> Result<SearchSpace> {
    SearchSpace::new(specs)
}

#[derive(Debug, Serialize, Deserialize)]
struct SpecDoc {
    name: String,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bounds: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    categories: Option<Vec<String>>,
}

impl From<&VariableSpec> for SpecDoc {
    fn from(v: &VariableSpec) -> Self {
        let (kind, bounds, categories) = match &v.kind {
            VariableKind::Continuous { lower, upper } => ("continuous", Some([*lower, *upper]), None),
            VariableKind::Integer { lower, upper } => {
                ("integer", Some([*lower as f64, *upper as f64]), None)
            }
            VariableKind::Categorical { categories } => ("categorical", None, Some(categories.clone())),
        };
        Self {
            name: v.name.clone(),
            kind: kind.into(),
            bounds,
            categories,
        }
    }
}

impl TryFrom<SpecDoc> for VariableSpec {
    type Error = Error;

    fn try_from(doc: SpecDoc) -> Result<Self> {
        let missing = |what: &str| Error::InvalidSpace(format!("variable `{}` lacks {what}", doc.name));
        let kind = match doc.kind.as_str() {
            "continuous" | "num" | "numeric" => {
                let [lower, upper] = doc.bounds.ok_or_else(|| missing("bounds"))?;
                VariableKind::Continuous { lower, upper }
            }
            "integer" | "int" => {
                let [lower, upper] = doc.bounds.ok_or_else(|| missing("bounds"))?;
                if lower.fract() != 0.0 || upper.fract() != 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "integer variable `{}` has fractional bounds",
                        doc.name
                    )));
                }
                VariableKind::Integer {
                    lower: lower as i64,
                    upper: upper as i64,
                }
            }
            "categorical" | "nominal" => VariableKind::Categorical {
                categories: doc.categories.clone().ok_or_else(|| missing("categories"))?,
            },
            other => {
                return Err(Error::InvalidSpace(format!(
                    "variable `{}` has unknown type `{other}`",
                    doc.name
                )))
            }
        };
        Ok(VariableSpec {
            name: doc.name,
            kind,
        })
    }
}
