//! Synthetic black-box tasks and the string-addressed task registry.

mod pest;
mod sfu;

pub use pest::{pest_constants, PestControl, PestControlConstants};
pub use sfu::{
    make_ackley20, make_ackley53, make_sfu_task, sfu_function_ids, CategoryValueMap, SfuConfig,
    SfuFunction, SfuTask,
};

use crate::error::{Error, Result};
use crate::space::{Point, SearchSpace};

/// A black-box objective to be minimized.
pub trait Task: Send + Sync {
    fn id(&self) -> &str;

    fn search_space(&self) -> &SearchSpace;

    fn evaluate(&self, x: &Point) -> f64;

    fn known_optimum(&self) -> Option<f64> {
        None
    }

    /// A point attaining [`known_optimum`](Self::known_optimum), when one is
    /// representable in the task's space.
    fn optimum_point(&self) -> Option<Point> {
        None
    }
}

pub fn make_pest_control() -> PestControl {
    PestControl::new()
}

/// Ids accepted by [`task_from_id`], with the parameterized SFU form shown
/// as a template.
pub fn task_ids() -> Vec<String> {
    let mut ids = vec!["ackley20".to_string(), "ackley53".into(), "pest".into()];
    ids.extend(
        sfu_function_ids()
            .iter()
            .map(|f| format!("sfu:{f}:d=<n>:cat=<k>[:num=<n>][:int=<n>]")),
    );
    ids
}

/// Resolves a registry id: `ackley20`, `ackley53`, `pest`, or
/// `sfu:<function>[:key=value]*` with keys `d` (nominal dims), `cat`
/// (categories per nominal dim), `num` (continuous dims) and `int` (integer
/// dims).
pub fn task_from_id(id: &str) -> Result<Box<dyn Task>> {
    match id {
        "ackley20" => return Ok(Box::new(make_ackley20())),
        "ackley53" => return Ok(Box::new(make_ackley53())),
        "pest" | "pest_control" => return Ok(Box::new(make_pest_control())),
        _ => {}
    }
    let rest = id
        .strip_prefix("sfu:")
        .ok_or_else(|| Error::UnknownTask(id.to_string()))?;
    let mut parts = rest.split(':');
    let function = parts.next().unwrap_or_default();
    let mut config = SfuConfig::default();
    let mut any_dims = false;
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::UnknownTask(id.to_string()))?;
        let value: usize = value
            .parse()
            .map_err(|_| Error::InvalidTask(format!("bad value in `{part}`")))?;
        match key {
            "d" | "nom" => {
                config.n_nominal = value;
                any_dims = true;
            }
            "cat" => config.n_categories = value,
            "num" => {
                config.n_continuous = value;
                any_dims = true;
            }
            "int" => {
                config.n_integer = value;
                any_dims = true;
            }
            _ => return Err(Error::InvalidTask(format!("unknown key `{key}` in `{id}`"))),
        }
    }
    if !any_dims {
        config.n_nominal = 10;
    }
    let mut task = make_sfu_task(function, &config)?;
    task.set_id(id);
    Ok(Box::new(task))
}
