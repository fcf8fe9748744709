pub mod acq_opt;
pub mod acquisitions;
pub mod engine;
pub mod error;
pub mod space;
pub mod surrogates;
pub mod tasks;
pub mod trust_region;

pub use error::{Error, Result};
