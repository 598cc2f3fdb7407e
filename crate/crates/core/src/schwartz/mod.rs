//! Schwartz test functions on open sets, their seminorms and boundary decay.

mod flatness;
mod function;
mod sweep;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::maps::MapError;

pub use flatness::{flatness_check, FlatnessPoint, FlatnessReport, FLATNESS_TOLERANCE};
pub use function::{
    make_bump, make_interval_witness_f, make_nazarov_f, make_radial_g, map_domain, pullback, pullback_line,
    BumpWeight, FunctionSpec, Partials, TestFunction, UnionLayout, FUNCTION_FD_STEP, MAX_FUNCTION_ORDER,
};
pub use sweep::{decay_ratio, decay_ratios, seminorm, seminorms, DecayReport, SamplePlan, SeminormReport, TrendLevel, TrendVerdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchwartzError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Map(#[from] MapError),
}

pub(crate) use sweep::{level_points, sweep};
