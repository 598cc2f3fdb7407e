//! Transfer evidence for the equivalence results and obstruction certificates for the counterexamples.

mod blowup;
mod certificate;
mod holder;
mod transfer;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::maps::MapError;
use crate::schwartz::SchwartzError;

pub use blowup::{check_derivative_blowup, BlowupReport};
pub use certificate::{
    interval_obstruction, nazarov_obstruction, replay_certificate, Bijection, GrowthClass, IntervalEntry,
    NazarovEntry, ObstructionCertificate, Scenario,
};
pub use holder::{check_holder_distortion, mori_exponent, Direction, HolderFit, MoriPlan, MoriReport};
pub use transfer::{
    function_id, map_id, positive_transfer, suites, FunctionEvidence, TransferEvidence, TransferOrders, TransferSuite, TransferVerdict,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Schwartz(#[from] SchwartzError),
}
