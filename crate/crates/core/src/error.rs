use crate::model::{OperatorId, SubBandId, Violation};
use crate::quadrature::QuadratureError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric precondition of an operation does not hold.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scenario has {} violation(s); first: {}", .0.len(), .0[0])]
    InvalidConfig(Vec<Violation>),

    #[error("could not parse scenario file: {0}")]
    Parse(String),

    #[error("unknown sub-band {0}")]
    UnknownBand(SubBandId),

    #[error("{operator} does not transmit on sub-band {band}")]
    NotInSharingGroup { operator: OperatorId, band: SubBandId },

    /// `E[P^(2/α)]` diverges when the seller has no users to protect.
    #[error("unbounded moment: seller user intensity is zero")]
    UnboundedMoment,

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    /// The analytic integral produced a value outside `[0, 1]` by more than its
    /// own error estimate can explain.
    #[error("coverage {value} outside [0, 1] (quadrature error {error:e})")]
    CoverageOutOfRange { value: f64, error: f64 },

    #[error("{operator} had no serving base station after {attempts} resamples")]
    NoServer { operator: OperatorId, attempts: u64 },
}
