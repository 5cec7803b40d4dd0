use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants carry the measured defect so callers can tell a round-off
/// violation from a genuinely wrong input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |m_ij - conj(m_ji)| = {defect:e}")]
    NonHermitian { defect: f64 },

    #[error("trace is not one: |Tr - 1| = {defect:e}")]
    TraceNotOne { defect: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid Bell-diagonal weights: {0}")]
    InvalidWeights(String),

    #[error("XY-family parameters outside the positivity region: R = {r:e}")]
    PositivityViolation { r: f64 },

    #[error("state is not of Bell-diagonal form: off-pattern defect {defect:e}")]
    NotBellDiagonal { defect: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("gradient undefined at the concurrence kink (c = {concurrence:e})")]
    KinkRegion { concurrence: f64 },

    #[error("trace drift {drift:e} in a single step exceeds 1e-6 (dt = {dt})")]
    StepSizeTooLarge { drift: f64, dt: f64 },

    #[error("Kraus operators are not complete: defect {defect:e}")]
    IncompleteChannel { defect: f64 },

    #[error("invalid environment weights: {0}")]
    WeightError(String),

    #[error("effective Hamiltonian is not Hermitian: defect {defect:e}")]
    NonHermitianEffective { defect: f64 },

    #[error("index {index} out of range for central difference on {len} samples")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("closed-form rate undefined in the separable region (entanglement parameter {value:e})")]
    SeparableRegion { value: f64 },

    #[error("criterion undefined: q_im * (2p - 1) = 0")]
    DegenerateDirection,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("infeasible parameter range: {0}")]
    InfeasibleRange(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
}

impl Error {
    /// True for errors caused by parameters that describe no valid state
    /// or sweep, as opposed to malformed input or numerical breakdown.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InvalidWeights(_)
                | Error::PositivityViolation { .. }
                | Error::NotPositive { .. }
                | Error::InfeasibleRange(_)
                | Error::SeparableRegion { .. }
                | Error::KinkRegion { .. }
                | Error::NotBellDiagonal { .. }
        )
    }

    /// True for failures of the numerics themselves.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure | Error::StepSizeTooLarge { .. } | Error::IncompleteChannel { .. }
        )
    }
}
