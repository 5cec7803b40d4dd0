//! Two-qubit entanglement dynamics under Lindblad decoherence: states,
//! concurrence and entanglement of formation, master-equation integration,
//! Kraus channels, the entanglement rate `Gamma = dE/dt`, and bipartite
//! Bloch decompositions.

pub mod blochsun;
pub mod entanglement;
pub mod error;
pub mod figures;
pub mod kraus;
pub mod lindblad;
pub mod linalg;
pub mod qstate;
pub mod rate;

#[cfg(test)]
mod testutil;

pub use blochsun::{decompose, gell_mann_basis, rate_bloch, recompose, BlochDecomposition, GeneratorBasis};
pub use entanglement::{concurrence, eof, eof_gradient, ConcurrenceResult, MeasureGradient};
pub use error::{Error, Result};
pub use kraus::{EffectiveHamiltonian, KrausChannel};
pub use lindblad::{evolve_damped_xy, LindbladModel, ModelParams, Trajectory};
pub use linalg::CMatrix;
pub use qstate::{werner_state, xy_state, DensityMatrix, WernerParams, XYFamilyParams};
pub use rate::{criterion_threshold, rate_chain, rate_numeric, rate_werner, rate_xy, RateBreakdown};
