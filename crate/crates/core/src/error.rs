//! Error types shared across the library.

use thiserror::Error;

/// Errors produced by spectral computations.
#[derive(Debug, Clone, Error)]
pub enum SpectralError {
    /// A potential coefficient was NaN or infinite.
    #[error("non-finite cosine coefficient at index {index}: {value}")]
    NonFiniteCoefficient { index: usize, value: f64 },

    /// Evaluation point outside the unit edge.
    #[error("evaluation point x = {x} outside [0, 1]")]
    OutOfDomain { x: f64 },

    /// The adaptive integrator could not proceed without violating the
    /// requested tolerance.
    #[error("integrator step size underflow at x = {x} (lambda = {lambda})")]
    StepSizeUnderflow { lambda: f64, x: f64 },

    /// The requested energy belongs to the Dirichlet-type spectrum, where
    /// the boundary-value basis does not exist.
    #[error("lambda = {lambda} lies in the Dirichlet spectrum; boundary basis is singular")]
    SingularBasis { lambda: f64 },

    /// The requested energy is *not* a Dirichlet eigenvalue, but the
    /// operation only makes sense on the Dirichlet spectrum.
    #[error("lambda = {lambda} is not in the Dirichlet spectrum")]
    NotDirichlet { lambda: f64 },

    /// Angle perturbation outside the validity neighborhood.
    #[error("epsilon = {epsilon} outside validity range |epsilon| < pi/6")]
    EpsilonOutOfRange { epsilon: f64 },

    /// Parameter failed a precondition.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, SpectralError>;
