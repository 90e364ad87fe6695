use thiserror::Error;

/// Every failure a core operation can report.
///
/// The CLI surfaces [`Error::name`] verbatim, so variant names are part of
/// the user-facing contract.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("backward iteration requested but the map has no inverse")]
    MissingInverse,
    #[error("non-finite coordinate after {step} iterations")]
    NumericalBlowup { step: usize },
    #[error("translation-number estimate did not converge (spread {spread:e})")]
    NotConverged { spread: f64 },
    #[error("density integrates to {mass} instead of 1")]
    NotAProbabilityDensity { mass: f64 },
    #[error("no seed produced a converged translation number ({attempted} attempted)")]
    NoConvergedSeeds { attempted: usize },
    #[error("table is not strictly convex: curvature {curvature:e} at s = {s}")]
    NotStrictlyConvex { s: f64, curvature: f64 },
    #[error("next-bounce solver could not bracket the chord endpoint from s = {s}, y = {y}")]
    ChordFailure { s: f64, y: f64 },
    #[error("Newton iteration stalled at residual {residual:e}")]
    NewtonFailed { residual: f64 },
    #[error("the map provides no Jacobian")]
    JacobianUnavailable,
    #[error("coordinate ascent stalled (gradient {gradient:e} after {restarts} restarts)")]
    AscentStalled { gradient: f64, restarts: usize },
    #[error("configuration lost its cyclic order in every restart")]
    OrderViolation,
    #[error("orbit is not hyperbolic (trace {trace})")]
    NotHyperbolic { trace: f64 },
    #[error("arclength budget {budget} is below 10 primary segments ({minimum})")]
    BudgetTooSmall { budget: f64, minimum: f64 },
    #[error("rasters have different grids or windows")]
    GridMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Variant name, e.g. `"ChordFailure"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MissingInverse => "MissingInverse",
            Error::NumericalBlowup { .. } => "NumericalBlowup",
            Error::NotConverged { .. } => "NotConverged",
            Error::NotAProbabilityDensity { .. } => "NotAProbabilityDensity",
            Error::NoConvergedSeeds { .. } => "NoConvergedSeeds",
            Error::NotStrictlyConvex { .. } => "NotStrictlyConvex",
            Error::ChordFailure { .. } => "ChordFailure",
            Error::NewtonFailed { .. } => "NewtonFailed",
            Error::JacobianUnavailable => "JacobianUnavailable",
            Error::AscentStalled { .. } => "AscentStalled",
            Error::OrderViolation => "OrderViolation",
            Error::NotHyperbolic { .. } => "NotHyperbolic",
            Error::BudgetTooSmall { .. } => "BudgetTooSmall",
            Error::GridMismatch => "GridMismatch",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

impl Error {
    /// Module that raises the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::MissingInverse | Error::NumericalBlowup { .. } => "cover",
            Error::NotConverged { .. } | Error::NotAProbabilityDensity { .. } | Error::NoConvergedSeeds { .. } => {
                "rotation"
            }
            Error::NotStrictlyConvex { .. } | Error::ChordFailure { .. } => "systems",
            Error::NewtonFailed { .. }
            | Error::JacobianUnavailable
            | Error::AscentStalled { .. }
            | Error::OrderViolation => "orbits",
            Error::NotHyperbolic { .. } | Error::BudgetTooSmall { .. } | Error::GridMismatch => "manifolds",
            Error::InvalidInput(_) => "input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
