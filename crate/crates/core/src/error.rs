use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidSpec(String),

    #[error("elliptic coordinates are undefined for repeated axes")]
    SymmetricChart,

    #[error("point lies on the coordinate hyperplane x_{index} = 0")]
    DegenerateChart { index: usize },

    #[error("elliptic coordinates violate interlacing at position {index}")]
    InvalidCoords { index: usize },

    #[error("parameter {value} is at a pole (axis {axis})")]
    Pole { value: f64, axis: f64 },

    #[error("vector must be nonzero")]
    ZeroVector,

    #[error("state violates constraint {name} by {residual:e} (tolerance {tol:e})")]
    ConstraintViolation { name: &'static str, residual: f64, tol: f64 },

    #[error("coordinate x_{index} = {value:e} is singular for a nonzero Rosochatius constant")]
    SingularAxis { index: usize, value: f64 },

    #[error("Lagrange multiplier denominator vanishes ({value:e})")]
    MultiplierSingular { value: f64 },

    #[error("constraint projection did not converge (residual {residual:e})")]
    ProjectionFailed { residual: f64 },

    #[error("torus reduction is singular at component {index}")]
    ReductionSingular { index: usize },

    #[error("state is off the invariant variety <A^-1 x, eta> = <A^-1 y, xi> = 0 (residual {residual:e})")]
    InvariantVariety { residual: f64 },

    #[error("f_i integrals require distinct axes; use the grouped integrals instead")]
    SymmetricSpec,

    #[error("billiard step is grazing or singular: {0}")]
    GrazingOrSingular(String),

    #[error("momentum formula is inconsistent: imaginary residual {residual:e} at component {index}")]
    FormulaConsistency { index: usize, residual: f64 },

    #[error("trajectory did not reach the boundary within t = {t_max}")]
    Escape { t_max: f64 },

    #[error("bounce {index}: {source}")]
    Bounce { index: usize, source: Box<Error> },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("operation not supported for this system: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by a numerical singularity (as opposed to bad input).
    pub fn is_singularity(&self) -> bool {
        if let Error::Bounce { source, .. } = self {
            return source.is_singularity();
        }
        matches!(
            self,
            Error::Pole { .. }
                | Error::SingularAxis { .. }
                | Error::MultiplierSingular { .. }
                | Error::ProjectionFailed { .. }
                | Error::ReductionSingular { .. }
                | Error::GrazingOrSingular(_)
                | Error::FormulaConsistency { .. }
                | Error::Escape { .. }
                | Error::LinearAlgebra(_)
        )
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
