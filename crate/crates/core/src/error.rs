use thiserror::Error;

/// Errors raised anywhere in the inference pipeline.
///
/// Locations are carried as `f64` so the error type stays independent of the
/// scalar type the computation ran in.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum HoaError {
    #[error("non-finite value in {what} at {at:?}")]
    NonFinite { what: &'static str, at: Vec<f64> },

    #[error("differentiation failed: non-finite function value at probe {probe:?}")]
    Differentiation { probe: Vec<f64> },

    #[error("matrix is singular or rank deficient in {context}: rank {rank} < {cols} columns")]
    Singular {
        context: &'static str,
        rank: usize,
        cols: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("optimizer did not converge after {iterations} iterations; last iterate {last:?}")]
    NotConverged { iterations: usize, last: Vec<f64> },

    #[error("observed information is not positive definite at {at:?} (boundary or saddle point)")]
    NotPositiveDefinite { at: Vec<f64> },

    #[error("point {at:?} is outside the admissible parameter region")]
    Inadmissible { at: Vec<f64> },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("optimizer inconsistency: loglik at {theta} exceeds the maximum by {excess:e}")]
    OptimizerInconsistency { theta: f64, excess: f64 },

    #[error("nuisance information block is singular at psi = {psi}")]
    NuisanceInformation { psi: f64 },

    #[error("density is zero at observation {obs}: pivot derivative in y vanishes")]
    DensityZero { obs: usize },

    #[error("canonical parameter Jacobian is singular at {at:?}; theta is not identifiable there")]
    Identifiability { at: Vec<f64> },

    #[error("information determinant ratio is not positive ({value:e})")]
    InformationSign { value: f64 },

    #[error("internal consistency failure: area form q = {area} but determinant form q = {determinant}")]
    InternalConsistency { area: f64, determinant: f64 },

    #[error("sign mismatch between r = {r} and q = {q} outside the singular window")]
    SignMismatch { r: f64, q: f64 },

    #[error("significance curve has {usable} points outside the singular window; at least 4 are required")]
    CurveTooShort { usable: usize },

    #[error("target probability {target} is not bracketed by the grid; extend it to about [{suggested_lo}, {suggested_hi}]")]
    NotBracketed {
        target: f64,
        suggested_lo: f64,
        suggested_hi: f64,
    },

    #[error("quadrature did not reach the requested accuracy; achieved error bound {achieved:e}")]
    AccuracyNotMet { achieved: f64 },

    #[error("unknown model id '{0}'")]
    UnknownModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("at grid point psi = {psi}: {source}")]
    AtGridPoint {
        psi: f64,
        #[source]
        source: Box<HoaError>,
    },
}

impl HoaError {
    pub fn at_grid_point(self, psi: f64) -> Self {
        match self {
            e @ HoaError::AtGridPoint { .. } => e,
            e => HoaError::AtGridPoint {
                psi,
                source: Box::new(e),
            },
        }
    }

    /// True for failures of the numerical machinery as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            HoaError::UnknownModel(_) | HoaError::InvalidInput(_) | HoaError::Unsupported(_) => {
                false
            }
            HoaError::AtGridPoint { source, .. } => source.is_numerical(),
            _ => true,
        }
    }
}

pub type Result<T, E = HoaError> = std::result::Result<T, E>;
