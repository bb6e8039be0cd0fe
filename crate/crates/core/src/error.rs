use thiserror::Error;

use crate::expr::ParseError;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point {point:?} is excluded by the chart's domain guard")]
    SingularPoint { point: Vec<f64> },

    #[error("degenerate triad at {point:?}: |det e| = {det:e} is below the floor {floor:e}")]
    DegenerateTriad { point: Vec<f64>, det: f64, floor: f64 },

    #[error("metric is not invertible at {point:?}")]
    NonInvertibleMetric { point: Vec<f64> },

    #[error("expression {index}: {source}")]
    Parse {
        index: usize,
        #[source]
        source: ParseError,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample grids do not match: {0}")]
    GridMismatch(String),

    #[error("insufficient sampling: {0}")]
    InsufficientSampling(String),

    #[error("quadrature did not converge on edge {edge}: panel estimates differ by {difference:e}")]
    QuadratureDivergence { edge: usize, difference: f64 },

    #[error("grid too coarse: nearest-neighbour hop is {ratio:.3} kernel widths (limit {limit})")]
    GridTooCoarse { ratio: f64, limit: f64 },

    #[error("non-positive kernel entry {value:e} between grid points {row} and {col}")]
    NonPositiveKernel { row: usize, col: usize, value: f64 },

    #[error("eigen-solver failure: {0}")]
    EigenFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl GeomError {
    /// True for errors caused by bad input rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            GeomError::Parse { .. }
                | GeomError::DimensionMismatch(_)
                | GeomError::InvalidParameter(_)
                | GeomError::GridMismatch(_)
                | GeomError::Io(_)
                | GeomError::Json(_)
        )
    }
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
