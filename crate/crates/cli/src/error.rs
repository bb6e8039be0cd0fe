use nonholonomic::GeomError;
use serde::Serialize;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Geometry(e) if e.is_validation() => EXIT_VALIDATION,
            CliError::Geometry(_) => EXIT_NUMERIC,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
            CliError::Geometry(e) => match e {
                GeomError::SingularPoint { .. } => "singular_point",
                GeomError::DegenerateTriad { .. } => "degenerate_triad",
                GeomError::NonInvertibleMetric { .. } => "non_invertible_metric",
                GeomError::Parse { .. } => "parse",
                GeomError::DimensionMismatch(_) => "dimension_mismatch",
                GeomError::InvalidParameter(_) => "invalid_parameter",
                GeomError::GridMismatch(_) => "grid_mismatch",
                GeomError::InsufficientSampling(_) => "insufficient_sampling",
                GeomError::QuadratureDivergence { .. } => "quadrature_divergence",
                GeomError::GridTooCoarse { .. } => "grid_too_coarse",
                GeomError::NonPositiveKernel { .. } => "non_positive_kernel",
                GeomError::EigenFailure(_) => "eigen_failure",
                GeomError::Io(_) => "io",
                GeomError::Json(_) => "json",
            },
        }
    }

    /// Machine-readable one-line description.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorReport {
            error: ErrorBody {
                kind: self.kind(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        })
        .expect("error reports serialize")
    }
}
