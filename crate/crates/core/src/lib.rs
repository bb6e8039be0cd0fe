//! Metric-affine geometry engine and path-integral laboratory.

pub mod chart;
pub mod connection;
pub mod curvature;
pub mod defects;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod library;
pub mod linalg;
pub mod pathintegral;
pub mod scalar;
pub mod tolerance;

pub use chart::{Chart, ChartFile, ChartKind, VectorField};
pub use error::{GeomError, Result};
pub use geometry::{Depth, GeometryPoint};
pub use linalg::{Mat, Tensor3, Tensor4};
pub use scalar::{Real, Scalar};
pub use tolerance::Tolerances;

pub type Mat64 = Mat<f64>;
pub type Tensor3f64 = Tensor3<f64>;
pub type Tensor4f64 = Tensor4<f64>;
pub type GeometryPoint64 = GeometryPoint<f64>;
pub type GeometryPoint32 = GeometryPoint<f32>;
