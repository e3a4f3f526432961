//! Charts, sampled tensor fields, octonions and the Cayley structure on S⁶,
//! Nijenhuis operators, Levi-Civita connections and metric projection.
//!
//! Derivatives are second-order central differences. Where an operation
//! accepts a tolerance, the discretization error is estimated by repeating
//! the evaluation at twice the step (Richardson) and compared against it.

pub mod chart;
pub mod connection;
pub mod field;
pub mod forms;
pub mod nijenhuis;
pub mod octonion;

pub use chart::{ChartAtlas, ChartKind, ChartSpec, Pole, StereoChart};
pub use connection::{
    levi_civita, metric_compatibility_residual, Christoffel, ConnectionField, ConnectionSource, FlatConnection,
    GaugedConnection, LeviCivita, MatrixConnection,
};
pub use field::{
    cayley_field, constant_field, partial, partial4, partial_fn, AlmostComplexField, AnalyticField, FieldSource,
    Lattice, MatrixField, Mesh, MetricField, SampledField,
};
pub use forms::{fundamental_two_form, orthogonality_residual, pfaffian, project_metric, TwoFormReport};
pub use nijenhuis::{
    covariant_derivative, nijenhuis_at, nijenhuis_bracket, nijenhuis_from_derivatives, nijenhuis_coordinate, tensor3_norm_sq, BracketValue,
    NijenhuisField,
};
pub use octonion::{cayley_structure, octonion_multiply, CayleyMap, OctonionAlgebra, OctonionError};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("grid too coarse: Richardson estimate {estimate:.3e} exceeds tolerance {tol:.3e}")]
    GridTooCoarse { estimate: f64, tol: f64 },
    #[error("singular metric (det = {det:.3e}) at {at:?}")]
    SingularMetric { det: f64, at: Vec<f64> },
    #[error("projected metric is not positive definite at {at:?}")]
    DegenerateResult { at: Vec<f64> },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("difference step {step} is not a multiple of the lattice step {lattice}")]
    StepMismatch { step: f64, lattice: f64 },
    #[error(transparent)]
    Octonion(#[from] OctonionError),
}
