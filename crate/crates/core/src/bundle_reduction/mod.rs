//! Fiberwise Fourier expansion of fields on principal bundles, the
//! fiber-collapse reduction `Φ ↦ Φ̃₊∞`, and the squashed metric family on G₂.
//!
//! The Hopf fibration `S³ → CP¹` is the fully numerical example: every step
//! has a closed form to compare against. For `G₂ → S⁶` the fields are
//! left-invariant, so everything is evaluated at the identity from structure
//! constants.

mod hopf;
mod squashed;

pub use hopf::{
    fiber_fourier_modes, hopf_bundle, hopf_coefficient, hopf_constant, hopf_exponential_field, reduce, section_pullback_error,
    BaseChart, BaseGrid, BasePoint, BundleField, FiberModes, HopfConstant, LocalSection, PrincipalBundleSpec, PullbackRow,
    ReductionResult, ReductionRow,
};
pub use squashed::{
    g2_reduction_check, squashed_metric, G2ReductionReport, G2ReductionRow, SquashedMetric, COFRAME_LABELS, HORIZONTAL,
    RAW_COFRAME_LABELS, VERTICAL,
};

use crate::group_harmonics::HarmonicsError;
use crate::lie_core::LieError;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BundleError {
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("fiber quadrature underresolved: refining shifts a mode by {shift:.3e} (tolerance {tol:.1e})")]
    QuadratureUnderresolved { shift: f64, tol: f64 },
    #[error("section derivative bound diverges: {0}")]
    SectionUnbounded(f64),
    #[error("J is not block-diagonal for the su(3) + m splitting: off-block norm {0:.3e}")]
    NotBlockDiagonal(f64),
    #[error("empty lambda schedule")]
    EmptySchedule,
    #[error(transparent)]
    Harmonics(HarmonicsError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

impl From<HarmonicsError> for BundleError {
    fn from(e: HarmonicsError) -> Self {
        match e {
            HarmonicsError::QuadratureUnderresolved { shift, tol, .. } => BundleError::QuadratureUnderresolved { shift, tol },
            HarmonicsError::InvalidLambda(l) => BundleError::InvalidLambda(l),
            other => BundleError::Harmonics(other),
        }
    }
}

/// The schedule used when none is given.
pub const DEFAULT_LAMBDA_SCHEDULE: [f64; 4] = [2.0, 10.0, 100.0, 1e4];

pub(crate) fn check_lambda(lambda: f64) -> Result<(), BundleError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(BundleError::InvalidLambda(lambda))
    }
}
