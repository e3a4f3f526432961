//! Left-invariant configurations on a Lie group: the identity-point
//! evaluation and the same data written in exponential coordinates.

use super::{endo_norm_sq, operator_norm, potential_tensor, EnergyError, EnergyReport, FieldConfiguration, ResidualMaps};
use crate::lie_core::{nijenhuis_at_identity, LieAlgebraSpec};
use crate::tensor_geometry::{tensor3_norm_sq, AlmostComplexField, AnalyticField, FieldSource, MetricField};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Energy of a left-invariant pair: the identity-point integrand from
/// structure constants and the Gram matrix, times the group volume.
pub fn left_invariant_energy(
    spec: &LieAlgebraSpec,
    j: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    coupling: f64,
    volume: f64,
) -> Result<EnergyReport, EnergyError> {
    if coupling == 0.0 || !coupling.is_finite() {
        return Err(EnergyError::ZeroCoupling);
    }
    let n = nijenhuis_at_identity(spec, j)?;
    let ginv = gram
        .clone()
        .try_inverse()
        .ok_or_else(|| EnergyError::Unsupported("Gram matrix is singular".into()))?;
    let n2 = tensor3_norm_sq(&n, gram, &ginv).max(0.0);
    let a = potential_tensor(j, gram, &ginv);
    let p2 = endo_norm_sq(&a, gram, &ginv);
    let e2 = coupling * coupling;
    Ok(EnergyReport {
        total: 0.5 * volume * (n2 + e2 * p2),
        term_nijenhuis: 0.5 * volume * n2,
        term_potential: 0.5 * volume * e2 * p2,
        term_curvature: None,
        residuals: ResidualMaps {
            points: vec![vec![0.0; spec.dim]],
            nijenhuis: vec![n2.sqrt()],
            potential: vec![operator_norm(&a, gram)],
        },
    })
}

/// `M(x) = Σ_k (−ad_X)^k / (k+1)!`, the left-trivialized differential of
/// `exp` at `X = Σ x_a e_a`; its columns are the coordinate vectors in the
/// left-invariant frame.
pub fn exp_chart_frame(spec: &LieAlgebraSpec, x: &[f64]) -> DMatrix<f64> {
    let n = spec.dim;
    let mut ad = DMatrix::zeros(n, n);
    for (i, xi) in x.iter().enumerate() {
        if *xi != 0.0 {
            ad += spec.ad(i) * *xi;
        }
    }
    let neg = -ad;
    let mut term = DMatrix::identity(n, n);
    let mut m = term.clone();
    for k in 1..30 {
        term = &term * &neg / (k as f64 + 1.0);
        m += &term;
        if term.amax() < 1e-18 {
            break;
        }
    }
    m
}

/// The left-invariant pair `(J, G)` in exponential coordinates around the
/// identity: `J_coord = M⁻¹JM`, `g_coord = MᵀGM`.
pub fn exp_chart_configuration(
    spec: &LieAlgebraSpec,
    j: &DMatrix<f64>,
    gram: &DMatrix<f64>,
    coupling: f64,
) -> Result<FieldConfiguration, EnergyError> {
    let n = spec.dim;
    let (s1, j1) = (Arc::new(spec.clone()), j.clone());
    let phi = AnalyticField::new(n, (n, n), move |x: &[f64]| {
        let m = exp_chart_frame(&s1, x);
        m.clone().try_inverse().expect("exp is a local diffeomorphism near the identity") * &j1 * m
    });
    let (s2, g2) = (Arc::new(spec.clone()), gram.clone());
    let metric = AnalyticField::new(n, (n, n), move |x: &[f64]| {
        let m = exp_chart_frame(&s2, x);
        m.transpose() * &g2 * m
    });
    FieldConfiguration::new(
        AlmostComplexField::new(Arc::new(phi), FieldSource::SamelsonPullback),
        MetricField::new(Arc::new(metric)),
        None,
        coupling,
    )
}
