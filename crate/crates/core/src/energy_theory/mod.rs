//! Higgs-type energy functionals for an endomorphism field Φ, their vacuum
//! residuals, the gauge action and a gradient-descent minimizer.
//!
//! Pointwise norms are induced by `g`: for endomorphisms `|A|² = tr(A*A)`
//! with `A* = g⁻¹Aᵀg`, for the Nijenhuis tensor the full contraction with
//! `g` and `g⁻¹`. The vacuum residual of `ΦΦ* − Id` is the g-operator norm,
//! so `Φ = 0` reads exactly 1.

mod left_invariant;
mod minimize;

pub use left_invariant::{exp_chart_configuration, exp_chart_frame, left_invariant_energy};
pub use minimize::{
    lattice_energy, lattice_gradient, minimize_weak, perturbed_structure, LatticeEnergy, MinimizeOptions,
    StepSchedule, Trajectory, TrajectoryRow,
};

use crate::lie_core::LieError;
use crate::tensor_geometry::{
    levi_civita, nijenhuis_coordinate, tensor3_norm_sq, AlmostComplexField, AnalyticField, ConnectionField,
    FieldSource, GaugedConnection, GeometryError, MatrixField, Mesh, MetricField,
};
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("the coupling constant must be a nonzero real number")]
    ZeroCoupling,
    #[error("gauge field is singular at {at:?}")]
    SingularGauge { at: Vec<f64> },
    #[error("line search failed {failures} consecutive times at iteration {iteration}")]
    NonDecreasingStep { iteration: usize, failures: usize },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// `(Φ, g, ∇, e)`; without a connection the Levi-Civita connection of `g` is used.
#[derive(Clone)]
pub struct FieldConfiguration {
    pub phi: AlmostComplexField,
    pub metric: MetricField,
    pub connection: Option<ConnectionField>,
    pub coupling: f64,
    /// Richardson tolerance for the Nijenhuis term; `None` skips the estimate.
    pub tolerance: Option<f64>,
}

impl FieldConfiguration {
    pub fn new(
        phi: AlmostComplexField,
        metric: MetricField,
        connection: Option<ConnectionField>,
        coupling: f64,
    ) -> Result<Self, EnergyError> {
        if coupling == 0.0 || !coupling.is_finite() {
            return Err(EnergyError::ZeroCoupling);
        }
        Ok(FieldConfiguration { phi, metric, connection, coupling, tolerance: None })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    fn connection_on(&self, mesh: &Mesh) -> Result<ConnectionField, GeometryError> {
        match &self.connection {
            Some(c) => Ok(c.clone()),
            None => levi_civita(&self.metric, mesh),
        }
    }
}

/// Pointwise residual maps of the vacuum system at the mesh nodes.
#[derive(Clone, Debug, Default)]
pub struct ResidualMaps {
    pub points: Vec<Vec<f64>>,
    /// `|N_∇Φ|_g`.
    pub nijenhuis: Vec<f64>,
    /// g-operator norm of `ΦΦ* − Id`.
    pub potential: Vec<f64>,
}

impl ResidualMaps {
    pub fn max(&self) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        (m(&self.nijenhuis), m(&self.potential))
    }
}

#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub total: f64,
    /// `½∫|N_∇Φ|²` for the weak functional, `½∫|∇Φ|²` for the other two.
    pub term_nijenhuis: f64,
    pub term_potential: f64,
    pub term_curvature: Option<f64>,
    pub residuals: ResidualMaps,
}

pub(crate) fn adjoint(a: &DMatrix<f64>, g: &DMatrix<f64>, ginv: &DMatrix<f64>) -> DMatrix<f64> {
    ginv * a.transpose() * g
}

/// `ΦΦ* − Id`.
pub fn potential_tensor(phi: &DMatrix<f64>, g: &DMatrix<f64>, ginv: &DMatrix<f64>) -> DMatrix<f64> {
    let n = phi.nrows();
    phi * adjoint(phi, g, ginv) - DMatrix::identity(n, n)
}

/// `tr(A*A)`.
pub fn endo_norm_sq(a: &DMatrix<f64>, g: &DMatrix<f64>, ginv: &DMatrix<f64>) -> f64 {
    (adjoint(a, g, ginv) * a).trace()
}

/// Largest singular value of `A` between g-normed spaces.
pub fn operator_norm(a: &DMatrix<f64>, g: &DMatrix<f64>) -> f64 {
    let l = match g.clone().cholesky() {
        Some(c) => c.l(),
        None => return f64::NAN,
    };
    let lt_inv = l.transpose().try_inverse().expect("Cholesky factor is invertible");
    let b = l.transpose() * a * lt_inv;
    b.singular_values().max()
}

struct NodeMetric {
    g: DMatrix<f64>,
    ginv: DMatrix<f64>,
    sqrt_det: f64,
}

fn node_metric(metric: &MetricField, p: &[f64]) -> Result<NodeMetric, GeometryError> {
    let g = metric.eval(p);
    let det = g.determinant();
    if det <= 1e-12 {
        return Err(GeometryError::SingularMetric { det, at: p.to_vec() });
    }
    let ginv = g.clone().try_inverse().ok_or(GeometryError::SingularMetric { det, at: p.to_vec() })?;
    Ok(NodeMetric { g, ginv, sqrt_det: det.sqrt() })
}

/// `½∫(|N_∇Φ|² + e²|ΦΦ* − Id|²) dV` by mesh quadrature.
pub fn energy_weak(cfg: &FieldConfiguration, mesh: &Mesh) -> Result<EnergyReport, EnergyError> {
    let conn = cfg.connection_on(mesh)?;
    let nf = nijenhuis_coordinate(&cfg.phi, &conn, mesh, cfg.tolerance)?;
    let e2 = cfg.coupling * cfg.coupling;
    let rows: Vec<(f64, f64, f64, f64)> = mesh
        .points
        .par_iter()
        .zip(&mesh.weights)
        .zip(&nf.values)
        .map(|((p, w), t)| {
            let m = node_metric(&cfg.metric, p)?;
            let n2 = tensor3_norm_sq(t, &m.g, &m.ginv).max(0.0);
            let a = potential_tensor(&cfg.phi.eval(p), &m.g, &m.ginv);
            let p2 = endo_norm_sq(&a, &m.g, &m.ginv);
            let dv = w * m.sqrt_det;
            Ok((0.5 * dv * n2, 0.5 * dv * e2 * p2, n2.sqrt(), operator_norm(&a, &m.g)))
        })
        .collect::<Result<_, GeometryError>>()?;
    Ok(assemble(mesh, rows, None))
}

fn assemble(mesh: &Mesh, rows: Vec<(f64, f64, f64, f64)>, curvature: Option<f64>) -> EnergyReport {
    let term_nijenhuis: f64 = rows.iter().map(|r| r.0).sum();
    let term_potential: f64 = rows.iter().map(|r| r.1).sum();
    EnergyReport {
        total: term_nijenhuis + term_potential + curvature.unwrap_or(0.0),
        term_nijenhuis,
        term_potential,
        term_curvature: curvature,
        residuals: ResidualMaps {
            points: mesh.points.clone(),
            nijenhuis: rows.iter().map(|r| r.2).collect(),
            potential: rows.iter().map(|r| r.3).collect(),
        },
    }
}

/// Pointwise sup norms of the two vacuum residuals.
pub fn vacuum_residuals(cfg: &FieldConfiguration, mesh: &Mesh) -> Result<(f64, f64), EnergyError> {
    Ok(energy_weak(cfg, mesh)?.residuals.max())
}

fn covariant_sq(cfg: &FieldConfiguration, conn: &ConnectionField, p: &[f64], h: f64, m: &NodeMetric) -> f64 {
    let n = m.g.nrows();
    let d = crate::tensor_geometry::covariant_derivative(cfg.phi.field.as_ref(), &conn.christoffel(p), p, h);
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            if m.ginv[(a, b)] != 0.0 {
                s += m.ginv[(a, b)] * (adjoint(&d[a], &m.g, &m.ginv) * &d[b]).trace();
            }
        }
    }
    s
}

/// `½ g^{aa'} g^{bb'} tr(F_ab* F_a'b')` with `F_ab = ∂_aA_b − ∂_bA_a + [A_a, A_b]`.
fn curvature_sq(conn: &ConnectionField, p: &[f64], h: f64, m: &NodeMetric) -> f64 {
    let n = m.g.nrows();
    let c0 = conn.christoffel(p);
    let a: Vec<DMatrix<f64>> = (0..n).map(|l| c0.matrix(l)).collect();
    let mut da: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(n);
    for axis in 0..n {
        let mut xp = p.to_vec();
        let mut xm = p.to_vec();
        xp[axis] += h;
        xm[axis] -= h;
        let (cp, cm) = (conn.christoffel(&xp), conn.christoffel(&xm));
        da.push((0..n).map(|l| (cp.matrix(l) - cm.matrix(l)) / (2.0 * h)).collect());
    }
    let f = |i: usize, j: usize| &da[i][j] - &da[j][i] + &a[i] * &a[j] - &a[j] * &a[i];
    let fs: Vec<Vec<DMatrix<f64>>> = (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let fij_adj = adjoint(&fs[i][j], &m.g, &m.ginv);
            for k in 0..n {
                for l in 0..n {
                    let c = m.ginv[(i, k)] * m.ginv[(j, l)];
                    if c != 0.0 {
                        s += c * (&fij_adj * &fs[k][l]).trace();
                    }
                }
            }
        }
    }
    0.5 * s
}

fn energy_minimal(cfg: &FieldConfiguration, mesh: &Mesh, conn: &ConnectionField, with_curvature: bool) -> Result<EnergyReport, EnergyError> {
    let e2 = cfg.coupling * cfg.coupling;
    let h = mesh.step;
    let rows: Vec<((f64, f64, f64, f64), f64)> = mesh
        .points
        .par_iter()
        .zip(&mesh.weights)
        .map(|(p, w)| {
            let m = node_metric(&cfg.metric, p)?;
            let dv = w * m.sqrt_det;
            let g2 = covariant_sq(cfg, conn, p, h, &m).max(0.0);
            let a = potential_tensor(&cfg.phi.eval(p), &m.g, &m.ginv);
            let p2 = endo_norm_sq(&a, &m.g, &m.ginv);
            let f2 = if with_curvature { curvature_sq(conn, p, h, &m).max(0.0) } else { 0.0 };
            Ok(((0.5 * dv * g2, 0.5 * dv * e2 * p2, g2.sqrt(), operator_norm(&a, &m.g)), 0.5 * dv * f2 / e2))
        })
        .collect::<Result<_, GeometryError>>()?;
    let curvature = with_curvature.then(|| rows.iter().map(|r| r.1).sum());
    Ok(assemble(mesh, rows.into_iter().map(|r| r.0).collect(), curvature))
}

/// `½∫((1/e²)|F_∇|² + |∇Φ|² + e²|ΦΦ* − Id|²) dV` for the supplied connection.
pub fn energy_strong(cfg: &FieldConfiguration, mesh: &Mesh) -> Result<EnergyReport, EnergyError> {
    let conn = cfg
        .connection
        .clone()
        .ok_or_else(|| EnergyError::Unsupported("the strong functional needs an explicit connection".into()))?;
    energy_minimal(cfg, mesh, &conn, true)
}

/// `½∫(|∇Φ|² + e²|ΦΦ* − Id|²) dV` with the Levi-Civita connection of `g`.
pub fn energy_kahler(cfg: &FieldConfiguration, mesh: &Mesh) -> Result<EnergyReport, EnergyError> {
    let conn = levi_civita(&cfg.metric, mesh)?;
    energy_minimal(cfg, mesh, &conn, false)
}

/// `(∇, Φ, g) ↦ (γ⁻¹∇γ, γ⁻¹Φγ, γ*g)`.
///
/// The coordinate-form Nijenhuis operator contracts a frame index of Φ with
/// a derivative index, so the weak energy is exactly invariant only where
/// `∇Φ = 0`; elsewhere the change is what the gauge does to that contraction.
pub fn gauge_transform(
    cfg: &FieldConfiguration,
    gamma: Arc<dyn MatrixField>,
    mesh: &Mesh,
) -> Result<FieldConfiguration, EnergyError> {
    for p in &mesh.points {
        if gamma.eval(p).determinant().abs() < 1e-12 {
            return Err(EnergyError::SingularGauge { at: p.clone() });
        }
    }
    let n = cfg.metric.dim();
    let base = cfg.connection_on(mesh)?;
    let (phi, gm) = (cfg.phi.clone(), gamma.clone());
    let new_phi = AnalyticField::new(n, (n, n), move |x: &[f64]| {
        let g = gm.eval(x);
        g.clone().try_inverse().expect("gauge checked invertible") * phi.eval(x) * g
    });
    let (metric, gm) = (cfg.metric.clone(), gamma.clone());
    let new_metric = AnalyticField::new(n, (n, n), move |x: &[f64]| {
        let g = gm.eval(x);
        g.transpose() * metric.eval(x) * g
    });
    let conn = ConnectionField::new(Arc::new(GaugedConnection { base, gamma, step: mesh.step }));
    Ok(FieldConfiguration {
        phi: AlmostComplexField::new(Arc::new(new_phi), FieldSource::User),
        metric: MetricField::new(Arc::new(new_metric)),
        connection: Some(conn),
        coupling: cfg.coupling,
        tolerance: cfg.tolerance,
    })
}
