//! Nijenhuis operators: the coordinate form built from covariant derivatives
//! and the connection-free bracket form.
//!
//! Sign convention: for `Φ² = −Id` and a torsion-free connection the
//! coordinate form evaluates to `−N_J(∂_i, ∂_j)` of the bracket form. Norms
//! and vanishing are unaffected.

use super::connection::{check_step, Christoffel, ConnectionField};
use super::field::{partial, AlmostComplexField, MatrixField, Mesh, MetricField};
use super::GeometryError;
use crate::lie_core::Tensor3;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

/// `∇_l Φ = ∂_l Φ + [A_l, Φ]` for every `l`, with `(A_l)^k_m = Γ^k_{lm}`.
pub fn covariant_derivative(phi: &dyn MatrixField, gamma: &Christoffel, x: &[f64], h: f64) -> Vec<DMatrix<f64>> {
    let p = phi.eval(x);
    (0..phi.dim())
        .map(|l| {
            let a = gamma.matrix(l);
            partial(phi, x, l, h) + &a * &p - &p * &a
        })
        .collect()
}

/// `N^k_ij = Σ_l Φ^l_i (∇_lΦ^k_j − ∇_jΦ^k_l) − Φ^l_j (∇_lΦ^k_i − ∇_iΦ^k_l)`,
/// stored as `get(i, j, k)`.
pub fn nijenhuis_at(phi: &dyn MatrixField, gamma: &Christoffel, x: &[f64], h: f64) -> Tensor3 {
    nijenhuis_from_derivatives(&phi.eval(x), &covariant_derivative(phi, gamma, x, h))
}

/// The coordinate form from nodal values `Φ` and covariant derivatives `∇_lΦ`.
pub fn nijenhuis_from_derivatives(p: &DMatrix<f64>, d: &[DMatrix<f64>]) -> Tensor3 {
    let n = p.nrows();
    // W[i][j][k] = Σ_l Φ^l_i (∇_lΦ^k_j − ∇_jΦ^k_l)
    let mut w = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += p[(l, i)] * (d[l][(k, j)] - d[j][(k, l)]);
                }
                w[(i * n + j) * n + k] = s;
            }
        }
    }
    let mut out = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out.set(i, j, k, w[(i * n + j) * n + k] - w[(j * n + i) * n + k]);
            }
        }
    }
    out
}

/// `g_kk' g^ii' g^jj' N^k_ij N^k'_i'j'`.
pub fn tensor3_norm_sq(t: &Tensor3, g: &DMatrix<f64>, ginv: &DMatrix<f64>) -> f64 {
    let n = t.n;
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut a = vec![0.0; n * n * n];
    let mut b = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                a[idx(i, j, k)] = (0..n).map(|m| g[(k, m)] * t.get(i, j, m)).sum();
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                b[idx(i, j, k)] = (0..n).map(|m| ginv[(i, m)] * a[idx(m, j, k)]).sum();
            }
        }
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c: f64 = (0..n).map(|m| ginv[(j, m)] * b[idx(i, m, k)]).sum();
                s += c * t.get(i, j, k);
            }
        }
    }
    s
}

/// Nodal values of the coordinate-form operator on a mesh.
#[derive(Clone, Debug)]
pub struct NijenhuisField {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Tensor3>,
    pub step: f64,
    /// `max |N_h − N_2h| / 3` over the nodes.
    pub error_estimate: f64,
}

impl NijenhuisField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(Tensor3::max_abs).fold(0.0, f64::max)
    }

    /// Pointwise `|N|_g`.
    pub fn norms(&self, g: &MetricField) -> Result<Vec<f64>, GeometryError> {
        self.points
            .par_iter()
            .zip(&self.values)
            .map(|(p, t)| {
                let gx = g.eval(p);
                let det = gx.determinant();
                let ginv =
                    gx.clone().try_inverse().ok_or_else(|| GeometryError::SingularMetric { det, at: p.clone() })?;
                Ok(tensor3_norm_sq(t, &gx, &ginv).max(0.0).sqrt())
            })
            .collect()
    }

    pub fn max_norm(&self, g: &MetricField) -> Result<f64, GeometryError> {
        Ok(self.norms(g)?.into_iter().fold(0.0, f64::max))
    }
}

/// The coordinate-form operator at every mesh node, with the mesh step as
/// the difference step. With `tol`, fails when the Richardson estimate
/// exceeds it.
pub fn nijenhuis_coordinate(
    phi: &AlmostComplexField,
    conn: &ConnectionField,
    mesh: &Mesh,
    tol: Option<f64>,
) -> Result<NijenhuisField, GeometryError> {
    let f = phi.field.as_ref();
    if conn.dim() != f.dim() || f.shape() != (f.dim(), f.dim()) {
        return Err(GeometryError::DimensionMismatch(format!(
            "field of shape {:?} on a {}-dim chart, connection dim {}",
            f.shape(),
            f.dim(),
            conn.dim()
        )));
    }
    let h = mesh.step;
    check_step(f, h)?;
    let pairs: Vec<(Tensor3, f64)> = mesh
        .points
        .par_iter()
        .map(|p| {
            let gamma = conn.christoffel(p);
            let fine = nijenhuis_at(f, &gamma, p, h);
            let err = if tol.is_some() {
                let coarse = nijenhuis_at(f, &gamma, p, 2.0 * h);
                fine.data.iter().zip(&coarse.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / 3.0
            } else {
                0.0
            };
            (fine, err)
        })
        .collect();
    let error_estimate = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    if let Some(t) = tol {
        if error_estimate > t {
            return Err(GeometryError::GridTooCoarse { estimate: error_estimate, tol: t });
        }
    }
    Ok(NijenhuisField {
        points: mesh.points.clone(),
        values: pairs.into_iter().map(|p| p.0).collect(),
        step: h,
        error_estimate,
    })
}

pub type VectorField<'a> = &'a (dyn Fn(&[f64]) -> DVector<f64> + Sync);

#[derive(Clone, Debug)]
pub struct BracketValue {
    pub value: DVector<f64>,
    pub error_estimate: f64,
}

fn dvec(f: &dyn Fn(&[f64]) -> DVector<f64>, x: &[f64], l: usize, h: f64) -> DVector<f64> {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[l] += h;
    xm[l] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

fn lie_bracket(u: &dyn Fn(&[f64]) -> DVector<f64>, v: &dyn Fn(&[f64]) -> DVector<f64>, x: &[f64], h: f64) -> DVector<f64> {
    let ux = u(x);
    let vx = v(x);
    let mut out = DVector::zeros(x.len());
    for l in 0..x.len() {
        out += dvec(v, x, l, h) * ux[l] - dvec(u, x, l, h) * vx[l];
    }
    out
}

fn bracket_formula(j: &dyn MatrixField, u: VectorField, v: VectorField, x: &[f64], h: f64) -> DVector<f64> {
    let ju = |y: &[f64]| j.eval(y) * u(y);
    let jv = |y: &[f64]| j.eval(y) * v(y);
    let jx = j.eval(x);
    lie_bracket(u, v, x, h) - lie_bracket(&ju, &jv, x, h) + jx * (lie_bracket(u, &jv, x, h) + lie_bracket(&ju, v, x, h))
}

/// `N_J(u, v) = [u,v] − [Ju,Jv] + J[u,Jv] + J[Ju,v]` at `x` by central differences.
pub fn nijenhuis_bracket(
    j: &AlmostComplexField,
    u: VectorField,
    v: VectorField,
    x: &[f64],
    h: f64,
    tol: Option<f64>,
) -> Result<BracketValue, GeometryError> {
    let f = j.field.as_ref();
    check_step(f, h)?;
    let value = bracket_formula(f, u, v, x, h);
    let mut error_estimate = 0.0;
    if let Some(t) = tol {
        let coarse = bracket_formula(f, u, v, x, 2.0 * h);
        error_estimate = (&value - coarse).amax() / 3.0;
        if error_estimate > t {
            return Err(GeometryError::GridTooCoarse { estimate: error_estimate, tol: t });
        }
    }
    Ok(BracketValue { value, error_estimate })
}
