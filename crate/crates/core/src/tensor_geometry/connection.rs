//! Affine connections given by Christoffel symbols, the Levi-Civita
//! connection by central differences, and gauge-transformed connections.

use super::field::{partial, partial4, MatrixField, Mesh, MetricField};
use super::GeometryError;
use nalgebra::DMatrix;
use std::sync::Arc;

/// `Γ^k_{ij}` at one point, stored as `[(k·n + i)·n + j]`.
#[derive(Clone, Debug)]
pub struct Christoffel {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Self {
        Christoffel { n, data: vec![0.0; n * n * n] }
    }
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }
    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.n + i) * self.n + j] = v;
    }
    /// Connection matrix along `∂_l`: `(A_l)^k_j = Γ^k_{lj}`.
    pub fn matrix(&self, l: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |k, j| self.get(k, l, j))
    }
    pub fn from_matrices(mats: &[DMatrix<f64>]) -> Self {
        let n = mats.len();
        let mut c = Christoffel::zeros(n);
        for (l, a) in mats.iter().enumerate() {
            for k in 0..n {
                for j in 0..n {
                    c.set(k, l, j, a[(k, j)]);
                }
            }
        }
        c
    }
    pub fn max_torsion(&self) -> f64 {
        let n = self.n;
        let mut t: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    t = t.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        t
    }
}

pub trait ConnectionSource: Send + Sync {
    fn dim(&self) -> usize;
    fn christoffel(&self, x: &[f64]) -> Christoffel;
}

#[derive(Clone)]
pub struct ConnectionField {
    pub source: Arc<dyn ConnectionSource>,
}

impl ConnectionField {
    pub fn new(source: Arc<dyn ConnectionSource>) -> Self {
        ConnectionField { source }
    }
    pub fn flat(dim: usize) -> Self {
        ConnectionField::new(Arc::new(FlatConnection { dim }))
    }
    pub fn christoffel(&self, x: &[f64]) -> Christoffel {
        self.source.christoffel(x)
    }
    pub fn dim(&self) -> usize {
        self.source.dim()
    }
    pub fn max_torsion(&self, mesh: &Mesh) -> f64 {
        mesh.points.iter().map(|p| self.christoffel(p).max_torsion()).fold(0.0, f64::max)
    }
}

pub struct FlatConnection {
    pub dim: usize,
}

impl ConnectionSource for FlatConnection {
    fn dim(&self) -> usize {
        self.dim
    }
    fn christoffel(&self, _: &[f64]) -> Christoffel {
        Christoffel::zeros(self.dim)
    }
}

/// Connection matrices `A_l(x)` supplied directly.
pub struct MatrixConnection<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> ConnectionSource for MatrixConnection<F>
where
    F: Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn christoffel(&self, x: &[f64]) -> Christoffel {
        Christoffel::from_matrices(&(self.f)(x))
    }
}

/// Levi-Civita symbols from central differences of the metric.
pub struct LeviCivita {
    pub metric: MetricField,
    pub step: f64,
}

impl ConnectionSource for LeviCivita {
    fn dim(&self) -> usize {
        self.metric.dim()
    }
    fn christoffel(&self, x: &[f64]) -> Christoffel {
        let g = self.metric.eval(x);
        let n = g.nrows();
        let ginv = g.try_inverse().expect("metric checked nonsingular on the mesh");
        let dg: Vec<DMatrix<f64>> = (0..n).map(|l| partial(self.metric.field.as_ref(), x, l, self.step)).collect();
        let mut c = Christoffel::zeros(n);
        // Lowered symbols are symmetric in (i, j) term by term, so the raised
        // ones are too: torsion vanishes exactly.
        let mut low = vec![0.0; n * n * n];
        for m in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = 0.5 * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]);
                    low[(m * n + i) * n + j] = v;
                    low[(m * n + j) * n + i] = v;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s += ginv[(k, m)] * low[(m * n + i) * n + j];
                    }
                    c.set(k, i, j, s);
                    c.set(k, j, i, s);
                }
            }
        }
        c
    }
}

pub(crate) fn check_step(field: &dyn MatrixField, h: f64) -> Result<(), GeometryError> {
    if let Some(s) = field.lattice_step() {
        let r = h / s;
        if (r - r.round()).abs() > 1e-9 || r.round() < 1.0 {
            return Err(GeometryError::StepMismatch { step: h, lattice: s });
        }
    }
    Ok(())
}

/// Levi-Civita connection of `g` with the mesh's difference step.
pub fn levi_civita(g: &MetricField, mesh: &Mesh) -> Result<ConnectionField, GeometryError> {
    check_step(g.field.as_ref(), mesh.step)?;
    for p in &mesh.points {
        let d = g.eval(p).determinant();
        if d.abs() < 1e-12 {
            return Err(GeometryError::SingularMetric { det: d, at: p.clone() });
        }
    }
    Ok(ConnectionField::new(Arc::new(LeviCivita { metric: g.clone(), step: mesh.step })))
}

/// `max |∇_l g_ij|` over the mesh with fourth-order `∂g`, so the residual
/// measures the connection's own `O(h²)` error.
pub fn metric_compatibility_residual(conn: &ConnectionField, g: &MetricField, mesh: &Mesh) -> f64 {
    let mut worst: f64 = 0.0;
    for p in &mesh.points {
        let gx = g.eval(p);
        let n = gx.nrows();
        let c = conn.christoffel(p);
        for l in 0..n {
            let dg = if g.field.lattice_step().is_some() {
                partial(g.field.as_ref(), p, l, mesh.step)
            } else {
                partial4(g.field.as_ref(), p, l, mesh.step)
            };
            let a = c.matrix(l);
            let r = dg - a.transpose() * &gx - &gx * a;
            worst = worst.max(r.amax());
        }
    }
    worst
}

/// `A'_l = γ⁻¹ ∂_l γ + γ⁻¹ A_l γ`, the pullback of a connection by a frame change.
pub struct GaugedConnection {
    pub base: ConnectionField,
    pub gamma: Arc<dyn MatrixField>,
    pub step: f64,
}

impl ConnectionSource for GaugedConnection {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn christoffel(&self, x: &[f64]) -> Christoffel {
        let n = self.dim();
        let g = self.gamma.eval(x);
        let gi = g.clone().try_inverse().expect("gauge checked invertible on the mesh");
        let base = self.base.christoffel(x);
        let mats: Vec<DMatrix<f64>> = (0..n)
            .map(|l| &gi * partial(self.gamma.as_ref(), x, l, self.step) + &gi * base.matrix(l) * &g)
            .collect();
        Christoffel::from_matrices(&mats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_geometry::chart::{Pole, StereoChart};

    #[test]
    fn flat_metric_has_vanishing_symbols() {
        let mesh = Mesh::patch(&[0.1, 0.2, 0.3], 0.2, 3);
        let lc = levi_civita(&MetricField::flat(3), &mesh).unwrap();
        assert!(mesh.points.iter().all(|p| lc.christoffel(p).data.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn round_sphere_symbols_match_closed_form() {
        // For g = φ² δ with φ = 2/(1+r²): Γ^k_ij = δ_kj ∂_i ln φ + δ_ki ∂_j ln φ − δ_ij ∂_k ln φ.
        let chart = StereoChart::new(2, Pole::North);
        let y = [0.3, -0.4];
        let exact = |k: usize, i: usize, j: usize| {
            let r2 = y[0] * y[0] + y[1] * y[1];
            let d = |a: usize| -2.0 * y[a] / (1.0 + r2);
            let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            dl(k, j) * d(i) + dl(k, i) * d(j) - dl(i, j) * d(k)
        };
        let mut prev = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let mesh = Mesh::patch(&y, 0.0, 1).with_step(h);
            let lc = levi_civita(&MetricField::round_sphere(chart), &mesh).unwrap();
            let c = lc.christoffel(&y);
            let mut err: f64 = 0.0;
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        err = err.max((c.get(k, i, j) - exact(k, i, j)).abs());
                    }
                }
            }
            assert!(err < prev / 3.5 || prev == f64::INFINITY, "not second order: {err} vs {prev}");
            prev = err;
            assert_eq!(c.max_torsion(), 0.0);
        }
    }
}
