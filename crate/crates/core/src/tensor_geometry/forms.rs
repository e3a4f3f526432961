//! Metric averaging over a complex structure and the fundamental two-form.

use super::field::{partial, AlmostComplexField, AnalyticField, MatrixField, Mesh, MetricField};
use super::GeometryError;
use nalgebra::DMatrix;
use rayon::prelude::*;
use std::sync::Arc;

/// `g(u,v) = ½ g′(u,v) + ½ g′(Ju,Jv)`, i.e. `½(G + JᵀGJ)`. Positive
/// definiteness is checked at the mesh nodes and reported, never repaired.
pub fn project_metric(g_raw: &MetricField, j: &AlmostComplexField, mesh: &Mesh) -> Result<MetricField, GeometryError> {
    let gr = g_raw.clone();
    let jj = j.clone();
    let dim = g_raw.dim();
    let out = MetricField::new(Arc::new(AnalyticField::new(dim, (dim, dim), move |x: &[f64]| {
        let g = gr.eval(x);
        let m = jj.eval(x);
        let s = (&g + m.transpose() * &g * &m) * 0.5;
        (&s + s.transpose()) * 0.5
    })));
    for p in &mesh.points {
        if out.eval(p).cholesky().is_none() {
            return Err(GeometryError::DegenerateResult { at: p.clone() });
        }
    }
    Ok(out)
}

/// `max |JᵀGJ − G|` over the mesh.
pub fn orthogonality_residual(g: &MetricField, j: &AlmostComplexField, mesh: &Mesh) -> f64 {
    mesh.points
        .iter()
        .map(|p| {
            let gx = g.eval(p);
            let m = j.eval(p);
            (m.transpose() * &gx * &m - gx).amax()
        })
        .fold(0.0, f64::max)
}

/// Pfaffian of an antisymmetric matrix by expansion along the first row.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    let idx: Vec<usize> = (0..n).collect();
    pf_rec(a, &idx)
}

fn pf_rec(a: &DMatrix<f64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut s = 0.0;
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let rest: Vec<usize> = idx.iter().copied().filter(|&k| k != first && k != j).collect();
        let sign = if pos % 2 == 1 { 1.0 } else { -1.0 };
        s += sign * a[(first, j)] * pf_rec(a, &rest);
    }
    s
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub struct TwoFormReport {
    /// `ω_ij = g(J∂_i, ∂_j) = (JᵀG)_ij`.
    pub omega: Arc<dyn MatrixField>,
    /// `∫ ω^p` in the chart orientation when `2p` is the dimension.
    pub top_integral: Option<f64>,
    /// Max over the mesh of the g-norm of `dω` (form convention, `1/3!`).
    pub max_d_omega: f64,
}

/// The fundamental two-form, its top wedge power integrated over the mesh
/// and `max |dω|`.
pub fn fundamental_two_form(
    g: &MetricField,
    j: &AlmostComplexField,
    mesh: &Mesh,
    power: usize,
) -> Result<TwoFormReport, GeometryError> {
    let n = g.dim();
    if 2 * power > n {
        return Err(GeometryError::DimensionMismatch(format!("ω^{power} vanishes on a {n}-manifold")));
    }
    let (gg, jj) = (g.clone(), j.clone());
    let omega: Arc<dyn MatrixField> =
        Arc::new(AnalyticField::new(n, (n, n), move |x: &[f64]| jj.eval(x).transpose() * gg.eval(x)));
    let top_integral = (2 * power == n).then(|| {
        let c = factorial(power);
        mesh.points.par_iter().zip(&mesh.weights).map(|(p, w)| w * c * pfaffian(&omega.eval(p))).sum::<f64>()
    });
    let h = mesh.step;
    let max_d_omega = mesh
        .points
        .par_iter()
        .map(|p| {
            let d: Vec<DMatrix<f64>> = (0..n).map(|l| partial(omega.as_ref(), p, l, h)).collect();
            let ginv = g.eval(p).try_inverse().unwrap_or_else(|| DMatrix::zeros(n, n));
            let mut da = vec![0.0; n * n * n];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        da[(a * n + b) * n + c] = d[a][(b, c)] + d[b][(c, a)] + d[c][(a, b)];
                    }
                }
            }
            let t = crate::lie_core::Tensor3 { n, data: da };
            // All three slots are lower indices here; raise with g⁻¹ throughout.
            norm_lower3(&t, &ginv) / factorial(3)
        })
        .map(|s: f64| s.max(0.0).sqrt())
        .reduce(|| 0.0, f64::max);
    Ok(TwoFormReport { omega, top_integral, max_d_omega })
}

fn norm_lower3(t: &crate::lie_core::Tensor3, ginv: &DMatrix<f64>) -> f64 {
    let n = t.n;
    let idx = |i: usize, j: usize, k: usize| (i * n + j) * n + k;
    let mut a = t.data.clone();
    for slot in 0..3 {
        let mut b = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        let v = match slot {
                            0 => a[idx(m, j, k)] * ginv[(i, m)],
                            1 => a[idx(i, m, k)] * ginv[(j, m)],
                            _ => a[idx(i, j, m)] * ginv[(k, m)],
                        };
                        s += v;
                    }
                    b[idx(i, j, k)] = s;
                }
            }
        }
        a = b;
    }
    a.iter().zip(&t.data).map(|(x, y)| x * y).sum()
}
