//! Matrix-valued fields on a chart, node sets and finite differences.
//!
//! Fields are evaluated by coordinates. Analytic fields accept any point;
//! sampled fields live on a periodic lattice and snap each query to the
//! nearest node, so central differences with a multiple of the lattice step
//! read neighbouring samples exactly.

use super::chart::StereoChart;
use super::octonion::cross_matrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub trait MatrixField: Send + Sync {
    /// Dimension of the underlying chart.
    fn dim(&self) -> usize;
    fn shape(&self) -> (usize, usize);
    fn eval(&self, x: &[f64]) -> DMatrix<f64>;
    /// Lattice spacing of sampled fields; finite differences must use a multiple of it.
    fn lattice_step(&self) -> Option<f64> {
        None
    }
}

pub struct AnalyticField<F> {
    dim: usize,
    shape: (usize, usize),
    f: F,
}

impl<F> AnalyticField<F>
where
    F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync,
{
    pub fn new(dim: usize, shape: (usize, usize), f: F) -> Self {
        AnalyticField { dim, shape, f }
    }
}

impl<F> MatrixField for AnalyticField<F>
where
    F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn shape(&self) -> (usize, usize) {
        self.shape
    }
    fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        (self.f)(x)
    }
}

/// Periodic lattice `lower + step·idx`, `idx_a ∈ [0, counts_a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub lower: Vec<f64>,
    pub counts: Vec<usize>,
    pub step: f64,
}

impl Lattice {
    /// Cubic torus of the given period with `n` nodes per axis.
    pub fn torus(dim: usize, period: f64, n: usize) -> Self {
        Lattice { lower: vec![0.0; dim], counts: vec![n; dim], step: period / n as f64 }
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index of the node nearest to `x`, with wraparound.
    pub fn index_of(&self, x: &[f64]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim() {
            let n = self.counts[a] as i64;
            let k = ((x[a] - self.lower[a]) / self.step).round() as i64;
            flat = flat * self.counts[a] + k.rem_euclid(n) as usize;
        }
        flat
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.counts[a];
            flat /= self.counts[a];
        }
        idx
    }

    pub fn position(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.lower).map(|(&i, &lo)| lo + self.step * i as f64).collect()
    }

    /// Flat index of the neighbour `offset` steps along `axis`.
    pub fn shift(&self, flat: usize, axis: usize, offset: i64) -> usize {
        let mut idx = self.multi_index(flat);
        let n = self.counts[axis] as i64;
        idx[axis] = (idx[axis] as i64 + offset).rem_euclid(n) as usize;
        idx.iter().zip(&self.counts).fold(0, |acc, (&i, &c)| acc * c + i)
    }
}

/// Matrix samples on a periodic lattice.
#[derive(Clone, Debug)]
pub struct SampledField {
    pub lattice: Lattice,
    pub shape: (usize, usize),
    pub values: Vec<DMatrix<f64>>,
}

impl SampledField {
    pub fn from_fn(lattice: Lattice, shape: (usize, usize), f: impl Fn(&[f64]) -> DMatrix<f64>) -> Self {
        let values = (0..lattice.len()).map(|i| f(&lattice.position(i))).collect();
        SampledField { lattice, shape, values }
    }
}

impl MatrixField for SampledField {
    fn dim(&self) -> usize {
        self.lattice.dim()
    }
    fn shape(&self) -> (usize, usize) {
        self.shape
    }
    fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        self.values[self.lattice.index_of(x)].clone()
    }
    fn lattice_step(&self) -> Option<f64> {
        Some(self.lattice.step)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldSource {
    Cayley,
    SamelsonPullback,
    User,
}

/// An endomorphism field `Φ^k_j`; almost complex where `Φ² = −Id`.
#[derive(Clone)]
pub struct AlmostComplexField {
    pub field: Arc<dyn MatrixField>,
    pub source: FieldSource,
}

impl AlmostComplexField {
    pub fn new(field: Arc<dyn MatrixField>, source: FieldSource) -> Self {
        AlmostComplexField { field, source }
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        self.field.eval(x)
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    /// Max over nodes of `|Φ² + Id|` (entrywise max).
    pub fn square_residual(&self, mesh: &Mesh) -> f64 {
        let n = self.field.shape().0;
        mesh.points
            .iter()
            .map(|p| {
                let j = self.eval(p);
                (&j * &j + DMatrix::identity(n, n)).amax()
            })
            .fold(0.0, f64::max)
    }
}

/// A Riemannian metric `g_ij`.
#[derive(Clone)]
pub struct MetricField {
    pub field: Arc<dyn MatrixField>,
}

impl MetricField {
    pub fn new(field: Arc<dyn MatrixField>) -> Self {
        MetricField { field }
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        self.field.eval(x)
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn flat(dim: usize) -> Self {
        MetricField::new(Arc::new(AnalyticField::new(dim, (dim, dim), move |_| DMatrix::identity(dim, dim))))
    }

    pub fn round_sphere(chart: StereoChart) -> Self {
        MetricField::new(Arc::new(AnalyticField::new(chart.n, (chart.n, chart.n), move |y| chart.metric(y))))
    }
}

pub fn constant_field(m: DMatrix<f64>, dim: usize) -> Arc<dyn MatrixField> {
    let shape = m.shape();
    Arc::new(AnalyticField::new(dim, shape, move |_| m.clone()))
}

/// Cayley structure in a stereographic chart of S⁶: `Φ = E⁺ [x×] E`.
pub fn cayley_field(chart: StereoChart) -> AlmostComplexField {
    assert_eq!(chart.n, 6, "the Cayley structure lives on S⁶");
    let f = move |y: &[f64]| {
        let x = chart.embed(y);
        let e = chart.jacobian(y);
        let et = e.transpose();
        // EᵀE = g is a multiple of the identity in this chart.
        let scale = 1.0 / (et.row(0) * e.column(0))[(0, 0)];
        et * cross_matrix(x.as_slice()) * e * scale
    };
    AlmostComplexField::new(Arc::new(AnalyticField::new(6, (6, 6), f)), FieldSource::Cayley)
}

/// Integration or sampling nodes on a chart, with the finite-difference step.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    /// Coordinate-measure weights; multiply by `√det g` for the volume.
    pub weights: Vec<f64>,
    pub step: f64,
}

impl Mesh {
    /// Every node of a periodic lattice, with the exact periodic trapezoid weights.
    pub fn lattice(l: &Lattice) -> Self {
        let w = l.step.powi(l.dim() as i32);
        Mesh { dim: l.dim(), points: (0..l.len()).map(|i| l.position(i)).collect(), weights: vec![w; l.len()], step: l.step }
    }

    /// Equispaced nodes in `center ± half_width` per axis; the difference
    /// step equals the node spacing.
    pub fn patch(center: &[f64], half_width: f64, nodes_per_axis: usize) -> Self {
        let dim = center.len();
        let step = if nodes_per_axis > 1 { 2.0 * half_width / (nodes_per_axis - 1) as f64 } else { half_width.max(1e-3) };
        let total = nodes_per_axis.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = vec![0.0; dim];
            for a in (0..dim).rev() {
                let i = rem % nodes_per_axis;
                rem /= nodes_per_axis;
                p[a] = center[a] - half_width + step * i as f64;
                if nodes_per_axis == 1 {
                    p[a] = center[a];
                }
            }
            points.push(p);
        }
        Mesh { dim, weights: vec![step.powi(dim as i32); total], points, step }
    }

    /// Gauss–Legendre nodes in `u ∈ (−1, 1)^dim` mapped by `y = tan(πu/2)`,
    /// covering a whole stereographic chart.
    pub fn compactified(dim: usize, nodes_per_axis: usize, step: f64) -> Self {
        let (u, w) = crate::quadrature::gauss_legendre(nodes_per_axis);
        let y: Vec<f64> = u.iter().map(|v| (std::f64::consts::FRAC_PI_2 * v).tan()).collect();
        let jac: Vec<f64> = u.iter().zip(&y).zip(&w).map(|((_, yy), ww)| ww * std::f64::consts::FRAC_PI_2 * (1.0 + yy * yy)).collect();
        let total = nodes_per_axis.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = vec![0.0; dim];
            let mut wt = 1.0;
            for a in (0..dim).rev() {
                let i = rem % nodes_per_axis;
                rem /= nodes_per_axis;
                p[a] = y[i];
                wt *= jac[i];
            }
            points.push(p);
            weights.push(wt);
        }
        Mesh { dim, points, weights, step }
    }

    /// Gauss–Legendre nodes on `[−R, R]^dim` with weights multiplied by
    /// `ρ(y) = 1 / (1 + |y|^{2p})`. Under `y ↦ y/|y|²` the weight becomes
    /// `1 − ρ`, so the same mesh used in both stereographic charts of a
    /// sphere is a partition of unity and the two sums add up to the
    /// integral over the whole sphere. The cube must hold the region where
    /// `ρ` matters: on S² with `p = 6`, `R = 1.5` misses about 2e-4 of the
    /// volume and `R = 2.5` about 2e-6, given enough nodes for the `ρ` ramp.
    pub fn stereo_cap(dim: usize, nodes_per_axis: usize, radius: f64, power: i32, step: f64) -> Self {
        let (u, w) = crate::quadrature::gauss_legendre(nodes_per_axis);
        let total = nodes_per_axis.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = vec![0.0; dim];
            let mut wt = radius.powi(dim as i32);
            for a in (0..dim).rev() {
                let i = rem % nodes_per_axis;
                rem /= nodes_per_axis;
                p[a] = radius * u[i];
                wt *= w[i];
            }
            let r2: f64 = p.iter().map(|v| v * v).sum();
            weights.push(wt / (1.0 + r2.powi(power)));
            points.push(p);
        }
        Mesh { dim, points, weights, step }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn with_step(&self, step: f64) -> Self {
        Mesh { step, ..self.clone() }
    }
}

/// Central difference `∂_axis F(x)` with step `h`.
pub fn partial(f: &dyn MatrixField, x: &[f64], axis: usize, h: f64) -> DMatrix<f64> {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[axis] += h;
    xm[axis] -= h;
    (f.eval(&xp) - f.eval(&xm)) / (2.0 * h)
}

/// Fourth-order central difference.
pub fn partial4(f: &dyn MatrixField, x: &[f64], axis: usize, h: f64) -> DMatrix<f64> {
    let at = |s: f64| {
        let mut y = x.to_vec();
        y[axis] += s * h;
        f.eval(&y)
    };
    (at(-2.0) - at(2.0) + (at(1.0) - at(-1.0)) * 8.0) / (12.0 * h)
}

/// Finite differences of a field that is given as a closure.
pub fn partial_fn(f: &dyn Fn(&[f64]) -> DMatrix<f64>, x: &[f64], axis: usize, h: f64) -> DMatrix<f64> {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[axis] += h;
    xm[axis] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_indexing_wraps() {
        let l = Lattice::torus(2, 1.0, 4);
        assert_eq!(l.index_of(&[0.25, 0.5]), 4 + 2);
        assert_eq!(l.index_of(&[-0.25, 0.0]), 12);
        assert_eq!(l.shift(0, 1, -1), 3);
        assert_eq!(l.position(6), vec![0.25, 0.5]);
    }

    #[test]
    fn sampled_differences_match_analytic_on_lattice() {
        let l = Lattice::torus(2, 2.0 * std::f64::consts::PI, 32);
        let f = |x: &[f64]| DMatrix::from_element(1, 1, x[0].sin() * x[1].cos());
        let s = SampledField::from_fn(l.clone(), (1, 1), f);
        let a = AnalyticField::new(2, (1, 1), f);
        let p = l.position(37);
        let ds = partial(&s, &p, 0, l.step);
        let da = partial(&a, &p, 0, l.step);
        assert!((ds - da).amax() < 1e-14);
    }

    #[test]
    fn compactified_mesh_integrates_round_volume() {
        // Vol(S²) = 4π with density 4/(1+|y|²)². The mapped integrand is not
        // smooth at the cube corners, so convergence is algebraic.
        let m = Mesh::compactified(2, 40, 1e-3);
        let v: f64 = m.points.iter().zip(&m.weights).map(|(p, w)| w * 4.0 / (1.0 + p[0] * p[0] + p[1] * p[1]).powi(2)).sum();
        assert!((v - 4.0 * std::f64::consts::PI).abs() < 1e-4, "{v}");
    }

    #[test]
    fn two_caps_integrate_round_volume() {
        let m = Mesh::stereo_cap(2, 48, 2.5, 6, 1e-3);
        // Both charts carry the same density, so the two halves are equal.
        let half: f64 = m.points.iter().zip(&m.weights).map(|(p, w)| w * 4.0 / (1.0 + p[0] * p[0] + p[1] * p[1]).powi(2)).sum();
        assert!((2.0 * half - 4.0 * std::f64::consts::PI).abs() < 1e-4, "{}", 2.0 * half);
    }
}
