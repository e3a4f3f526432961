//! Compact-group charts with Haar densities, irreducible matrix coefficients
//! and Peter–Weyl coefficients by tensor-product quadrature.
//!
//! All charts are normalized so the group volume is `λ⁻¹` (SU(3), SU(2) at
//! `λ = 1`) or `2π/λ` (the circle). Fourier coefficients are averaged over the
//! group, `a^{ij} = √d · Vol⁻¹ ∫ f(γ) ρ^{ij}(γ⁻¹) dV`, so a pure mode has
//! coefficient one on every chart.

use crate::quadrature::{AxisKind, RuleSpec, TensorRule};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub type CMat = DMatrix<Complex64>;

/// The phase exponent of the SU(3) chart: phases carry `λ^{1/5}` so that the
/// five φ-ranges together shrink the volume by exactly `λ⁻¹`.
pub const SU3_PHASE_EXPONENT: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum HarmonicsError {
    #[error("lambda must be positive, got {0}")]
    InvalidLambda(f64),
    #[error("unsupported irrep label {0}")]
    UnsupportedLabel(String),
    #[error("irrep belongs to {irrep:?} but chart is {chart:?}")]
    GroupMismatch { irrep: GroupKind, chart: GroupKind },
    #[error("quadrature underresolved: refining axis {axis} shifts a coefficient by {shift:.3e} (tolerance {tol:.1e})")]
    QuadratureUnderresolved { axis: usize, shift: f64, tol: f64 },
    #[error("rule has {rule} axes but chart has {chart}")]
    RuleMismatch { rule: usize, chart: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    U1,
    Su2,
    Su3,
}

/// Parameter box, embedding and Haar density of a compact group.
#[derive(Clone, Debug)]
pub struct GroupChart {
    pub group: GroupKind,
    pub lambda: f64,
    pub param_box: Vec<(f64, f64)>,
    /// `λ^{1/5}` for SU(3), `λ` for the circle, 1 for SU(2).
    pub phase_scale: f64,
}

pub fn su3_chart(lambda: f64) -> Result<GroupChart, HarmonicsError> {
    check_lambda(lambda)?;
    let s = lambda.powf(SU3_PHASE_EXPONENT);
    let mut b = vec![(0.0, PI / 2.0); 3];
    b.extend(std::iter::repeat((0.0, 2.0 * PI / s)).take(5));
    Ok(GroupChart { group: GroupKind::Su3, lambda, param_box: b, phase_scale: s })
}

pub fn circle_chart(lambda: f64) -> Result<GroupChart, HarmonicsError> {
    check_lambda(lambda)?;
    Ok(GroupChart { group: GroupKind::U1, lambda, param_box: vec![(0.0, 2.0 * PI / lambda)], phase_scale: lambda })
}

/// Euler angles `(α, β, γ) ∈ [0,2π) × [0,π] × [0,4π)`.
pub fn su2_chart() -> GroupChart {
    GroupChart {
        group: GroupKind::Su2,
        lambda: 1.0,
        param_box: vec![(0.0, 2.0 * PI), (0.0, PI), (0.0, 4.0 * PI)],
        phase_scale: 1.0,
    }
}

fn check_lambda(lambda: f64) -> Result<(), HarmonicsError> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(HarmonicsError::InvalidLambda(lambda))
    }
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

impl GroupChart {
    pub fn n_params(&self) -> usize {
        self.param_box.len()
    }

    pub fn matrix_size(&self) -> usize {
        match self.group {
            GroupKind::U1 => 1,
            GroupKind::Su2 => 2,
            GroupKind::Su3 => 3,
        }
    }

    /// Exact group volume of the chart.
    pub fn volume(&self) -> f64 {
        match self.group {
            GroupKind::U1 => 2.0 * PI / self.lambda,
            GroupKind::Su2 | GroupKind::Su3 => 1.0 / self.lambda,
        }
    }

    pub fn embed(&self, p: &[f64]) -> CMat {
        let n = self.matrix_size();
        let mut m = CMat::zeros(n, n);
        self.embed_into(p, &mut m);
        m
    }

    pub fn embed_into(&self, p: &[f64], m: &mut CMat) {
        match self.group {
            GroupKind::U1 => m[(0, 0)] = cis(self.lambda * p[0]),
            GroupKind::Su2 => {
                let (a, b, g) = (p[0], p[1], p[2]);
                let (c, s) = ((0.5 * b).cos(), (0.5 * b).sin());
                m[(0, 0)] = cis(-0.5 * (a + g)) * c;
                m[(0, 1)] = -cis(-0.5 * (a - g)) * s;
                m[(1, 0)] = cis(0.5 * (a - g)) * s;
                m[(1, 1)] = cis(0.5 * (a + g)) * c;
            }
            GroupKind::Su3 => {
                let (s1, c1) = p[0].sin_cos();
                let (s2, c2) = p[1].sin_cos();
                let (s3, c3) = p[2].sin_cos();
                let k = self.phase_scale;
                let f = [k * p[3], k * p[4], k * p[5], k * p[6], k * p[7]];
                let e = |x: f64| cis(x);
                m[(0, 0)] = e(f[0]) * (c1 * c2);
                m[(0, 1)] = e(f[2]) * s1;
                m[(0, 2)] = e(f[3]) * (c1 * s2);
                m[(1, 0)] = e(-(f[3] + f[4])) * (s2 * s3) - e(f[0] + f[1] - f[2]) * (s1 * c2 * c3);
                m[(1, 1)] = e(f[1]) * (c1 * c3);
                m[(1, 2)] = -e(-(f[0] + f[4])) * (c2 * s3) - e(f[1] - f[2] + f[3]) * (s1 * s2 * c3);
                m[(2, 0)] = -e(f[0] - f[2] + f[4]) * (s1 * c2 * s3) - e(-(f[1] + f[3])) * (s2 * c3);
                m[(2, 1)] = e(f[4]) * (c1 * s3);
                m[(2, 2)] = e(-(f[0] + f[1])) * (c2 * c3) - e(-f[2] + f[3] + f[4]) * (s1 * s2 * s3);
            }
        }
    }

    pub fn haar_density(&self, p: &[f64]) -> f64 {
        match self.group {
            GroupKind::U1 => 1.0,
            GroupKind::Su2 => p[1].sin() / (16.0 * PI * PI),
            GroupKind::Su3 => {
                let (s1, c1) = p[0].sin_cos();
                let (s2, c2) = p[1].sin_cos();
                let (s3, c3) = p[2].sin_cos();
                s1 * c1.powi(3) * s2 * c2 * s3 * c3 / (2.0 * PI.powi(5))
            }
        }
    }

    /// Gauss–Legendre on the angular axes and trapezoid on the phase axes.
    ///
    /// Each phase axis spans exactly one period of its scaled phase at every
    /// λ, so `phase_nodes` above the phase-polynomial degree integrates any
    /// trigonometric polynomial integrand exactly, independent of λ.
    pub fn default_rule(&self, angle_nodes: usize, phase_nodes: usize) -> RuleSpec {
        let gl = (AxisKind::GaussLegendre, angle_nodes);
        let tr = (AxisKind::Trapezoid, phase_nodes);
        match self.group {
            GroupKind::U1 => RuleSpec::new(vec![tr]),
            GroupKind::Su2 => RuleSpec::new(vec![tr, gl, tr]),
            GroupKind::Su3 => {
                let mut v = vec![gl; 3];
                v.extend(std::iter::repeat(tr).take(5));
                RuleSpec::new(v)
            }
        }
    }

    pub fn rule(&self, spec: &RuleSpec) -> Result<TensorRule, HarmonicsError> {
        if spec.axes.len() != self.n_params() {
            return Err(HarmonicsError::RuleMismatch { rule: spec.axes.len(), chart: self.n_params() });
        }
        Ok(spec.on_box(&self.param_box))
    }

    /// Integrates a vector-valued integrand against the Haar density.
    ///
    /// `body(params, element, out)` writes `out.len()` values at one node.
    /// Parallel over the first axis; partial sums are combined in node order
    /// so the result does not depend on the thread count.
    pub fn integrate<F>(&self, rule: &TensorRule, n_out: usize, body: F) -> Vec<Complex64>
    where
        F: Fn(&[f64], &CMat, &mut [Complex64]) + Sync,
    {
        let first = &rule.axes[0];
        let partials: Vec<Vec<Complex64>> = (0..first.len())
            .into_par_iter()
            .map(|i0| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n_out];
                let mut vals = vec![Complex64::new(0.0, 0.0); n_out];
                let mut point = vec![0.0; rule.dim()];
                point[0] = first.nodes[i0];
                let w0 = first.weights[i0];
                let n = self.matrix_size();
                let mut g = CMat::zeros(n, n);
                rule.for_each_tail(&mut point, |p, w| {
                    let wd = w0 * w * self.haar_density(p);
                    if wd == 0.0 {
                        return;
                    }
                    self.embed_into(p, &mut g);
                    body(p, &g, &mut vals);
                    for (a, v) in acc.iter_mut().zip(&vals) {
                        *a += v * wd;
                    }
                });
                acc
            })
            .collect();
        let mut total = vec![Complex64::new(0.0, 0.0); n_out];
        for part in partials {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        total
    }

    /// Quadrature value of the Haar volume.
    pub fn quadrature_volume(&self, spec: &RuleSpec) -> Result<f64, HarmonicsError> {
        let rule = self.rule(spec)?;
        Ok(self.integrate(&rule, 1, |_, _, out| out[0] = Complex64::new(1.0, 0.0))[0].re)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IrrepLabel {
    /// Character `e^{iλkt}`.
    U1(i64),
    /// Twice the spin.
    Su2(u32),
    /// Highest weight `(m₁, m₂)`, carried by `S^{m₁}V ⊗ S^{m₂}Λ²V`.
    Su3(u32, u32),
}

impl std::fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IrrepLabel::U1(k) => write!(f, "u1:{k}"),
            IrrepLabel::Su2(n) => write!(f, "su2:{n}"),
            IrrepLabel::Su3(a, b) => write!(f, "su3:{a},{b}"),
        }
    }
}

/// An irreducible unitary representation with an explicit carrier space.
#[derive(Clone, Debug)]
pub struct Irrep {
    pub label: IrrepLabel,
    pub dim: usize,
    /// Isometry from the carrier space into the tensor space it lives in.
    carrier: Option<CMat>,
}

const MAX_SU2_TWICE_SPIN: u32 = 6;

impl Irrep {
    pub fn new(label: IrrepLabel) -> Result<Self, HarmonicsError> {
        match label {
            IrrepLabel::U1(_) => Ok(Irrep { label, dim: 1, carrier: None }),
            IrrepLabel::Su2(n) => {
                if n > MAX_SU2_TWICE_SPIN {
                    return Err(HarmonicsError::UnsupportedLabel(label.to_string()));
                }
                let iso = sym_isometry(2, n as usize);
                Ok(Irrep { label, dim: iso.ncols(), carrier: Some(iso) })
            }
            IrrepLabel::Su3(m1, m2) => {
                if m1 + m2 > 2 {
                    return Err(HarmonicsError::UnsupportedLabel(label.to_string()));
                }
                let iso = su3_carrier(m1 as usize, m2 as usize);
                Ok(Irrep { label, dim: iso.ncols(), carrier: Some(iso) })
            }
        }
    }

    pub fn trivial(group: GroupKind) -> Self {
        let label = match group {
            GroupKind::U1 => IrrepLabel::U1(0),
            GroupKind::Su2 => IrrepLabel::Su2(0),
            GroupKind::Su3 => IrrepLabel::Su3(0, 0),
        };
        Irrep::new(label).expect("trivial irrep is supported")
    }

    pub fn group(&self) -> GroupKind {
        match self.label {
            IrrepLabel::U1(_) => GroupKind::U1,
            IrrepLabel::Su2(_) => GroupKind::Su2,
            IrrepLabel::Su3(..) => GroupKind::Su3,
        }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.label, IrrepLabel::U1(0) | IrrepLabel::Su2(0) | IrrepLabel::Su3(0, 0))
    }
}

/// `ρ(γ)` for a group element given in its defining matrix form.
pub fn irrep_coeff(irrep: &Irrep, g: &CMat) -> CMat {
    match irrep.label {
        IrrepLabel::U1(k) => CMat::from_element(1, 1, g[(0, 0)].powi(k as i32)),
        IrrepLabel::Su2(0) | IrrepLabel::Su3(0, 0) => CMat::identity(1, 1),
        IrrepLabel::Su2(1) | IrrepLabel::Su3(1, 0) => g.clone(),
        IrrepLabel::Su2(n) => conj_by(irrep.carrier.as_ref().unwrap(), &kron_power(g, n as usize)),
        IrrepLabel::Su3(0, 1) => wedge2(g),
        IrrepLabel::Su3(m1, m2) => {
            let w = wedge2(g);
            let big = kron(&kron_power(g, m1 as usize), &kron_power(&w, m2 as usize));
            conj_by(irrep.carrier.as_ref().unwrap(), &big)
        }
    }
}

fn conj_by(iso: &CMat, m: &CMat) -> CMat {
    iso.adjoint() * m * iso
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

fn kron_power(g: &CMat, k: usize) -> CMat {
    let mut out = CMat::identity(1, 1);
    for _ in 0..k {
        out = kron(&out, g);
    }
    out
}

/// Action on `Λ²C³` in the basis `e₁∧e₂, e₁∧e₃, e₂∧e₃`.
fn wedge2(g: &CMat) -> CMat {
    const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
    CMat::from_fn(3, 3, |r, c| {
        let (i, j) = PAIRS[r];
        let (k, l) = PAIRS[c];
        g[(i, k)] * g[(j, l)] - g[(i, l)] * g[(j, k)]
    })
}

/// Orthonormal basis of symmetric tensors in `(C^d)^{⊗k}`, as columns.
fn sym_isometry(d: usize, k: usize) -> CMat {
    let total = d.pow(k as u32);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    for idx in 0..total {
        let mut digits = digits_of(idx, d, k);
        digits.sort_unstable();
        if seen.contains(&digits) {
            continue;
        }
        let mut col = vec![0.0; total];
        for (j, c) in col.iter_mut().enumerate() {
            let mut dj = digits_of(j, d, k);
            dj.sort_unstable();
            if dj == digits {
                *c = 1.0;
            }
        }
        let nrm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        cols.push(col.into_iter().map(|x| x / nrm).collect());
        seen.push(digits);
    }
    CMat::from_fn(total, cols.len(), |r, c| Complex64::new(cols[c][r], 0.0))
}

fn digits_of(mut idx: usize, d: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for slot in out.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
    out
}

/// Carrier of `(m₁, m₂)` inside `V^{⊗m₁} ⊗ (Λ²V)^{⊗m₂}`.
fn su3_carrier(m1: usize, m2: usize) -> CMat {
    let s1 = sym_isometry(3, m1);
    let s2 = sym_isometry(3, m2);
    let prod = kron(&s1, &s2);
    if m1 == 1 && m2 == 1 {
        // V ⊗ Λ²V = (1,1) ⊕ Λ³V; keep the kernel of the wedge map.
        let mut wedge = CMat::zeros(1, 9);
        const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
        for i in 0..3 {
            for (p, &(j, k)) in PAIRS.iter().enumerate() {
                wedge[(0, i * 3 + p)] = Complex64::new(perm_sign(i, j, k), 0.0);
            }
        }
        return orthonormal_kernel(&wedge);
    }
    prod
}

fn perm_sign(i: usize, j: usize, k: usize) -> f64 {
    if i == j || j == k || i == k {
        return 0.0;
    }
    let inv = (i > j) as u32 + (i > k) as u32 + (j > k) as u32;
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn orthonormal_kernel(a: &CMat) -> CMat {
    let n = a.ncols();
    let mut basis: Vec<nalgebra::DVector<Complex64>> = a.row_iter().map(|r| r.adjoint().into_owned()).collect();
    let rank = basis.len();
    for e in 0..n {
        let mut v = nalgebra::DVector::from_element(n, Complex64::new(0.0, 0.0));
        v[e] = Complex64::new(1.0, 0.0);
        for b in &basis {
            let p = b.dotc(&v) / b.dotc(b);
            v -= b * p;
        }
        if v.norm() > 1e-8 {
            let nv = v.norm();
            basis.push(v / Complex64::new(nv, 0.0));
        }
    }
    CMat::from_columns(&basis[rank..])
}

/// Metadata of the rule a coefficient set was computed with.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureMeta {
    pub rule: RuleSpec,
    /// Largest coefficient shift seen when doubling one axis at a time.
    pub richardson_shift: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct IrrepBlock {
    pub irrep: Irrep,
    /// `a^{ij}` as a `dim × dim` matrix.
    pub coeffs: CMat,
}

#[derive(Clone, Debug)]
pub struct FourierCoefficientSet {
    pub group: GroupKind,
    pub lambda: f64,
    pub blocks: Vec<IrrepBlock>,
    pub quadrature: QuadratureMeta,
}

impl FourierCoefficientSet {
    pub fn block(&self, label: IrrepLabel) -> Option<&IrrepBlock> {
        self.blocks.iter().find(|b| b.irrep.label == label)
    }

    /// Partial Peter–Weyl sum `Σ_ρ √d tr(a_ρ ρ(γ)) = Σ_ρ √d Σ_{ij} a^{ij} ρ^{ji}(γ)`.
    ///
    /// The transposed index is what makes synthesis invert the coefficient
    /// map: a pure `ρ^{12}` has its only coefficient at `a^{21}`.
    pub fn synthesize(&self, g: &CMat) -> Complex64 {
        self.blocks
            .iter()
            .map(|b| {
                let r = irrep_coeff(&b.irrep, g);
                (&b.coeffs * r).trace() * (b.irrep.dim as f64).sqrt()
            })
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.coeffs.iter()).fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Rows `(label, i, j, re, im)` with 1-based matrix indices.
    pub fn rows(&self) -> Vec<(String, usize, usize, f64, f64)> {
        let mut out = Vec::new();
        for b in &self.blocks {
            for i in 0..b.irrep.dim {
                for j in 0..b.irrep.dim {
                    let z = b.coeffs[(i, j)];
                    out.push((b.irrep.label.to_string(), i + 1, j + 1, z.re, z.im));
                }
            }
        }
        out
    }
}

/// A function on the chart, given both the raw parameters and the element.
pub trait ChartFunction: Fn(&[f64], &CMat) -> Complex64 + Sync {}
impl<T: Fn(&[f64], &CMat) -> Complex64 + Sync> ChartFunction for T {}

fn raw_coefficients(f: &dyn ChartFunction, chart: &GroupChart, irreps: &[Irrep], spec: &RuleSpec) -> Result<Vec<CMat>, HarmonicsError> {
    for ir in irreps {
        if ir.group() != chart.group {
            return Err(HarmonicsError::GroupMismatch { irrep: ir.group(), chart: chart.group });
        }
    }
    let rule = chart.rule(spec)?;
    let sizes: Vec<usize> = irreps.iter().map(|i| i.dim * i.dim).collect();
    let n_out: usize = sizes.iter().sum();
    let sums = chart.integrate(&rule, n_out, |p, g, out| {
        let fv = f(p, g);
        let mut off = 0;
        for ir in irreps {
            let r = irrep_coeff(ir, g);
            let d = ir.dim;
            // a^{ij} integrates f · conj(ρ^{ji}).
            for i in 0..d {
                for j in 0..d {
                    out[off + i * d + j] = fv * r[(j, i)].conj();
                }
            }
            off += d * d;
        }
    });
    let vol = chart.volume();
    let mut off = 0;
    Ok(irreps
        .iter()
        .map(|ir| {
            let d = ir.dim;
            let scale = (d as f64).sqrt() / vol;
            let m = CMat::from_fn(d, d, |i, j| sums[off + i * d + j] * scale);
            off += d * d;
            m
        })
        .collect())
}

fn max_shift(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).iter().fold(0.0f64, |m, z| m.max(z.norm()))).fold(0.0, f64::max)
}

/// Largest shift over all axes when each axis's node count is doubled in turn.
fn richardson<T>(spec: &RuleSpec, base: &T, eval: impl Fn(&RuleSpec) -> Result<T, HarmonicsError>, diff: impl Fn(&T, &T) -> f64) -> Result<(usize, f64), HarmonicsError> {
    let mut worst = (0, 0.0);
    for axis in 0..spec.axes.len() {
        let refined = eval(&spec.doubled(axis))?;
        let s = diff(base, &refined);
        if s > worst.1 {
            worst = (axis, s);
        }
    }
    Ok(worst)
}

/// Peter–Weyl coefficients of `f` for each irrep.
///
/// With `tolerance = Some(t)` every axis is refined once and the largest
/// coefficient shift must stay below `t`.
pub fn fourier_coefficients(
    f: &dyn ChartFunction,
    chart: &GroupChart,
    irreps: &[Irrep],
    spec: &RuleSpec,
    tolerance: Option<f64>,
) -> Result<FourierCoefficientSet, HarmonicsError> {
    let base = raw_coefficients(f, chart, irreps, spec)?;
    let shift = match tolerance {
        None => None,
        Some(tol) => {
            let (axis, s) = richardson(spec, &base, |r| raw_coefficients(f, chart, irreps, r), |a, b| max_shift(a, b))?;
            if s > tol {
                return Err(HarmonicsError::QuadratureUnderresolved { axis, shift: s, tol });
            }
            Some(s)
        }
    };
    Ok(FourierCoefficientSet {
        group: chart.group,
        lambda: chart.lambda,
        blocks: irreps.iter().cloned().zip(base).map(|(irrep, coeffs)| IrrepBlock { irrep, coeffs }).collect(),
        quadrature: QuadratureMeta { rule: spec.clone(), richardson_shift: shift },
    })
}

/// Gram matrix of `{√d ρ^{ij}}` under `Vol⁻¹ ∫ f₁ conj(f₂) dV`.
#[derive(Clone, Debug)]
pub struct GramReport {
    pub gram: CMat,
    /// Max-entry deviation from the identity.
    pub deviation: f64,
    pub richardson_shift: Option<f64>,
}

fn raw_gram(irreps: &[Irrep], chart: &GroupChart, spec: &RuleSpec) -> Result<CMat, HarmonicsError> {
    for ir in irreps {
        if ir.group() != chart.group {
            return Err(HarmonicsError::GroupMismatch { irrep: ir.group(), chart: chart.group });
        }
    }
    let rule = chart.rule(spec)?;
    let total: usize = irreps.iter().map(|i| i.dim * i.dim).sum();
    let sums = chart.integrate(&rule, total * total, |_, g, out| {
        let mut vals = Vec::with_capacity(total);
        for ir in irreps {
            let r = irrep_coeff(ir, g);
            let s = (ir.dim as f64).sqrt();
            vals.extend(r.transpose().iter().map(|z| z * s));
        }
        for a in 0..total {
            for b in 0..total {
                out[a * total + b] = vals[a] * vals[b].conj();
            }
        }
    });
    let vol = chart.volume();
    Ok(CMat::from_fn(total, total, |a, b| sums[a * total + b] / vol))
}

pub fn orthonormality_gram(irreps: &[Irrep], chart: &GroupChart, spec: &RuleSpec, tolerance: Option<f64>) -> Result<GramReport, HarmonicsError> {
    let gram = raw_gram(irreps, chart, spec)?;
    let n = gram.nrows();
    let deviation = (&gram - CMat::identity(n, n)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let richardson_shift = match tolerance {
        None => None,
        Some(tol) => {
            let (axis, s) = richardson(spec, &gram, |r| raw_gram(irreps, chart, r), |a, b| max_shift(std::slice::from_ref(a), std::slice::from_ref(b)))?;
            if s > tol {
                return Err(HarmonicsError::QuadratureUnderresolved { axis, shift: s, tol });
            }
            Some(s)
        }
    };
    Ok(GramReport { gram, deviation, richardson_shift })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayRow {
    pub lambda: f64,
    pub max_abs: f64,
    /// Largest coefficient shift under one-axis refinement.
    pub noise_floor: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayTable {
    pub irrep: String,
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of `log max_abs` against `log λ`.
    pub fitted_exponent: f64,
}

impl DecayTable {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].max_abs < w[0].max_abs)
    }
}

/// Coefficient magnitudes of a fixed chart function on `su3_chart(λ)`.
///
/// `f` receives the raw chart parameters `(θ¹, θ², θ³, φ¹, …, φ⁵)`, so the
/// same `f` is integrated over the shrinking φ-box at every λ. `rule_for`
/// picks the rule per chart. The Richardson shift is always computed and
/// reported as the noise floor; `tolerance` additionally turns it into an error.
pub fn decay_scan(
    f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
    irrep: &Irrep,
    lambdas: &[f64],
    rule_for: &dyn Fn(&GroupChart) -> RuleSpec,
    tolerance: Option<f64>,
) -> Result<DecayTable, HarmonicsError> {
    if irrep.is_trivial() || irrep.group() != GroupKind::Su3 {
        return Err(HarmonicsError::UnsupportedLabel(format!("decay scan needs a non-trivial SU(3) irrep, got {}", irrep.label)));
    }
    let g = |p: &[f64], _: &CMat| f(p);
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let chart = su3_chart(lambda)?;
        let spec = rule_for(&chart);
        let set = fourier_coefficients(&g, &chart, std::slice::from_ref(irrep), &spec, Some(tolerance.unwrap_or(f64::INFINITY)))?;
        rows.push(DecayRow {
            lambda,
            max_abs: set.max_abs(),
            noise_floor: set.quadrature.richardson_shift.unwrap_or(0.0),
        });
    }
    let fitted_exponent = loglog_slope(&rows);
    Ok(DecayTable { irrep: irrep.label.to_string(), rows, fitted_exponent })
}

fn loglog_slope(rows: &[DecayRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.max_abs > 0.0).map(|r| (r.lambda.ln(), r.max_abs.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_origin() {
        let c = su3_chart(3.0).unwrap();
        let g = c.embed(&[0.0; 8]);
        assert!((g - CMat::identity(3, 3)).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn phase_box_at_unit_lambda() {
        let c = su3_chart(1.0).unwrap();
        assert!((c.param_box[7].1 - 2.0 * PI).abs() < 1e-15);
        assert!(su3_chart(0.0).is_err());
    }

    #[test]
    fn circle_volume() {
        assert!((circle_chart(2.0).unwrap().volume() - PI).abs() < 1e-15);
    }

    #[test]
    fn irrep_dims() {
        for ((a, b), d) in [((0, 0), 1), ((1, 0), 3), ((0, 1), 3), ((2, 0), 6), ((0, 2), 6), ((1, 1), 8)] {
            assert_eq!(Irrep::new(IrrepLabel::Su3(a, b)).unwrap().dim, d);
        }
        for (n, d) in [(0, 1), (1, 2), (2, 3), (4, 5)] {
            assert_eq!(Irrep::new(IrrepLabel::Su2(n)).unwrap().dim, d);
        }
        assert!(Irrep::new(IrrepLabel::Su3(2, 1)).is_err());
    }

    #[test]
    fn loglog_slope_of_power_law() {
        let rows: Vec<DecayRow> =
            [1.0, 10.0, 100.0].iter().map(|&l: &f64| DecayRow { lambda: l, max_abs: l.powf(-0.5), noise_floor: 0.0 }).collect();
        assert!((loglog_slope(&rows) + 0.5).abs() < 1e-12);
    }
}
