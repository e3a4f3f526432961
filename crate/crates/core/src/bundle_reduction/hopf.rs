//! The Hopf fibration `S³ → CP¹` with fiber `U(1)` of volume `2π/λ`.
//!
//! Total space: `|z|² + |v|² = λ⁻²` in ℂ². Base charts: `a = v/z` (chart A)
//! and `b = z/v = 1/a` (chart B). The trivialization over chart A sends
//! `(a, t)` to `e^{iλt}(1, a)/(λ√(1+|a|²))`, over chart B it sends `(b, t)` to
//! `e^{iλt}(b, 1)/(λ√(1+|b|²))`. On the overlap they differ by the phase `ā/|a|`.

use super::{check_lambda, BundleError};
use crate::group_harmonics::{circle_chart, fourier_coefficients, CMat, GroupChart, GroupKind, Irrep, IrrepLabel};
use crate::quadrature::{AxisKind, RuleSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

type C64 = Complex64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A point of `CP¹ = ℂ ∪ {∞}` in the `a` coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BasePoint {
    Finite(C64),
    Infinity,
}

impl BasePoint {
    /// The point with chart-B coordinate `b`.
    pub fn from_b(b: C64) -> Self {
        if b == ZERO {
            BasePoint::Infinity
        } else {
            BasePoint::Finite(b.inv())
        }
    }

    /// Coordinate in the given chart, `None` outside its domain.
    pub fn coordinate(&self, chart: BaseChart) -> Option<C64> {
        match (self, chart) {
            (BasePoint::Finite(a), BaseChart::A) => Some(*a),
            (BasePoint::Finite(a), BaseChart::B) => (*a != ZERO).then(|| a.inv()),
            (BasePoint::Infinity, BaseChart::A) => None,
            (BasePoint::Infinity, BaseChart::B) => Some(ZERO),
        }
    }

    /// Chordal distance on the Riemann sphere, so `∞` is an ordinary point.
    pub fn chordal_distance(&self, other: &BasePoint) -> f64 {
        let lift = |p: &BasePoint| match p {
            BasePoint::Infinity => (0.0, 0.0, 1.0),
            BasePoint::Finite(a) => {
                let r2 = a.norm_sqr();
                (2.0 * a.re / (1.0 + r2), 2.0 * a.im / (1.0 + r2), (r2 - 1.0) / (r2 + 1.0))
            }
        };
        let (p, q) = (lift(self), lift(other));
        ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2) + (p.2 - q.2).powi(2)).sqrt()
    }
}

/// Local trivialization tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseChart {
    A,
    B,
}

impl BaseChart {
    /// This chart where it is defined, otherwise the other one.
    fn covering(self, p: &BasePoint) -> BaseChart {
        if p.coordinate(self).is_some() {
            self
        } else {
            match self {
                BaseChart::A => BaseChart::B,
                BaseChart::B => BaseChart::A,
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrincipalBundleSpec {
    pub lambda: f64,
    pub fiber_group: GroupKind,
    pub base_charts: Vec<BaseChart>,
}

pub fn hopf_bundle(lambda: f64) -> Result<PrincipalBundleSpec, BundleError> {
    check_lambda(lambda)?;
    Ok(PrincipalBundleSpec { lambda, fiber_group: GroupKind::U1, base_charts: vec![BaseChart::A, BaseChart::B] })
}

impl PrincipalBundleSpec {
    pub fn fiber_volume(&self) -> f64 {
        2.0 * PI / self.lambda
    }

    pub fn fiber_chart(&self) -> GroupChart {
        circle_chart(self.lambda).expect("lambda was validated")
    }

    /// Point over `p` at fiber parameter `t` in the given trivialization.
    pub fn fiber_point(&self, p: &BasePoint, chart: BaseChart, t: f64) -> Option<[C64; 2]> {
        let c = p.coordinate(chart)?;
        let scale = C64::from_polar(1.0 / (self.lambda * (1.0 + c.norm_sqr()).sqrt()), self.lambda * t);
        Some(match chart {
            BaseChart::A => [scale, c * scale],
            BaseChart::B => [c * scale, scale],
        })
    }

    pub fn projection(&self, x: [C64; 2]) -> BasePoint {
        hopf_projection(x)
    }

    /// `|z|² + |v|² − λ⁻²`.
    pub fn sphere_residual(&self, x: [C64; 2]) -> f64 {
        x[0].norm_sqr() + x[1].norm_sqr() - self.lambda.powi(-2)
    }

    /// Arc length of the fiber over `p` by trapezoid integration of the speed.
    pub fn fiber_circumference(&self, p: &BasePoint, nodes: usize) -> f64 {
        let chart = BaseChart::A.covering(p);
        let h = self.fiber_volume() / nodes as f64;
        (0..nodes)
            .map(|i| {
                let x = self.fiber_point(p, chart, i as f64 * h).expect("chart covers p");
                // d/dt of e^{iλt}·w is iλ times the point.
                self.lambda * (x[0].norm_sqr() + x[1].norm_sqr()).sqrt() * h
            })
            .sum()
    }
}

fn hopf_projection(x: [C64; 2]) -> BasePoint {
    if x[0] == ZERO {
        BasePoint::Infinity
    } else {
        BasePoint::Finite(x[1] / x[0])
    }
}

pub type AmbientFn = dyn Fn(C64, C64) -> C64 + Send + Sync;

/// A complex function on the total space, sampled over base points times
/// a fiber grid in a chosen trivialization.
///
/// The function is given on ℂ², so it can be re-sampled at every λ.
#[derive(Clone)]
pub struct BundleField {
    pub function: Arc<AmbientFn>,
    pub base: Vec<BasePoint>,
    /// Preferred trivialization; points outside its domain use the other chart.
    pub trivialization: BaseChart,
    pub fiber_nodes: usize,
    /// Base points where derivative norms are taken.
    pub interior: Vec<bool>,
}

impl std::fmt::Debug for BundleField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BundleField")
            .field("base", &self.base.len())
            .field("trivialization", &self.trivialization)
            .field("fiber_nodes", &self.fiber_nodes)
            .finish()
    }
}

impl BundleField {
    pub fn new(function: Arc<AmbientFn>, base: Vec<BasePoint>) -> Self {
        let interior = vec![true; base.len()];
        BundleField { function, base, trivialization: BaseChart::A, fiber_nodes: 64, interior }
    }

    pub fn on_grid(function: Arc<AmbientFn>, grid: &BaseGrid) -> Self {
        let (base, interior) = grid.points();
        BundleField { function, base, trivialization: BaseChart::A, fiber_nodes: 64, interior }
    }

    pub fn constant(c: C64, base: Vec<BasePoint>) -> Self {
        BundleField::new(Arc::new(move |_, _| c), base)
    }

    pub fn with_trivialization(mut self, chart: BaseChart) -> Self {
        self.trivialization = chart;
        self
    }

    pub fn with_fiber_nodes(mut self, n: usize) -> Self {
        self.fiber_nodes = n;
        self
    }

    pub fn chart_at(&self, p: &BasePoint) -> BaseChart {
        self.trivialization.covering(p)
    }

    pub fn eval(&self, x: [C64; 2]) -> C64 {
        (self.function)(x[0], x[1])
    }

    /// Values `[base][fiber node]` on the bundle's fiber grid.
    pub fn sample(&self, bundle: &PrincipalBundleSpec) -> Vec<Vec<C64>> {
        let h = bundle.fiber_volume() / self.fiber_nodes as f64;
        self.base
            .par_iter()
            .map(|p| {
                let chart = self.chart_at(p);
                (0..self.fiber_nodes)
                    .map(|i| self.eval(bundle.fiber_point(p, chart, i as f64 * h).expect("chart covers p")))
                    .collect()
            })
            .collect()
    }

    /// Largest jump `|F(t = 2π/λ) − F(t = 0)|` over the base.
    pub fn periodicity_jump(&self, bundle: &PrincipalBundleSpec) -> f64 {
        self.base
            .iter()
            .map(|p| {
                let chart = self.chart_at(p);
                let start = bundle.fiber_point(p, chart, 0.0).expect("chart covers p");
                let end = bundle.fiber_point(p, chart, bundle.fiber_volume()).expect("chart covers p");
                (self.eval(end) - self.eval(start)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `F' = g(π(·)) F`, a gauge change by a fiber-independent function.
    pub fn regauged(&self, gauge: Arc<dyn Fn(BasePoint) -> C64 + Send + Sync>) -> Self {
        let f = self.function.clone();
        BundleField {
            function: Arc::new(move |z, v| gauge(hopf_projection([z, v])) * f(z, v)),
            ..self.clone()
        }
    }

    /// Fiber average at one base point by the trapezoid rule.
    fn fiber_mean(&self, bundle: &PrincipalBundleSpec, p: &BasePoint) -> C64 {
        let chart = self.chart_at(p);
        let h = bundle.fiber_volume() / self.fiber_nodes as f64;
        let s: C64 = (0..self.fiber_nodes)
            .map(|i| self.eval(bundle.fiber_point(p, chart, i as f64 * h).expect("chart covers p")))
            .sum();
        s / self.fiber_nodes as f64
    }
}

/// `F(z, v) = e^z + e^v`.
pub fn hopf_exponential_field(base: Vec<BasePoint>) -> BundleField {
    BundleField::new(Arc::new(|z: C64, v: C64| z.exp() + v.exp()), base)
}

/// Closed-form mode `k` of `e^z + e^v` over `p` in the given trivialization:
/// `(1 + c^k) / (k! λ^k (1+|c|²)^{k/2})` with `c` the chart coordinate.
pub fn hopf_coefficient(p: &BasePoint, chart: BaseChart, k: i64, lambda: f64) -> Option<C64> {
    let c = p.coordinate(chart)?;
    if k < 0 {
        return Some(ZERO);
    }
    let k32 = k as i32;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    Some((C64::new(1.0, 0.0) + c.powi(k32)) / (fact * lambda.powi(k32) * (1.0 + c.norm_sqr()).powf(0.5 * k as f64)))
}

/// Fourier modes `e^{iλkt}` of a field along every fiber.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiberModes {
    pub lambda: f64,
    pub ks: Vec<i64>,
    pub base: Vec<BasePoint>,
    /// `coeffs[base][mode]`.
    pub coeffs: Vec<Vec<C64>>,
    /// `sup_base |A_k|` per mode.
    pub norms: Vec<f64>,
    /// Largest coefficient shift under fiber-rule doubling, when requested.
    pub richardson_shift: Option<f64>,
}

impl FiberModes {
    pub fn mode(&self, k: i64) -> Option<Vec<C64>> {
        let i = self.ks.iter().position(|x| *x == k)?;
        Some(self.coeffs.iter().map(|row| row[i]).collect())
    }

    pub fn norm(&self, k: i64) -> Option<f64> {
        self.ks.iter().position(|x| *x == k).map(|i| self.norms[i])
    }
}

/// Fiberwise Peter–Weyl coefficients of `field` for the U(1) labels `ks`.
pub fn fiber_fourier_modes(
    field: &BundleField,
    bundle: &PrincipalBundleSpec,
    ks: &[i64],
    tolerance: Option<f64>,
) -> Result<FiberModes, BundleError> {
    let chart = bundle.fiber_chart();
    let irreps: Vec<Irrep> = ks.iter().map(|&k| Irrep::new(IrrepLabel::U1(k))).collect::<Result<_, _>>()?;
    let spec = RuleSpec::new(vec![(AxisKind::Trapezoid, field.fiber_nodes)]);
    let per_point: Vec<(Vec<C64>, Option<f64>)> = field
        .base
        .par_iter()
        .map(|p| {
            let tchart = field.chart_at(p);
            let f = |t: &[f64], _: &CMat| field.eval(bundle.fiber_point(p, tchart, t[0]).expect("chart covers p"));
            let set = fourier_coefficients(&f, &chart, &irreps, &spec, tolerance)?;
            Ok((set.blocks.iter().map(|b| b.coeffs[(0, 0)]).collect(), set.quadrature.richardson_shift))
        })
        .collect::<Result<_, BundleError>>()?;
    let mut norms = vec![0.0f64; ks.len()];
    for (row, _) in &per_point {
        for (n, c) in norms.iter_mut().zip(row) {
            *n = n.max(c.norm());
        }
    }
    let richardson_shift = tolerance.map(|_| per_point.iter().filter_map(|r| r.1).fold(0.0, f64::max));
    Ok(FiberModes {
        lambda: bundle.lambda,
        ks: ks.to_vec(),
        base: field.base.clone(),
        coeffs: per_point.into_iter().map(|r| r.0).collect(),
        norms,
        richardson_shift,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionRow {
    pub lambda: f64,
    pub ground_mode: Vec<C64>,
    /// `(k, sup_base |A_k|)` for every non-trivial mode.
    pub mode_norms: Vec<(i64, f64)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionResult {
    pub base: Vec<BasePoint>,
    pub rows: Vec<ReductionRow>,
    /// Ground mode at the largest scheduled λ, reported as `Φ̃₊∞`.
    pub ground_mode: Vec<C64>,
    pub limit_lambda: f64,
}

impl ReductionResult {
    /// `sup_base |ground_λ − Φ̃₊∞|` per scheduled λ.
    pub fn ground_spread(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.ground_mode.iter().zip(&self.ground_mode).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
            .collect()
    }

    /// `sup_base |Φ̃₊∞ − c|`.
    pub fn deviation_from(&self, c: C64) -> f64 {
        self.ground_mode.iter().map(|z| (z - c).norm()).fold(0.0, f64::max)
    }

    /// Whether every non-trivial mode norm strictly decreases along the schedule
    /// (modes that are already at round-off level are skipped).
    pub fn modes_decreasing(&self, floor: f64) -> bool {
        self.rows.windows(2).all(|w| {
            w[0].mode_norms.iter().zip(&w[1].mode_norms).all(|(a, b)| a.1 <= floor || b.1 < a.1)
        })
    }
}

/// Re-samples the field on the Hopf bundle at every scheduled λ and extracts
/// the ground mode and the norms of the modes `1..=max_mode` (and their negatives).
pub fn reduce(field: &BundleField, schedule: &[f64], max_mode: i64, tolerance: Option<f64>) -> Result<ReductionResult, BundleError> {
    if schedule.is_empty() {
        return Err(BundleError::EmptySchedule);
    }
    let mut ks = vec![0];
    for k in 1..=max_mode {
        ks.extend([k, -k]);
    }
    let mut rows = Vec::with_capacity(schedule.len());
    for &lambda in schedule {
        let bundle = hopf_bundle(lambda)?;
        let modes = fiber_fourier_modes(field, &bundle, &ks, tolerance)?;
        rows.push(ReductionRow {
            lambda,
            ground_mode: modes.mode(0).expect("k = 0 is scheduled"),
            mode_norms: ks.iter().zip(&modes.norms).skip(1).map(|(k, n)| (*k, *n)).collect(),
        });
    }
    let (limit_lambda, ground_mode) = rows
        .iter()
        .max_by(|a, b| a.lambda.total_cmp(&b.lambda))
        .map(|r| (r.lambda, r.ground_mode.clone()))
        .expect("schedule is non-empty");
    Ok(ReductionResult { base: field.base.clone(), rows, ground_mode, limit_lambda })
}

/// Square grids in both base charts: `[−R, R]²` in `a` and the disk
/// `|b| ≤ 1/R` in `b`. Chart-B nodes within `exclusion_cells` grid cells of
/// `b = 0` are kept for sup norms but dropped from derivative norms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaseGrid {
    pub radius: f64,
    pub nodes: usize,
    pub exclusion_cells: f64,
}

impl BaseGrid {
    pub fn new(radius: f64, nodes: usize) -> Self {
        BaseGrid { radius, nodes, exclusion_cells: 3.0 }
    }

    /// Base points and the mask of points where derivative norms are taken.
    pub fn points(&self) -> (Vec<BasePoint>, Vec<bool>) {
        let n = self.nodes.max(2);
        let mut pts = Vec::new();
        let mut mask = Vec::new();
        let ha = 2.0 * self.radius / (n - 1) as f64;
        for i in 0..n {
            for j in 0..n {
                pts.push(BasePoint::Finite(C64::new(-self.radius + i as f64 * ha, -self.radius + j as f64 * ha)));
                mask.push(true);
            }
        }
        let rb = 1.0 / self.radius;
        let hb = 2.0 * rb / (n - 1) as f64;
        for i in 0..n {
            for j in 0..n {
                let b = C64::new(-rb + i as f64 * hb, -rb + j as f64 * hb);
                if b.norm() > rb {
                    continue;
                }
                pts.push(BasePoint::from_b(b));
                mask.push(b.norm() >= self.exclusion_cells * hb);
            }
        }
        (pts, mask)
    }
}

/// A section of the Hopf bundle at constant fiber phase `t₀` in one
/// trivialization, singular where that chart is undefined.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalSection {
    pub t0: f64,
    pub chart: BaseChart,
    pub singular_set: Vec<BasePoint>,
}

impl LocalSection {
    /// `s(a) = e^{iλt₀}(1, a)/(λ√(1+|a|²))`, singular at `∞`.
    pub fn hopf(t0: f64) -> Self {
        LocalSection { t0, chart: BaseChart::A, singular_set: vec![BasePoint::Infinity] }
    }

    pub fn is_singular(&self, p: &BasePoint) -> bool {
        self.singular_set.iter().any(|s| s == p)
    }

    pub fn map(&self, bundle: &PrincipalBundleSpec, p: &BasePoint) -> Option<[C64; 2]> {
        if self.is_singular(p) {
            return None;
        }
        bundle.fiber_point(p, self.chart, self.t0)
    }

    /// `sup |π(s(p)) − p|` in chordal distance over the regular points.
    pub fn projection_residual(&self, bundle: &PrincipalBundleSpec, points: &[BasePoint]) -> f64 {
        points
            .iter()
            .filter_map(|p| self.map(bundle, p).map(|x| bundle.projection(x).chordal_distance(p)))
            .fold(0.0, f64::max)
    }

    /// `sup (|∂s/∂a| + |∂s/∂ā|)` by central differences in the `a` coordinate.
    pub fn derivative_bound(&self, bundle: &PrincipalBundleSpec, points: &[BasePoint]) -> f64 {
        points
            .iter()
            .filter(|p| !self.is_singular(p))
            .filter_map(|p| match p {
                BasePoint::Finite(a) => {
                    // Undefined at an undeclared point: the bound diverges.
                    if self.map(bundle, p).is_none() {
                        return Some(f64::INFINITY);
                    }
                    let comp = |i: usize| move |c: C64| self.map(bundle, &BasePoint::Finite(c)).map(|x| x[i]);
                    let mut total = 0.0;
                    for i in 0..2 {
                        match wirtinger(&comp(i), *a) {
                            Some((d, db)) => total += (d.norm_sqr() + db.norm_sqr()).sqrt(),
                            None => return Some(f64::INFINITY),
                        }
                    }
                    Some(total)
                }
                BasePoint::Infinity => None,
            })
            .fold(0.0, |m: f64, x| if x.is_nan() { f64::NAN } else { m.max(x) })
    }
}

/// Central-difference Wirtinger derivatives `(∂f/∂a, ∂f/∂ā)`.
fn wirtinger(f: &dyn Fn(C64) -> Option<C64>, a: C64) -> Option<(C64, C64)> {
    let h = 1e-5 * (1.0 + a.norm());
    let fx = (f(a + h)? - f(a - h)?) / (2.0 * h);
    let fy = (f(a + C64::new(0.0, h))? - f(a - C64::new(0.0, h))?) / (2.0 * h);
    let i = C64::new(0.0, 1.0);
    Some(((fx - i * fy) * 0.5, (fx + i * fy) * 0.5))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PullbackRow {
    pub lambda: f64,
    /// `sup |s*Φ − Φ̃₊∞|` over regular base points.
    pub linf: f64,
    /// `sup (|h| + |∂h| + |∂̄h|)`, `h = s*Φ − Φ̃₊∞`, off the excluded disk.
    pub linf1: f64,
}

/// Largest admissible section derivative before the section counts as unbounded.
const SECTION_DERIVATIVE_CAP: f64 = 1e8;

/// Sup and sup-plus-derivative distance between `s*Φ` and the reduction.
///
/// Derivatives of the reduction at off-grid stencil points are fiber means of
/// `Φ` at the reduction's limiting λ.
pub fn section_pullback_error(
    s: &LocalSection,
    field: &BundleField,
    result: &ReductionResult,
    schedule: &[f64],
) -> Result<Vec<PullbackRow>, BundleError> {
    assert_eq!(field.base.len(), result.ground_mode.len(), "reduction was computed on another base grid");
    if schedule.is_empty() {
        return Err(BundleError::EmptySchedule);
    }
    let limit = hopf_bundle(result.limit_lambda)?;
    schedule
        .iter()
        .map(|&lambda| {
            let bundle = hopf_bundle(lambda)?;
            let bound = s.derivative_bound(&bundle, &field.base);
            if !bound.is_finite() || bound > SECTION_DERIVATIVE_CAP {
                return Err(BundleError::SectionUnbounded(bound));
            }
            let reduced = |c: C64| field.fiber_mean(&limit, &BasePoint::Finite(c));
            let h = |c: C64| s.map(&bundle, &BasePoint::Finite(c)).map(|x| field.eval(x) - reduced(c));
            let per_point: Vec<(f64, f64)> = field
                .base
                .par_iter()
                .zip(&result.ground_mode)
                .zip(&field.interior)
                .filter_map(|((p, g), interior)| {
                    let x = s.map(&bundle, p)?;
                    let v = (field.eval(x) - g).norm();
                    let with_d = match (p, interior) {
                        (BasePoint::Finite(a), true) => {
                            let (d, db) = wirtinger(&h, *a)?;
                            v + d.norm() + db.norm()
                        }
                        _ => 0.0,
                    };
                    Some((v, with_d))
                })
                .collect();
            Ok(PullbackRow {
                lambda,
                linf: per_point.iter().map(|r| r.0).fold(0.0, f64::max),
                linf1: per_point.iter().map(|r| r.1).fold(0.0, f64::max),
            })
        })
        .collect()
}

/// The constant `C = sup_{k ≥ 1, a} (|g_k| + |∂g_k| + |∂̄g_k|)/k!` with
/// `g_k(a) = (1 + a^k)/(1+|a|²)^{k/2}`, located by grid search and refined
/// by a shrinking pattern search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfConstant {
    pub value: f64,
    pub argmax_k: i64,
    pub argmax_a: C64,
}

impl HopfConstant {
    /// `C (1/(1 − λ⁻¹) − 1) = C/(λ − 1)`.
    pub fn bound(&self, lambda: f64) -> f64 {
        self.value * (1.0 / (1.0 - 1.0 / lambda) - 1.0)
    }
}

/// `(|g_k| + |∂g_k| + |∂̄g_k|)/k!` with exact Wirtinger derivatives.
fn hopf_term(k: i64, a: C64) -> f64 {
    let kf = k as f64;
    let k32 = k as i32;
    let r = 1.0 + a.norm_sqr();
    let num = C64::new(1.0, 0.0) + a.powi(k32);
    let den = r.powf(-0.5 * kf);
    let g = num * den;
    let ddr = -0.5 * kf * r.powf(-0.5 * kf - 1.0);
    let d = a.powi(k32 - 1) * (kf * den) + num * a.conj() * ddr;
    let db = num * a * ddr;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    (g.norm() + d.norm() + db.norm()) / fact
}

pub fn hopf_constant(max_k: i64, radius: f64, nodes: usize) -> HopfConstant {
    let h = 2.0 * radius / (nodes - 1) as f64;
    let mut best = HopfConstant { value: f64::NEG_INFINITY, argmax_k: 1, argmax_a: ZERO };
    for k in 1..=max_k {
        for i in 0..nodes {
            for j in 0..nodes {
                let a = C64::new(-radius + i as f64 * h, -radius + j as f64 * h);
                let v = hopf_term(k, a);
                if v > best.value {
                    best = HopfConstant { value: v, argmax_k: k, argmax_a: a };
                }
            }
        }
    }
    let mut step = h;
    while step > 1e-12 {
        let mut moved = false;
        for dir in [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
            let a = best.argmax_a + dir * step;
            let v = hopf_term(best.argmax_k, a);
            if v > best.value {
                best.value = v;
                best.argmax_a = a;
                moved = true;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    best
}
