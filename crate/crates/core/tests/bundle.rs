//! Hopf fibration expansion, reduction and section errors; squashed G₂ metric.

use acs_core::bundle_reduction::*;
use acs_core::lie_core::{assemble_j, build_algebra, build_samelson, embed_su3_in_g2, standard_rotation};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn random_base(n: usize, seed: u64) -> Vec<BasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| BasePoint::Finite(C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))).collect()
}

/// Plain DFT along the fiber written out in ambient coordinates.
fn dft_oracle(a: C64, k: i64, lambda: f64, nodes: usize) -> C64 {
    let r = lambda * (1.0 + a.norm_sqr()).sqrt();
    let mut s = C64::new(0.0, 0.0);
    for m in 0..nodes {
        let theta = 2.0 * PI * m as f64 / nodes as f64;
        let u = C64::from_polar(1.0, theta) / r;
        s += ((u).exp() + (a * u).exp()) * C64::from_polar(1.0, -(k as f64) * theta);
    }
    s / nodes as f64
}

#[test]
fn fiber_circumference_and_volume() {
    let b = hopf_bundle(2.0).unwrap();
    assert!((b.fiber_volume() - PI).abs() < 1e-12);
    for p in random_base(5, 1).into_iter().chain([BasePoint::Infinity]) {
        assert!((b.fiber_circumference(&p, 256) - PI).abs() < 1e-10);
    }
    assert!(hopf_bundle(0.0).is_err());
    assert!(hopf_bundle(f64::NAN).is_err());
}

#[test]
fn fiber_point_over_origin() {
    let lambda = 3.0;
    let b = hopf_bundle(lambda).unwrap();
    let x = b.fiber_point(&BasePoint::Finite(C64::new(0.0, 0.0)), BaseChart::A, 0.0).unwrap();
    assert!((x[0] - C64::new(1.0 / lambda, 0.0)).norm() < 1e-15);
    assert!(x[1].norm() < 1e-15);
    let inf = b.fiber_point(&BasePoint::Infinity, BaseChart::B, 0.0).unwrap();
    assert!(inf[0].norm() < 1e-15 && (inf[1] - 1.0 / lambda).norm() < 1e-15);
    assert!(b.fiber_point(&BasePoint::Infinity, BaseChart::A, 0.0).is_none());
}

#[test]
fn projection_inverts_fiber_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b = hopf_bundle(5.0).unwrap();
    for p in random_base(50, 2) {
        let t = rng.gen_range(0.0..b.fiber_volume());
        for chart in [BaseChart::A, BaseChart::B] {
            let x = b.fiber_point(&p, chart, t).unwrap();
            assert!(b.sphere_residual(x).abs() < 1e-14);
            assert!(b.projection(x).chordal_distance(&p) < 1e-12);
        }
    }
}

#[test]
fn hopf_modes_match_closed_form_and_dft() {
    let base = random_base(12, 3);
    let field = hopf_exponential_field(base.clone());
    let ks: Vec<i64> = (-2..=8).collect();
    for lambda in [2.0, 10.0, 100.0] {
        let bundle = hopf_bundle(lambda).unwrap();
        let modes = fiber_fourier_modes(&field, &bundle, &ks, Some(1e-10)).unwrap();
        for (i, p) in base.iter().enumerate() {
            let BasePoint::Finite(a) = p else { unreachable!() };
            for (ki, &k) in ks.iter().enumerate() {
                let got = modes.coeffs[i][ki];
                let closed = hopf_coefficient(p, BaseChart::A, k, lambda).unwrap();
                assert!((got - closed).norm() < 1e-12, "k={k} lambda={lambda} {got} {closed}");
                assert!((got - dft_oracle(*a, k, lambda, 64)).norm() < 1e-13);
            }
        }
    }
}

#[test]
fn chart_change_rotates_modes_by_phase() {
    let base = random_base(8, 4);
    let field = hopf_exponential_field(base.clone());
    let bundle = hopf_bundle(4.0).unwrap();
    let ks = [0, 1, 2, 3];
    let ma = fiber_fourier_modes(&field, &bundle, &ks, None).unwrap();
    let mb = fiber_fourier_modes(&field.clone().with_trivialization(BaseChart::B), &bundle, &ks, None).unwrap();
    for (i, p) in base.iter().enumerate() {
        let BasePoint::Finite(a) = p else { unreachable!() };
        let phase = C64::new(a.norm(), 0.0) / a;
        for (ki, &k) in ks.iter().enumerate() {
            assert!((mb.coeffs[i][ki] - ma.coeffs[i][ki] * phase.powi(k as i32)).norm() < 1e-13);
        }
    }
}

#[test]
fn infinity_modes_in_chart_b() {
    let field = hopf_exponential_field(vec![BasePoint::Infinity]);
    let bundle = hopf_bundle(3.0).unwrap();
    let modes = fiber_fourier_modes(&field, &bundle, &[0, 1, 2, 3], None).unwrap();
    let expected = [2.0, 1.0 / 3.0, 1.0 / 18.0, 1.0 / 162.0];
    for (c, e) in modes.coeffs[0].iter().zip(expected) {
        assert!((c - e).norm() < 1e-14);
    }
}

#[test]
fn constant_and_pure_modes() {
    let base = random_base(6, 5);
    let bundle = hopf_bundle(7.0).unwrap();
    let ks: Vec<i64> = (-4..=4).collect();
    let c = C64::new(0.3, -1.2);
    let modes = fiber_fourier_modes(&BundleField::constant(c, base.clone()), &bundle, &ks, None).unwrap();
    for row in &modes.coeffs {
        for (k, z) in ks.iter().zip(row) {
            let want = if *k == 0 { c } else { C64::new(0.0, 0.0) };
            assert!((z - want).norm() < 1e-14);
        }
    }
    // z/|z| = e^{iλt} in chart A.
    let pure = BundleField::new(Arc::new(|z: C64, _| (z / z.norm()).powi(3)), base);
    let modes = fiber_fourier_modes(&pure, &bundle, &ks, None).unwrap();
    for row in &modes.coeffs {
        for (k, z) in ks.iter().zip(row) {
            let want = if *k == 3 { 1.0 } else { 0.0 };
            assert!((z - want).norm() < 1e-13, "k={k} {z}");
        }
    }
}

#[test]
fn underresolved_fiber_rule_is_reported() {
    let field = BundleField::new(Arc::new(|z: C64, _| (z / z.norm()).powi(24)), random_base(2, 6)).with_fiber_nodes(16);
    let bundle = hopf_bundle(2.0).unwrap();
    let err = fiber_fourier_modes(&field, &bundle, &[8], Some(1e-8)).unwrap_err();
    assert!(matches!(err, BundleError::QuadratureUnderresolved { .. }), "{err:?}");
}

#[test]
fn periodicity_jump_is_round_off() {
    let field = hopf_exponential_field(random_base(20, 8));
    for lambda in [2.0, 100.0] {
        assert!(field.periodicity_jump(&hopf_bundle(lambda).unwrap()) < 1e-8);
    }
}

#[test]
fn reduction_of_exponential_is_two() {
    let mut base = random_base(20, 9);
    base.push(BasePoint::Infinity);
    let field = hopf_exponential_field(base);
    let res = reduce(&field, &[2.0, 10.0, 100.0], 4, Some(1e-10)).unwrap();
    assert!(res.deviation_from(C64::new(2.0, 0.0)) < 1e-8);
    assert_eq!(res.limit_lambda, 100.0);
    assert!(res.modes_decreasing(1e-13));
    // sup_a |A_k| is the same at every λ up to λ^{-k}.
    for k in 1..=4i64 {
        let n = |row: &ReductionRow| row.mode_norms.iter().find(|m| m.0 == k).unwrap().1;
        let ratio = n(&res.rows[0]) / n(&res.rows[1]);
        assert!((ratio / 5f64.powi(k as i32) - 1.0).abs() < 1e-9, "k={k} ratio={ratio}");
    }
    assert!(res.ground_spread().iter().all(|s| *s < 1e-12));
}

#[test]
fn reduction_of_base_function_is_itself() {
    let base = random_base(10, 10);
    let field = BundleField::new(Arc::new(|z: C64, v: C64| (v / z).sin()), base.clone());
    let res = reduce(&field, &[2.0, 50.0], 3, None).unwrap();
    for (p, g) in base.iter().zip(&res.ground_mode) {
        let BasePoint::Finite(a) = p else { unreachable!() };
        assert!((g - a.sin()).norm() < 1e-13);
    }
    assert!(res.rows.iter().all(|r| r.mode_norms.iter().all(|m| m.1 < 1e-13)));
}

#[test]
fn gauge_change_scales_every_mode() {
    let base = random_base(8, 11);
    let field = hopf_exponential_field(base.clone());
    let gauge = |p: BasePoint| match p {
        BasePoint::Finite(a) => C64::from_polar(1.0, a.re - 0.5 * a.im),
        BasePoint::Infinity => C64::new(1.0, 0.0),
    };
    let gauged = field.regauged(Arc::new(gauge));
    let bundle = hopf_bundle(6.0).unwrap();
    let ks = [-1, 0, 1, 2, 3];
    let m0 = fiber_fourier_modes(&field, &bundle, &ks, None).unwrap();
    let m1 = fiber_fourier_modes(&gauged, &bundle, &ks, None).unwrap();
    for (i, p) in base.iter().enumerate() {
        for ki in 0..ks.len() {
            assert!((m1.coeffs[i][ki] - gauge(*p) * m0.coeffs[i][ki]).norm() < 1e-13);
        }
    }
}

/// Grid maximization of the same sup with finite-difference derivatives.
fn constant_oracle() -> f64 {
    let g = |k: i32, a: C64| (C64::new(1.0, 0.0) + a.powi(k)) / (1.0 + a.norm_sqr()).powf(0.5 * k as f64);
    let mut best: f64 = 0.0;
    let h = 1e-6;
    let n = 401;
    for k in 1..=10 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        for i in 0..n {
            for j in 0..n {
                let a = C64::new(-4.0 + 8.0 * i as f64 / (n - 1) as f64, -4.0 + 8.0 * j as f64 / (n - 1) as f64);
                let fx = (g(k, a + h) - g(k, a - h)) / (2.0 * h);
                let fy = (g(k, a + C64::new(0.0, h)) - g(k, a - C64::new(0.0, h))) / (2.0 * h);
                let i_ = C64::new(0.0, 1.0);
                let v = g(k, a).norm() + (0.5 * (fx - i_ * fy)).norm() + (0.5 * (fx + i_ * fy)).norm();
                best = best.max(v / fact);
            }
        }
    }
    best
}

#[test]
fn hopf_constant_matches_grid_oracle() {
    let c = hopf_constant(12, 6.0, 241);
    let oracle = constant_oracle();
    assert!(c.value >= oracle - 1e-8, "{} < {oracle}", c.value);
    assert!(c.value - oracle < 1e-3, "{} vs {oracle}", c.value);
    assert_eq!(c.argmax_k, 1);
}

#[test]
fn section_projects_back_and_is_bounded() {
    let s = LocalSection::hopf(0.3);
    let (pts, _) = BaseGrid::new(3.0, 21).points();
    for lambda in [2.0, 100.0] {
        let b = hopf_bundle(lambda).unwrap();
        assert!(s.projection_residual(&b, &pts) < 1e-10);
        let d = s.derivative_bound(&b, &pts);
        assert!(d.is_finite() && d > 0.0);
    }
    assert!(s.map(&hopf_bundle(2.0).unwrap(), &BasePoint::Infinity).is_none());
}

#[test]
fn section_error_within_geometric_bound() {
    let grid = BaseGrid::new(3.0, 41);
    let field = BundleField::on_grid(Arc::new(|z: C64, v: C64| z.exp() + v.exp()), &grid);
    let schedule = [2.0, 10.0, 100.0];
    let res = reduce(&field, &schedule, 4, Some(1e-10)).unwrap();
    let rows = section_pullback_error(&LocalSection::hopf(0.7), &field, &res, &schedule).unwrap();
    let c = hopf_constant(12, 6.0, 241);
    assert!((c.bound(2.0) - c.value).abs() < 1e-12);
    for r in &rows {
        assert!(r.linf1 <= c.bound(r.lambda), "lambda={} {} > {}", r.lambda, r.linf1, c.bound(r.lambda));
        assert!(r.linf <= r.linf1);
    }
    assert!(rows.windows(2).all(|w| w[1].linf1 < w[0].linf1 && w[1].linf < w[0].linf));
}

#[test]
fn fiber_independent_field_has_zero_section_error() {
    let grid = BaseGrid::new(2.0, 15);
    let field = BundleField::on_grid(Arc::new(|z: C64, v: C64| (v / z) * (v / z).conj() + 1.0), &grid);
    let schedule = [2.0, 10.0, 100.0];
    let res = reduce(&field, &schedule, 2, None).unwrap();
    for r in section_pullback_error(&LocalSection::hopf(1.1), &field, &res, &schedule).unwrap() {
        assert!(r.linf < 1e-12 && r.linf1 < 1e-6, "{r:?}");
    }
}

#[test]
fn unbounded_section_is_rejected() {
    // Chart B section is singular at a = 0, which the grid contains.
    let grid = BaseGrid::new(2.0, 5);
    let field = hopf_exponential_field(grid.points().0);
    let res = reduce(&field, &[2.0], 1, None).unwrap();
    let s = LocalSection { t0: 0.0, chart: BaseChart::B, singular_set: vec![] };
    let err = section_pullback_error(&s, &field, &res, &[2.0]).unwrap_err();
    assert!(matches!(err, BundleError::SectionUnbounded(_)), "{err:?}");
}

#[test]
fn squashed_metric_is_positive_and_scales() {
    for lambda in [1.0, 10.0, 1e4, 1e-3] {
        let m = squashed_metric(lambda).unwrap();
        assert!(m.min_eigenvalue() > 0.0, "lambda={lambda}");
        assert_eq!(m.off_block_norm(), 0.0);
        let raw = m.raw_gram();
        assert!((&raw - raw.transpose()).amax() == 0.0);
        assert!((m.fiber_volume_ratio() * lambda - 1.0).abs() < 1e-12);
    }
    let r = squashed_metric(16.0).unwrap().vertical_determinant() / squashed_metric(1.0).unwrap().vertical_determinant();
    assert!((r - 16f64.powi(-2)).abs() < 1e-9 * 16f64.powi(-2));
    assert_eq!(COFRAME_LABELS.len(), 14);
    assert!(squashed_metric(-1.0).is_err());
}

#[test]
fn squashed_metric_min_eigenvalue_oracle() {
    // At λ = 1 the raw Gram has a 2×2 block per (σ_{ij}, σ_k) pair:
    // [[1/3 + 3, −2/3], [−2/3, 4/3]], whose smaller eigenvalue is the minimum.
    let m = squashed_metric(1.0).unwrap();
    let tr: f64 = 10.0 / 3.0 + 4.0 / 3.0;
    let det: f64 = (10.0 / 3.0) * (4.0 / 3.0) - 4.0 / 9.0;
    let pair_min = 0.5 * (tr - (tr * tr - 4.0 * det).sqrt());
    assert!((m.min_eigenvalue() - pair_min.min(2.0)).abs() < 1e-12, "{}", m.min_eigenvalue());
}

#[test]
fn g2_borel_vacuum_integrand_vanishes() {
    let g2 = build_algebra("g2").unwrap();
    let emb = embed_su3_in_g2(&g2).unwrap();
    let sam = build_samelson(&g2, &standard_rotation(2), &[-1; 6]).unwrap();
    let rep = g2_reduction_check(&sam.j, &emb, &[1.0, 10.0, 1e4], 1.0).unwrap();
    for r in &rep.rows {
        assert!(r.integrand < 1e-10, "{r:?}");
        assert!(r.orthogonality_residual < 1e-12);
        assert!(r.min_eigenvalue > 0.0);
        assert!((r.vertical_det_ratio * r.lambda * r.lambda - 1.0).abs() < 1e-9);
    }
}

#[test]
fn g2_non_integrable_signs_have_positive_integrand() {
    let g2 = build_algebra("g2").unwrap();
    let emb = embed_su3_in_g2(&g2).unwrap();
    let j0 = standard_rotation(2);
    let mut positive = 0;
    for mask in 0..64u32 {
        let signs: Vec<i8> = (0..6).map(|r| if mask >> r & 1 == 1 { 1 } else { -1 }).collect();
        let j = assemble_j(&g2, &j0, &signs).unwrap();
        let rep = g2_reduction_check(&j, &emb, &[1.0, 100.0], 1.0).unwrap();
        let horizontal_flat = acs_core::lie_core::nijenhuis_at_identity(&g2, &j).unwrap();
        let m = &emb.complement_indices;
        let leak = m.iter().flat_map(|&a| m.iter().flat_map(move |&b| m.iter().map(move |&c| (a, b, c))))
            .map(|(a, b, c)| horizontal_flat.get(a, b, c).abs())
            .fold(0.0, f64::max);
        assert_eq!(rep.max_integrand() > 1e-6, leak > 1e-12, "{signs:?}");
        if rep.max_integrand() > 1e-6 {
            positive += 1;
        }
    }
    assert!(positive > 0);
}

#[test]
fn g2_mixing_structure_is_not_block_diagonal() {
    let g2 = build_algebra("g2").unwrap();
    let emb = embed_su3_in_g2(&g2).unwrap();
    let sam = build_samelson(&g2, &standard_rotation(2), &[-1; 6]).unwrap();
    let (s, m) = (emb.sub_indices[2], emb.complement_indices[0]);
    let mut rot = DMatrix::identity(14, 14);
    let (c, sn) = (0.3f64.cos(), 0.3f64.sin());
    rot[(s, s)] = c;
    rot[(m, m)] = c;
    rot[(s, m)] = -sn;
    rot[(m, s)] = sn;
    let j = rot.transpose() * &sam.j * &rot;
    let err = g2_reduction_check(&j, &emb, &[1.0], 1.0).unwrap_err();
    assert!(matches!(err, BundleError::NotBlockDiagonal(_)));
}
