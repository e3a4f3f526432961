use acs_core::group_harmonics::*;
use acs_core::quadrature::{AxisKind, RuleSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_point(chart: &GroupChart, rng: &mut ChaCha8Rng) -> Vec<f64> {
    chart.param_box.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect()
}

fn max_dev_from_identity(m: &CMat) -> f64 {
    (m - CMat::identity(m.nrows(), m.ncols())).iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

#[test]
fn su3_chart_is_unitary_with_unit_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &lambda in &[1.0, 8.0, 1e4] {
        let chart = su3_chart(lambda).unwrap();
        for _ in 0..1000 {
            let g = chart.embed(&random_point(&chart, &mut rng));
            assert!(max_dev_from_identity(&(g.adjoint() * &g)) < 1e-10);
            assert!((g.determinant() - c(1.0, 0.0)).norm() < 1e-10);
        }
    }
}

#[test]
fn theta_factor_integrals() {
    // 1/4, 1/2, 1/2 for sin cos³, sin cos, sin cos over [0, π/2].
    let rule = RuleSpec::new(vec![(AxisKind::GaussLegendre, 10)]).on_box(&[(0.0, PI / 2.0)]);
    let ax = &rule.axes[0];
    let q = |f: &dyn Fn(f64) -> f64| ax.nodes.iter().zip(&ax.weights).map(|(x, w)| w * f(*x)).sum::<f64>();
    assert!((q(&|t| t.sin() * t.cos().powi(3)) - 0.25).abs() < 1e-14);
    assert!((q(&|t| t.sin() * t.cos()) - 0.5).abs() < 1e-14);
}

#[test]
fn haar_volume_is_inverse_lambda() {
    for &lambda in &[1.0, 8.0, 100.0] {
        let chart = su3_chart(lambda).unwrap();
        let v = chart.quadrature_volume(&chart.default_rule(10, 1)).unwrap();
        assert!((v - 1.0 / lambda).abs() < 1e-6 / lambda.max(1.0), "{lambda}: {v}");
    }
    let v8 = su3_chart(8.0).unwrap();
    assert!((v8.quadrature_volume(&v8.default_rule(10, 1)).unwrap() - 0.125).abs() < 1e-6);
    let s2 = su2_chart();
    assert!((s2.quadrature_volume(&s2.default_rule(12, 1)).unwrap() - 1.0).abs() < 1e-8);
    let c2 = circle_chart(2.0).unwrap();
    assert!((c2.quadrature_volume(&c2.default_rule(1, 4)).unwrap() - PI).abs() < 1e-14);
}

fn all_irreps() -> Vec<Irrep> {
    let mut v: Vec<Irrep> = [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1)]
        .iter()
        .map(|&(a, b)| Irrep::new(IrrepLabel::Su3(a, b)).unwrap())
        .collect();
    v.extend((0..=4).map(|n| Irrep::new(IrrepLabel::Su2(n)).unwrap()));
    v
}

#[test]
fn irreps_are_unitary_homomorphisms() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let su3 = su3_chart(1.0).unwrap();
    let su2 = su2_chart();
    for ir in all_irreps() {
        let chart = if ir.group() == GroupKind::Su3 { &su3 } else { &su2 };
        for _ in 0..20 {
            let g1 = chart.embed(&random_point(chart, &mut rng));
            let g2 = chart.embed(&random_point(chart, &mut rng));
            let r12 = irrep_coeff(&ir, &(&g1 * &g2));
            let prod = irrep_coeff(&ir, &g1) * irrep_coeff(&ir, &g2);
            assert!((&r12 - &prod).iter().all(|z| z.norm() < 1e-8), "{}", ir.label);
            let r = irrep_coeff(&ir, &g1);
            assert_eq!(r.nrows(), ir.dim);
            assert!(max_dev_from_identity(&(r.adjoint() * &r)) < 1e-10);
        }
        let id = CMat::identity(chart.matrix_size(), chart.matrix_size());
        assert!(max_dev_from_identity(&irrep_coeff(&ir, &id)) < 1e-14);
    }
}

#[test]
fn trivial_and_circle_characters() {
    let chart = su3_chart(2.0).unwrap();
    let g = chart.embed(&[0.3, 0.2, 0.1, 1.0, 2.0, 0.5, 0.1, 0.7]);
    assert_eq!(irrep_coeff(&Irrep::trivial(GroupKind::Su3), &g)[(0, 0)], c(1.0, 0.0));
    let circle = circle_chart(3.0).unwrap();
    let t = 0.37;
    let r = irrep_coeff(&Irrep::new(IrrepLabel::U1(4)).unwrap(), &circle.embed(&[t]));
    assert!((r[(0, 0)] - Complex64::from_polar(1.0, 3.0 * 4.0 * t)).norm() < 1e-14);
}

#[test]
fn antifundamental_is_hodge_conjugate_of_fundamental() {
    // Λ²g = S conj(g) Sᵀ with e₁∧e₂ ↦ e₃, e₁∧e₃ ↦ −e₂, e₂∧e₃ ↦ e₁.
    let s = CMat::from_row_slice(3, 3, &[c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.), c(-1., 0.), c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
    let chart = su3_chart(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let anti = Irrep::new(IrrepLabel::Su3(0, 1)).unwrap();
    for _ in 0..50 {
        let g = chart.embed(&random_point(&chart, &mut rng));
        let lhs = irrep_coeff(&anti, &g);
        let rhs = &s * g.map(|z| z.conj()) * s.transpose();
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
    }
}

#[test]
fn constant_function_has_only_ground_mode() {
    let chart = su3_chart(1.0).unwrap();
    let irreps = [Irrep::trivial(GroupKind::Su3), Irrep::new(IrrepLabel::Su3(1, 0)).unwrap()];
    let one = |_: &[f64], _: &CMat| c(1.0, 0.0);
    let set = fourier_coefficients(&one, &chart, &irreps, &chart.default_rule(10, 4), None).unwrap();
    assert!((set.blocks[0].coeffs[(0, 0)] - c(1.0, 0.0)).norm() < 1e-8);
    assert!(set.blocks[1].coeffs.iter().all(|z| z.norm() < 1e-8));
}

#[test]
fn matrix_element_has_schur_coefficient() {
    let chart = su3_chart(5.0).unwrap();
    let fund = Irrep::new(IrrepLabel::Su3(1, 0)).unwrap();
    let f = |_: &[f64], g: &CMat| g[(0, 0)];
    let set = fourier_coefficients(&f, &chart, std::slice::from_ref(&fund), &chart.default_rule(10, 4), Some(1e-6)).unwrap();
    let a = &set.blocks[0].coeffs;
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == 0 && j == 0 { 1.0 / 3f64.sqrt() } else { 0.0 };
            assert!((a[(i, j)] - c(expect, 0.0)).norm() < 1e-6, "{i}{j}");
        }
    }
    assert!(set.quadrature.richardson_shift.unwrap() < 1e-6);
}

#[test]
fn circle_single_mode() {
    let lambda = 3.0;
    let chart = circle_chart(lambda).unwrap();
    let irreps: Vec<Irrep> = (-2..=3).map(|k| Irrep::new(IrrepLabel::U1(k)).unwrap()).collect();
    let f = |p: &[f64], _: &CMat| Complex64::from_polar(1.0, lambda * p[0]);
    let set = fourier_coefficients(&f, &chart, &irreps, &chart.default_rule(1, 16), Some(1e-12)).unwrap();
    for b in &set.blocks {
        let expect = if b.irrep.label == IrrepLabel::U1(1) { 1.0 } else { 0.0 };
        assert!((b.coeffs[(0, 0)] - c(expect, 0.0)).norm() < 1e-13);
    }
}

#[test]
fn underresolved_quadrature_is_reported() {
    let chart = circle_chart(1.0).unwrap();
    let irreps = [Irrep::new(IrrepLabel::U1(0)).unwrap()];
    let f = |p: &[f64], _: &CMat| Complex64::from_polar(1.0, 3.0 * p[0]);
    let err = fourier_coefficients(&f, &chart, &irreps, &chart.default_rule(1, 3), Some(1e-8)).unwrap_err();
    assert!(matches!(err, HarmonicsError::QuadratureUnderresolved { .. }));
}

#[test]
fn su2_gram_is_identity() {
    let chart = su2_chart();
    let irreps: Vec<Irrep> = (0..=2).map(|n| Irrep::new(IrrepLabel::Su2(n)).unwrap()).collect();
    let rep = orthonormality_gram(&irreps, &chart, &chart.default_rule(12, 6), Some(1e-8)).unwrap();
    assert_eq!(rep.gram.nrows(), 1 + 4 + 9);
    assert!(rep.deviation < 1e-6, "{}", rep.deviation);
}

#[test]
fn single_trivial_gram() {
    let chart = su3_chart(7.0).unwrap();
    let rep = orthonormality_gram(&[Irrep::trivial(GroupKind::Su3)], &chart, &chart.default_rule(10, 1), None).unwrap();
    assert_eq!(rep.gram.shape(), (1, 1));
    assert!((rep.gram[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn peter_weyl_synthesis_reproduces_finite_combination() {
    let chart = su3_chart(1.0).unwrap();
    let fund = Irrep::new(IrrepLabel::Su3(1, 0)).unwrap();
    let anti = Irrep::new(IrrepLabel::Su3(0, 1)).unwrap();
    let irreps = [Irrep::trivial(GroupKind::Su3), fund.clone(), anti.clone()];
    let f = move |_: &[f64], g: &CMat| {
        let w = irrep_coeff(&anti, g);
        c(0.3, 0.0) + c(0.2, -0.1) * g[(0, 1)] + c(-0.4, 0.25) * w[(2, 0)]
    };
    let set = fourier_coefficients(&f, &chart, &irreps, &chart.default_rule(8, 5), None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let p = random_point(&chart, &mut rng);
        let g = chart.embed(&p);
        let err = (set.synthesize(&g) - f(&p, &g)).norm();
        assert!(err < 1e-6, "{err}");
    }
}

#[test]
fn real_function_coefficients_are_conjugate_across_dual_irreps() {
    let chart = su3_chart(1.0).unwrap();
    let irreps = [Irrep::new(IrrepLabel::Su3(1, 0)).unwrap(), Irrep::new(IrrepLabel::Su3(0, 1)).unwrap()];
    let f = |_: &[f64], g: &CMat| c((g[(0, 0)] + g[(1, 2)] * 0.5).re.exp(), 0.0);
    let set = fourier_coefficients(&f, &chart, &irreps, &chart.default_rule(10, 6), None).unwrap();
    let s = CMat::from_row_slice(3, 3, &[c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.), c(-1., 0.), c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
    let expect = &s * set.blocks[0].coeffs.map(|z| z.conj()) * s.transpose();
    assert!((&set.blocks[1].coeffs - expect).iter().all(|z| z.norm() < 1e-7));
}

#[test]
fn decay_scan_of_constant_vanishes() {
    let fund = Irrep::new(IrrepLabel::Su3(1, 0)).unwrap();
    let one = |_: &[f64]| c(1.0, 0.0);
    let table = decay_scan(&one, &fund, &[1.0, 100.0, 1e4], &|ch: &GroupChart| ch.default_rule(8, 3), Some(1e-8)).unwrap();
    assert!(table.rows.iter().all(|r| r.max_abs < 1e-8));
    assert!(decay_scan(&one, &Irrep::trivial(GroupKind::Su3), &[1.0], &|ch: &GroupChart| ch.default_rule(4, 1), None).is_err());
}
