//! Energies, vacuum residuals, gauge action and the minimizer.

use acs_core::energy_theory::*;
use acs_core::lie_core::{assemble_j, build_algebra, build_samelson, standard_rotation};
use acs_core::tensor_geometry::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

fn j0(n: usize) -> DMatrix<f64> {
    standard_rotation(n)
}

fn flat_cfg(phi: Arc<dyn MatrixField>, dim: usize, e: f64) -> FieldConfiguration {
    FieldConfiguration::new(AlmostComplexField::new(phi, FieldSource::User), MetricField::flat(dim), None, e).unwrap()
}

fn unit_torus(dim: usize, n: usize) -> (Lattice, Mesh) {
    let l = Lattice::torus(dim, 1.0, n);
    let m = Mesh::lattice(&l);
    (l, m)
}

fn random_skew(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let r = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (&r - r.transpose()) * 0.5
}

fn random_rotation(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    random_skew(rng, n).exp()
}

#[test]
fn zero_coupling_is_rejected() {
    let phi = AlmostComplexField::new(constant_field(j0(2), 2), FieldSource::User);
    let r = FieldConfiguration::new(phi, MetricField::flat(2), None, 0.0);
    assert!(matches!(r, Err(EnergyError::ZeroCoupling)));
}

#[test]
fn flat_torus_vacuum_and_scaled_potential() {
    let (_, mesh) = unit_torus(6, 2);
    let vac = flat_cfg(constant_field(j0(6), 6), 6, 1.0);
    let r = energy_weak(&vac, &mesh).unwrap();
    assert!(r.total < 1e-10);
    let (a, b) = vacuum_residuals(&vac, &mesh).unwrap();
    assert!(a < 1e-10 && b < 1e-10);

    // Φ = 2J: ΦΦ* − Id = 3·Id, |3·Id|² = 54, Vol = 1.
    for e in [1.0, 0.5] {
        let r = energy_weak(&flat_cfg(constant_field(j0(6) * 2.0, 6), 6, e), &mesh).unwrap();
        assert!((r.term_potential - 0.5 * e * e * 54.0).abs() < 1e-12);
        assert_eq!(r.term_nijenhuis, 0.0);
        assert!((r.total - r.term_nijenhuis - r.term_potential).abs() < 1e-15);
    }

    let zero = flat_cfg(constant_field(DMatrix::zeros(6, 6), 6), 6, 1.0);
    let (_, p) = vacuum_residuals(&zero, &mesh).unwrap();
    assert!((p - 1.0).abs() < 1e-15);
}

#[test]
fn cayley_pair_has_positive_energy() {
    let mesh = Mesh::stereo_cap(6, 5, 1.5, 6, 1e-3);
    let mut weak = 0.0;
    let mut kahler = 0.0;
    let mut volume = 0.0;
    for pole in [Pole::North, Pole::South] {
        let chart = StereoChart::new(6, pole);
        let cfg = FieldConfiguration::new(cayley_field(chart), MetricField::round_sphere(chart), None, 1.0).unwrap();
        let r = energy_weak(&cfg, &mesh).unwrap();
        let (n, p) = r.residuals.max();
        assert!(n > 19.0 && p < 1e-10, "{n} {p}");
        assert!((r.total - r.term_nijenhuis).abs() < 1e-9 * r.total);
        weak += r.total;
        kahler += energy_kahler(&cfg, &mesh).unwrap().total;
        volume += mesh.points.iter().zip(&mesh.weights).map(|(y, w)| w * chart.metric(y).determinant().sqrt()).sum::<f64>();
    }
    // |N|² = 384 and |∇J|² = 24 pointwise, so the energies are fixed
    // multiples of whatever volume the mesh assigns.
    assert!((weak / volume - 192.0).abs() < 1e-2, "{}", weak / volume);
    assert!((kahler / volume - 12.0).abs() < 1e-3, "{}", kahler / volume);
}

#[test]
fn strong_and_kahler_vanish_on_flat_kahler_torus() {
    let (_, mesh) = unit_torus(2, 4);
    let mut cfg = flat_cfg(constant_field(j0(2), 2), 2, 1.0);
    assert!(energy_kahler(&cfg, &mesh).unwrap().total < 1e-10);
    assert!(matches!(energy_strong(&cfg, &mesh), Err(EnergyError::Unsupported(_))));
    cfg.connection = Some(ConnectionField::flat(2));
    let s = energy_strong(&cfg, &mesh).unwrap();
    assert!(s.total < 1e-10 && s.term_curvature == Some(0.0));
}

#[test]
fn non_flat_connection_has_curvature() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k: Vec<DMatrix<f64>> = (0..4).map(|_| random_skew(&mut rng, 4)).collect();
    let conn = MatrixConnection {
        dim: 4,
        f: move |x: &[f64]| (0..4).map(|l| &k[l] * (2.0 * PI * x[(l + 1) % 4]).sin()).collect(),
    };
    let mut cfg = flat_cfg(constant_field(j0(4), 4), 4, 0.7);
    cfg.connection = Some(ConnectionField::new(Arc::new(conn)));
    let (_, mesh) = unit_torus(4, 4);
    let r = energy_strong(&cfg, &mesh).unwrap();
    assert!(r.term_curvature.unwrap() > 1e-3);
    assert!((r.total - r.term_nijenhuis - r.term_potential - r.term_curvature.unwrap()).abs() < 1e-12);
}

#[test]
fn samelson_pair_is_a_vacuum_at_the_identity() {
    let su = build_algebra("su2_su2").unwrap();
    let s = build_samelson(&su, &standard_rotation(2), &[-1, -1]).unwrap();
    let gram = -su.killing();
    let r = left_invariant_energy(&su, &s.j, &gram, 1.0, 1.0).unwrap();
    let (a, b) = r.residuals.max();
    assert!(a < 1e-12 && b < 1e-12 && r.total < 1e-10, "{a} {b}");
}

#[test]
fn exp_chart_grid_path_matches_identity_path() {
    let su = build_algebra("su3").unwrap();
    let gram = -su.killing();
    let j = assemble_j(&su, &standard_rotation(2), &[-1, -1, 1]).unwrap();
    let id = left_invariant_energy(&su, &j, &gram, 1.0, 1.0).unwrap();
    let target = id.residuals.nijenhuis[0];
    assert!(target > 0.5);
    let cfg = exp_chart_configuration(&su, &j, &gram, 1.0).unwrap();
    let center = [0.05, -0.03, 0.02, 0.04, -0.01, 0.03, 0.0, 0.02];
    let mesh = Mesh::patch(&center, 0.05, 2).with_step(2e-3);
    let r = energy_weak(&cfg, &mesh).unwrap();
    for (n, p) in r.residuals.nijenhuis.iter().zip(&r.residuals.potential) {
        assert!((n - target).abs() < 1e-4 * target, "{n} vs {target}");
        assert!(*p < 1e-10);
    }
    // Energy density per unit Haar volume agrees too.
    let density: f64 = id.total;
    let grid_density: f64 = r
        .residuals
        .nijenhuis
        .iter()
        .map(|n| 0.5 * n * n)
        .sum::<f64>()
        / r.residuals.nijenhuis.len() as f64;
    assert!((grid_density - density).abs() < 1e-4 * density);

    let su2 = build_algebra("su2_su2").unwrap();
    let s2 = build_samelson(&su2, &standard_rotation(2), &[-1, 1]).unwrap();
    let cfg = exp_chart_configuration(&su2, &s2.j, &-su2.killing(), 1.0).unwrap();
    let mesh = Mesh::patch(&[0.1, -0.05, 0.02, 0.07, 0.0, -0.04], 0.05, 2).with_step(1e-3);
    let (a, b) = vacuum_residuals(&cfg, &mesh).unwrap();
    assert!(a < 1e-5 && b < 1e-12, "{a} {b}");
}

#[test]
fn gauge_action() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (_, mesh) = unit_torus(6, 2);
    let phi0 = j0(6) * 1.5 + random_skew(&mut rng, 6) * 0.3;
    let cfg = flat_cfg(constant_field(phi0.clone(), 6), 6, 1.0);
    let e0 = energy_weak(&cfg, &mesh).unwrap().total;
    assert!(e0 > 1.0);

    let id = gauge_transform(&cfg, constant_field(DMatrix::identity(6, 6), 6), &mesh).unwrap();
    assert_eq!(energy_weak(&id, &mesh).unwrap().total, e0);
    for p in &mesh.points {
        assert_eq!(id.phi.eval(p), cfg.phi.eval(p));
    }

    let rot = random_rotation(&mut rng, 6);
    let g = gauge_transform(&cfg, constant_field(rot, 6), &mesh).unwrap();
    let e1 = energy_weak(&g, &mesh).unwrap().total;
    assert!(((e1 - e0) / e0).abs() < 1e-8, "{e0} {e1}");

    // A smooth rotation field: the change is pure discretization error.
    let k = random_skew(&mut rng, 6);
    let gamma = move |x: &[f64]| (&k * ((2.0 * PI * x[0]).sin() + (2.0 * PI * x[3]).cos())).exp();
    let mut rel = vec![];
    for h in [1e-2, 5e-3] {
        let patch = Mesh::patch(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6], 0.1, 2).with_step(h);
        let e0 = energy_weak(&cfg, &patch).unwrap().total;
        let g = gauge_transform(&cfg, Arc::new(AnalyticField::new(6, (6, 6), gamma.clone())), &patch).unwrap();
        rel.push(((energy_weak(&g, &patch).unwrap().total - e0) / e0).abs());
    }
    assert!(rel[0] < 1e-3 && rel[1] < 0.25 * rel[0], "{rel:?}");

    let singular = constant_field(DMatrix::zeros(6, 6), 6);
    assert!(matches!(gauge_transform(&cfg, singular, &mesh), Err(EnergyError::SingularGauge { .. })));
}

#[test]
fn lattice_energy_matches_field_energy() {
    let l = Lattice::torus(4, 2.0, 4);
    let f = perturbed_structure(&l, &j0(4), 0.3, 9);
    let le = lattice_energy(&l, &f.values, 1.3);
    let cfg = FieldConfiguration::new(
        AlmostComplexField::new(Arc::new(f), FieldSource::User),
        MetricField::flat(4),
        Some(ConnectionField::flat(4)),
        1.3,
    )
    .unwrap();
    let r = energy_weak(&cfg, &Mesh::lattice(&l)).unwrap();
    assert!(le.term_nijenhuis > 1e-3);
    assert!((le.total - r.total).abs() < 1e-12 * r.total);
    assert!((le.max_nijenhuis - r.residuals.max().0).abs() < 1e-10);
}

fn gradient_check(dim: usize, n: usize, seed: u64) -> f64 {
    let l = Lattice::torus(dim, 1.0, n);
    let f = perturbed_structure(&l, &j0(dim), 0.4, seed);
    let e = 0.8;
    let grad = lattice_gradient(&l, &f.values, e);
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let dir: Vec<DMatrix<f64>> = (0..l.len()).map(|_| DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0))).collect();
    let analytic: f64 = grad.iter().zip(&dir).map(|(g, d)| g.dot(d)).sum();
    let t = 1e-5;
    let shifted = |s: f64| -> Vec<DMatrix<f64>> { f.values.iter().zip(&dir).map(|(p, d)| p + d * s).collect() };
    let fd = (lattice_energy(&l, &shifted(t), e).total - lattice_energy(&l, &shifted(-t), e).total) / (2.0 * t);
    ((analytic - fd) / fd).abs()
}

#[test]
fn gradient_matches_finite_differences() {
    assert!(gradient_check(2, 6, 1) < 1e-4);
    assert!(gradient_check(4, 4, 2) < 1e-4);
}

#[test]
fn minimizer_stays_at_vacuum() {
    let l = Lattice::torus(2, 1.0, 8);
    let cfg = flat_cfg(constant_field(j0(2), 2), 2, 1.0);
    let t = minimize_weak(&cfg, &MinimizeOptions::new(l)).unwrap();
    assert_eq!(t.iterations(), 0);
    assert!(t.last().total < 1e-10);
}

#[test]
fn minimizer_rejects_bad_input() {
    let l = Lattice::torus(2, 1.0, 4);
    let cfg = flat_cfg(constant_field(DMatrix::identity(2, 2), 2), 2, 1.0);
    assert!(matches!(minimize_weak(&cfg, &MinimizeOptions::new(l.clone())), Err(EnergyError::Unsupported(_))));

    let f = perturbed_structure(&l, &j0(2), 0.2, 3);
    let cfg = flat_cfg(Arc::new(f), 2, 1.0);
    let mut opts = MinimizeOptions::new(l);
    opts.schedule.armijo = 1e6;
    assert!(matches!(minimize_weak(&cfg, &opts), Err(EnergyError::NonDecreasingStep { .. })));
}

#[test]
fn minimizer_converges_on_t4() {
    let l = Lattice::torus(4, 1.0, 3);
    let f = perturbed_structure(&l, &j0(4), 0.05, 17);
    let cfg = flat_cfg(Arc::new(f), 4, 1.0);
    let mut opts = MinimizeOptions::new(l);
    opts.target_energy = 1e-8;
    let t = minimize_weak(&cfg, &opts).unwrap();
    assert!(t.rows.windows(2).all(|w| w[1].total <= w[0].total));
    assert!(t.last().total < 1e-8, "{:?} after {}", t.last(), t.iterations());
}
