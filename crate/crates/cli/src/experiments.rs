//! One function per experiment. Each writes its reports and returns a
//! summary plus the list of violated invariants.

use crate::config::{ConfigError, ExperimentConfig};
use acs_core::bundle_reduction::{
    g2_reduction_check, hopf_constant, hopf_exponential_field, reduce, section_pullback_error, squashed_metric, BaseChart,
    BaseGrid, BundleField, FiberModes, LocalSection, DEFAULT_LAMBDA_SCHEDULE,
};
use acs_core::energy_theory::{minimize_weak, perturbed_structure, FieldConfiguration, MinimizeOptions};
use acs_core::group_harmonics::{decay_scan, GroupChart, Irrep, IrrepLabel};
use acs_core::io::{decay_rows, write_csv, write_snapshot, ReportMeta};
use acs_core::lie_core::{assemble_j, build_algebra, closure_residual, embed_su3_in_g2, nijenhuis_at_identity, standard_rotation};
use acs_core::quadrature::{AxisKind, RuleSpec};
use acs_core::tensor_geometry::{
    cayley_field, levi_civita, nijenhuis_coordinate, orthogonality_residual, AlmostComplexField, FieldSource, Lattice, Mesh,
    MetricField, Pole, StereoChart,
};
use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const EXPERIMENTS: [(&str, &str); 6] = [
    ("hopf-reduce", "Fourier modes of e^z + e^v along Hopf fibers, the reduction and section errors"),
    ("decay-scan", "SU(3) fundamental coefficient of exp(Re g11) across a lambda schedule"),
    ("g2-check", "horizontal vacuum integrand of a Samelson structure on g2 under the squashed metric"),
    ("squashed-spectrum", "eigenvalues and fiber-volume scaling of the squashed G2 metric"),
    ("minimize", "gradient descent of the weak energy on a flat torus from a seeded perturbation"),
    ("nijenhuis", "Nijenhuis tensor of a Samelson structure at the identity, or of the Cayley structure on S6"),
];

pub struct Outcome {
    pub summary: Value,
    pub violations: Vec<String>,
    pub files: Vec<PathBuf>,
}

struct Reports {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Reports {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Reports { dir: dir.into(), files: Vec::new() })
    }

    fn csv<T: Serialize>(&mut self, name: &str, meta: &ReportMeta, rows: &[T]) -> Result<()> {
        let path = self.dir.join(name);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_csv(BufWriter::new(f), meta, rows).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(value)?).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(path);
        Ok(())
    }
}

fn check(violations: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        violations.push(what());
    }
}

#[derive(Serialize)]
struct ModeRow {
    lambda: f64,
    a_re: f64,
    a_im: f64,
    k: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct NormRow {
    lambda: f64,
    k: i64,
    sup_norm: f64,
}

#[derive(Serialize)]
struct PullbackCsv {
    lambda: f64,
    linf: f64,
    linf1: f64,
    bound: f64,
}

fn mode_rows(m: &FiberModes) -> Vec<ModeRow> {
    let mut out = Vec::new();
    for (p, row) in m.base.iter().zip(&m.coeffs) {
        let a = match p {
            acs_core::bundle_reduction::BasePoint::Finite(a) => *a,
            acs_core::bundle_reduction::BasePoint::Infinity => Complex64::new(f64::INFINITY, 0.0),
        };
        for (k, c) in m.ks.iter().zip(row) {
            out.push(ModeRow { lambda: m.lambda, a_re: a.re, a_im: a.im, k: *k, re: c.re, im: c.im });
        }
    }
    out
}

pub fn hopf_reduce(cfg: &ExperimentConfig) -> Result<Outcome> {
    let schedule = cfg.schedule(&DEFAULT_LAMBDA_SCHEDULE[..3])?;
    let n = cfg.resolution(21)?;
    let tol = cfg.tolerance(1e-10)?;
    let max_mode = 8;
    let mut reports = Reports::new(&cfg.output_dir())?;
    let grid = BaseGrid::new(3.0, n);
    let field = BundleField::on_grid(Arc::new(|z: Complex64, v: Complex64| z.exp() + v.exp()), &grid);
    let res = reduce(&field, &schedule, max_mode, Some(tol))?;
    let ks: Vec<i64> = (0..=max_mode).collect();
    let mut rows = Vec::new();
    for &l in &schedule {
        let probe = hopf_exponential_field(BaseGrid::new(2.0, 5).points().0);
        let m = acs_core::bundle_reduction::fiber_fourier_modes(&probe, &acs_core::bundle_reduction::hopf_bundle(l)?, &ks, Some(tol))?;
        rows.extend(mode_rows(&m));
    }
    let base_meta = |rel: &str| ReportMeta::new("hopf-reduce", rel).with("trivialization", format!("{:?}", BaseChart::A));
    reports.csv("hopf_modes.csv", &base_meta("fiber Fourier coefficients of e^z + e^v"), &rows)?;
    let norms: Vec<NormRow> = res
        .rows
        .iter()
        .flat_map(|r| r.mode_norms.iter().map(move |(k, s)| NormRow { lambda: r.lambda, k: *k, sup_norm: *s }))
        .collect();
    reports.csv("hopf_mode_norms.csv", &base_meta("decay of non-trivial modes with lambda"), &norms)?;
    let constant = hopf_constant(12, 6.0, 241);
    let section = LocalSection::hopf(0.0);
    let pull = section_pullback_error(&section, &field, &res, &schedule)?;
    let pull_rows: Vec<PullbackCsv> =
        pull.iter().map(|r| PullbackCsv { lambda: r.lambda, linf: r.linf, linf1: r.linf1, bound: constant.bound(r.lambda) }).collect();
    reports.csv(
        "hopf_pullback.csv",
        &base_meta("section pullback minus reduction against the geometric-series bound").with("C", constant.value),
        &pull_rows,
    )?;
    let deviation = res.deviation_from(Complex64::new(2.0, 0.0));
    let mut violations = Vec::new();
    check(&mut violations, deviation < 1e-8, || format!("reduction deviates from 2 by {deviation:.3e}"));
    check(&mut violations, res.modes_decreasing(1e-13), || "a non-trivial mode norm does not decrease with lambda".into());
    for r in &pull_rows {
        check(&mut violations, r.linf1 <= r.bound, || format!("L-inf-1 error {:.3e} exceeds bound {:.3e} at lambda {}", r.linf1, r.bound, r.lambda));
    }
    let summary = json!({
        "experiment": "hopf-reduce",
        "relation": "fiber-collapse reduction of e^z + e^v is the constant 2",
        "lambda_schedule": schedule,
        "base_points": field.base.len(),
        "reduction_deviation": deviation,
        "hopf_constant": constant.value,
        "pullback": pull_rows.iter().map(|r| json!({"lambda": r.lambda, "linf": r.linf, "linf1": r.linf1, "bound": r.bound})).collect::<Vec<_>>(),
    });
    reports.json("hopf_summary.json", &summary)?;
    Ok(Outcome { summary, violations, files: reports.files })
}

/// `exp(Re γ¹¹)` in raw chart parameters at λ = 1: `exp(cos θ¹ cos θ² cos φ¹)`.
pub fn decay_function(p: &[f64]) -> Complex64 {
    Complex64::new((p[0].cos() * p[1].cos() * p[3].cos()).exp(), 0.0)
}

/// Gauss–Legendre on the angles and on φ¹ (the integrand is not periodic on
/// the shrunken φ¹ range); trapezoid on the other phases.
pub fn decay_rule(angle_nodes: usize) -> impl Fn(&GroupChart) -> RuleSpec {
    move |_: &GroupChart| {
        let mut axes = vec![(AxisKind::GaussLegendre, angle_nodes); 3];
        axes.push((AxisKind::GaussLegendre, 2 * angle_nodes));
        axes.extend(std::iter::repeat((AxisKind::Trapezoid, 4)).take(4));
        RuleSpec::new(axes)
    }
}

pub fn decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let schedule = cfg.schedule(&[1.0, 1e2, 1e4])?;
    let n = cfg.resolution(8)?;
    let label = match cfg.irreps.as_deref() {
        None => IrrepLabel::Su3(1, 0),
        Some([one]) => parse_su3_label(one)?,
        Some(_) => return Err(ConfigError::Invalid("decay-scan takes a single irrep".into()).into()),
    };
    let irrep = Irrep::new(label)?;
    let mut reports = Reports::new(&cfg.output_dir())?;
    let rule = decay_rule(n);
    let table = decay_scan(&decay_function, &irrep, &schedule, &rule, cfg.tolerance)?;
    reports.csv(
        "decay.csv",
        &ReportMeta::new("decay-scan", "fiber coefficient of a fixed total-space function as the fiber shrinks").with("irrep", label),
        &decay_rows(&table),
    )?;
    let mut violations = Vec::new();
    check(&mut violations, table.strictly_decreasing(), || "coefficient magnitudes are not strictly decreasing".into());
    let last = table.rows.last().expect("schedule is non-empty");
    let summary = json!({
        "experiment": "decay-scan",
        "relation": "non-trivial coefficients decay as the fiber volume shrinks",
        "irrep": label.to_string(),
        "rows": table.rows,
        "fitted_exponent": table.fitted_exponent,
        "final_over_noise_floor": last.max_abs / last.noise_floor,
    });
    Ok(Outcome { summary, violations, files: reports.files })
}

fn parse_su3_label(s: &str) -> Result<IrrepLabel, ConfigError> {
    let body = s.strip_prefix("su3:").ok_or_else(|| ConfigError::Invalid(format!("expected su3:m1,m2, got {s}")))?;
    let parts: Vec<u32> = body.split(',').map(|t| t.trim().parse::<u32>()).collect::<Result<_, _>>().map_err(|e| ConfigError::Invalid(format!("{s}: {e}")))?;
    match parts.as_slice() {
        [a, b] => Ok(IrrepLabel::Su3(*a, *b)),
        _ => Err(ConfigError::Invalid(format!("expected su3:m1,m2, got {s}"))),
    }
}

#[derive(Serialize)]
struct G2Csv {
    lambda: f64,
    integrand: f64,
    nijenhuis_term: f64,
    potential_term: f64,
    orthogonality_residual: f64,
    min_eigenvalue: f64,
    vertical_det_ratio: f64,
}

pub fn g2_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let schedule = cfg.schedule(&[1.0, 10.0, 1e4])?;
    let e = cfg.coupling()?;
    let g2 = build_algebra("g2")?;
    let signs = cfg.signs.clone().unwrap_or_else(|| vec![-1; 6]);
    let j = assemble_j(&g2, &standard_rotation(2), &signs)?;
    let emb = embed_su3_in_g2(&g2)?;
    let rep = g2_reduction_check(&j, &emb, &schedule, e)?;
    let mut reports = Reports::new(&cfg.output_dir())?;
    let rows: Vec<G2Csv> = rep
        .rows
        .iter()
        .map(|r| G2Csv {
            lambda: r.lambda,
            integrand: r.integrand,
            nijenhuis_term: r.nijenhuis_term,
            potential_term: r.potential_term,
            orthogonality_residual: r.orthogonality_residual,
            min_eigenvalue: r.min_eigenvalue,
            vertical_det_ratio: r.vertical_det_ratio,
        })
        .collect();
    reports.csv(
        "g2_check.csv",
        &ReportMeta::new("g2-check", "horizontal vacuum integrand |N_phi|^2 + e^2|phi phi* - Id_H|^2 at the identity")
            .with("signs", format!("{signs:?}"))
            .with("coupling", e),
        &rows,
    )?;
    let mut violations = Vec::new();
    for r in &rows {
        check(&mut violations, r.integrand < 1e-10, || format!("integrand {:.3e} at lambda {}", r.integrand, r.lambda));
        check(&mut violations, r.orthogonality_residual < 1e-12, || format!("phi not orthogonal at lambda {}", r.lambda));
    }
    let summary = json!({
        "experiment": "g2-check",
        "relation": "horizontal vacuum equation on G2 for every lambda",
        "signs": signs,
        "off_block_norm": rep.off_block_norm,
        "max_integrand": rep.max_integrand(),
    });
    Ok(Outcome { summary, violations, files: reports.files })
}

#[derive(Serialize)]
struct SpectrumRow {
    lambda: f64,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
    vertical_det_ratio: f64,
    expected_det_ratio: f64,
    fiber_volume_ratio: f64,
}

pub fn squashed_spectrum(cfg: &ExperimentConfig) -> Result<Outcome> {
    let schedule = cfg.schedule(&[1.0, 10.0, 16.0, 1e4])?;
    let base = squashed_metric(1.0)?;
    let mut rows = Vec::new();
    for &l in &schedule {
        let m = squashed_metric(l)?;
        let eig = m.raw_gram().symmetric_eigen().eigenvalues;
        rows.push(SpectrumRow {
            lambda: l,
            min_eigenvalue: eig.min(),
            max_eigenvalue: eig.max(),
            vertical_det_ratio: m.vertical_determinant() / base.vertical_determinant(),
            expected_det_ratio: l.powi(-2),
            fiber_volume_ratio: m.fiber_volume_ratio(),
        });
    }
    let mut reports = Reports::new(&cfg.output_dir())?;
    reports.csv("squashed_spectrum.csv", &ReportMeta::new("squashed-spectrum", "fiber volume of the squashed metric scales as 1/lambda"), &rows)?;
    let mut violations = Vec::new();
    for r in &rows {
        check(&mut violations, r.min_eigenvalue > 0.0, || format!("not positive definite at lambda {}", r.lambda));
        let rel = (r.vertical_det_ratio / r.expected_det_ratio - 1.0).abs();
        check(&mut violations, rel < 1e-9, || format!("vertical determinant ratio off by {rel:.3e} at lambda {}", r.lambda));
    }
    let summary = json!({
        "experiment": "squashed-spectrum",
        "relation": "squashed metric is positive definite and its vertical determinant scales as lambda^-2",
        "rows": rows.len(),
    });
    Ok(Outcome { summary, violations, files: reports.files })
}

pub fn minimize(cfg: &ExperimentConfig) -> Result<Outcome> {
    let e = cfg.coupling()?;
    let dim = cfg.dim.unwrap_or(2);
    if dim == 0 || dim % 2 != 0 {
        return Err(ConfigError::Invalid(format!("torus dimension must be even and positive, got {dim}")).into());
    }
    let n = cfg.resolution(8)?;
    let seed = cfg.seed.unwrap_or(20240601);
    let lat = Lattice::torus(dim, 1.0, n);
    let start = perturbed_structure(&lat, &standard_rotation(dim), 0.1, seed);
    let phi = AlmostComplexField::new(Arc::new(start), FieldSource::User);
    let fc = FieldConfiguration::new(phi, MetricField::flat(dim), None, e)?;
    let mut opts = MinimizeOptions::new(lat);
    opts.max_iterations = cfg.max_iterations.unwrap_or(5000);
    opts.target_energy = cfg.tolerance.unwrap_or(1e-8);
    let traj = minimize_weak(&fc, &opts)?;
    let mut reports = Reports::new(&cfg.output_dir())?;
    reports.csv(
        "trajectory.csv",
        &ReportMeta::new("minimize", "weak energy descent toward the vacuum zero locus")
            .with_seed(seed)
            .with("coupling", e)
            .with("torus", format!("T^{dim}, {n} nodes per axis")),
        &traj.rows,
    )?;
    let path = reports.dir.join("final_phi.bin");
    write_snapshot(BufWriter::new(File::create(&path)?), &traj.final_phi, &format!("torus{dim}"), "coordinate")?;
    reports.files.push(path);
    let last = *traj.last();
    let mut violations = Vec::new();
    check(&mut violations, last.total < 1e-6, || format!("final energy {:.3e} not below 1e-6", last.total));
    check(&mut violations, last.max_square < 1e-3, || format!("|Phi^2 + Id| = {:.3e}", last.max_square));
    let summary = json!({
        "experiment": "minimize",
        "relation": "descent reaches the vacuum: Phi^2 = -Id and N = 0",
        "seed": seed,
        "iterations": traj.iterations(),
        "final": last,
    });
    Ok(Outcome { summary, violations, files: reports.files })
}

/// Point of the north chart used for the Cayley evaluation.
pub const CAYLEY_SAMPLE: [f64; 6] = [0.31, -0.22, 0.45, 0.12, -0.37, 0.28];

#[derive(Serialize)]
struct NijenhuisRow {
    target: String,
    step: f64,
    max_norm: f64,
    error_estimate: f64,
}

pub fn nijenhuis(cfg: &ExperimentConfig) -> Result<Outcome> {
    let target = cfg.algebra.clone().unwrap_or_else(|| "cayley".into());
    let mut reports = Reports::new(&cfg.output_dir())?;
    let mut violations = Vec::new();
    if target == "cayley" {
        let chart = StereoChart::new(6, Pole::North);
        let phi = cayley_field(chart);
        let metric = MetricField::round_sphere(chart);
        let tol = cfg.tolerance(1e-2)?;
        let n = cfg.resolution(2)?;
        let mut rows = Vec::new();
        for h in [4e-3, 2e-3, 1e-3] {
            let mesh = Mesh::patch(&CAYLEY_SAMPLE, 0.1, n).with_step(h);
            let conn = levi_civita(&metric, &mesh)?;
            let nf = nijenhuis_coordinate(&phi, &conn, &mesh, Some(tol))?;
            rows.push(NijenhuisRow { target: target.clone(), step: h, max_norm: nf.max_norm(&metric)?, error_estimate: nf.error_estimate });
        }
        let mesh = Mesh::patch(&CAYLEY_SAMPLE, 0.1, n);
        let sq = phi.square_residual(&mesh);
        let orth = orthogonality_residual(&metric, &phi, &mesh);
        check(&mut violations, sq < 1e-12, || format!("J^2 + Id = {sq:.3e}"));
        check(&mut violations, orth < 1e-12, || format!("J not orthogonal: {orth:.3e}"));
        reports.csv("nijenhuis.csv", &ReportMeta::new("nijenhuis", "Cayley structure on S6 is not integrable"), &rows)?;
        let summary = json!({
            "experiment": "nijenhuis",
            "target": target,
            "square_residual": sq,
            "orthogonality_residual": orth,
            "max_norm": rows.iter().map(|r| r.max_norm).collect::<Vec<_>>(),
        });
        return Ok(Outcome { summary, violations, files: reports.files });
    }
    let spec = build_algebra(&target)?;
    let signs = cfg.signs.clone().unwrap_or_else(|| vec![-1; spec.root_pairs.len()]);
    let j = assemble_j(&spec, &standard_rotation(spec.cartan.len()), &signs)?;
    let n = nijenhuis_at_identity(&spec, &j)?;
    let closure = closure_residual(&spec, &j);
    let norm = n.data.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rows = vec![NijenhuisRow { target: target.clone(), step: 0.0, max_norm: norm, error_estimate: 0.0 }];
    reports.csv(
        "nijenhuis.csv",
        &ReportMeta::new("nijenhuis", "Samelson closure implies vanishing Nijenhuis tensor at the identity").with("signs", format!("{signs:?}")),
        &rows,
    )?;
    check(&mut violations, closure > 1e-10 || norm < 1e-12, || format!("closed structure with |N| = {norm:.3e}"));
    let summary = json!({
        "experiment": "nijenhuis",
        "target": target,
        "signs": signs,
        "closure_residual": closure,
        "nijenhuis_norm": norm,
        "integrable": norm < 1e-12,
    });
    Ok(Outcome { summary, violations, files: reports.files })
}
