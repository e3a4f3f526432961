//! Gradient descent on the discretized weak functional over a flat torus.
//!
//! Φ is a section of the adjoint bundle, so iterates stay skew-symmetric:
//! the gradient is projected onto skew matrices. A skew Φ with `ΦΦᵀ = Id`
//! squares to `−Id`, which is what makes the zero locus a complex structure.

use super::{EnergyError, FieldConfiguration};
use crate::lie_core::Tensor3;
use crate::tensor_geometry::{nijenhuis_from_derivatives, Lattice, SampledField};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LatticeEnergy {
    pub total: f64,
    pub term_nijenhuis: f64,
    pub term_potential: f64,
    pub max_nijenhuis: f64,
    pub max_potential: f64,
    /// `max |Φ² + Id|`, entrywise.
    pub max_square: f64,
}

fn derivatives(lat: &Lattice, phis: &[DMatrix<f64>], idx: usize) -> Vec<DMatrix<f64>> {
    (0..lat.dim())
        .map(|l| (&phis[lat.shift(idx, l, 1)] - &phis[lat.shift(idx, l, -1)]) / (2.0 * lat.step))
        .collect()
}

fn frob_sq(t: &Tensor3) -> f64 {
    t.data.iter().map(|v| v * v).sum()
}

/// Weak energy of nodal values on a flat periodic lattice.
pub fn lattice_energy(lat: &Lattice, phis: &[DMatrix<f64>], coupling: f64) -> LatticeEnergy {
    let w = lat.step.powi(lat.dim() as i32);
    let e2 = coupling * coupling;
    let rows: Vec<(f64, f64, f64, f64, f64)> = (0..lat.len())
        .into_par_iter()
        .map(|idx| {
            let p = &phis[idx];
            let n = p.nrows();
            let nij = nijenhuis_from_derivatives(p, &derivatives(lat, phis, idx));
            let n2 = frob_sq(&nij);
            let a = p * p.transpose() - DMatrix::identity(n, n);
            let sq = (p * p + DMatrix::identity(n, n)).amax();
            (0.5 * w * n2, 0.5 * w * e2 * a.norm_squared(), n2.sqrt(), a.singular_values().max(), sq)
        })
        .collect();
    let mut out = LatticeEnergy::default();
    for r in rows {
        out.term_nijenhuis += r.0;
        out.term_potential += r.1;
        out.max_nijenhuis = out.max_nijenhuis.max(r.2);
        out.max_potential = out.max_potential.max(r.3);
        out.max_square = out.max_square.max(r.4);
    }
    out.total = out.term_nijenhuis + out.term_potential;
    out
}

/// Exact gradient of [`lattice_energy`] with respect to every nodal entry.
pub fn lattice_gradient(lat: &Lattice, phis: &[DMatrix<f64>], coupling: f64) -> Vec<DMatrix<f64>> {
    let d = lat.dim();
    let w = lat.step.powi(d as i32);
    let e2 = coupling * coupling;
    let n = phis[0].nrows();
    // Per node: the direct term and V_l with (V_l)^k_j = W'^k_{jl} − W'^k_{lj},
    // W'^k_{jl} = Σ_i N^k_ij Φ^l_i.
    let parts: Vec<(DMatrix<f64>, Vec<DMatrix<f64>>)> = (0..lat.len())
        .into_par_iter()
        .map(|idx| {
            let p = &phis[idx];
            let dv = derivatives(lat, phis, idx);
            let nij = nijenhuis_from_derivatives(p, &dv);
            let mut g = DMatrix::zeros(n, n);
            for l in 0..n {
                for i in 0..n {
                    let mut s = 0.0;
                    for j in 0..n {
                        for k in 0..n {
                            s += nij.get(i, j, k) * (dv[l][(k, j)] - dv[j][(k, l)]);
                        }
                    }
                    g[(l, i)] = 2.0 * w * s;
                }
            }
            let a = p * p.transpose() - DMatrix::identity(n, n);
            g += &a * p * (2.0 * w * e2);
            let mut wp = vec![0.0; n * n * n];
            for j in 0..n {
                for l in 0..n {
                    for k in 0..n {
                        wp[(j * n + l) * n + k] = (0..n).map(|i| nij.get(i, j, k) * p[(l, i)]).sum();
                    }
                }
            }
            let v: Vec<DMatrix<f64>> = (0..n)
                .map(|l| DMatrix::from_fn(n, n, |k, j| wp[(j * n + l) * n + k] - wp[(l * n + j) * n + k]))
                .collect();
            (g, v)
        })
        .collect();
    (0..lat.len())
        .into_par_iter()
        .map(|idx| {
            let mut g = parts[idx].0.clone();
            for l in 0..d {
                let fwd = &parts[lat.shift(idx, l, 1)].1[l];
                let bwd = &parts[lat.shift(idx, l, -1)].1[l];
                g -= (fwd - bwd) * (2.0 * w / (2.0 * lat.step));
            }
            g
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub initial: f64,
    /// Step multiplier after an accepted step.
    pub growth: f64,
    /// Step multiplier after a rejected trial.
    pub shrink: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub max_failures: usize,
}

impl Default for StepSchedule {
    fn default() -> Self {
        StepSchedule { initial: 0.1, growth: 2.0, shrink: 0.5, armijo: 1e-4, max_failures: 50 }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub lattice: Lattice,
    pub schedule: StepSchedule,
    pub max_iterations: usize,
    /// Stop once the total falls below this.
    pub target_energy: f64,
}

impl MinimizeOptions {
    pub fn new(lattice: Lattice) -> Self {
        MinimizeOptions { lattice, schedule: StepSchedule::default(), max_iterations: 5000, target_energy: 1e-12 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub iteration: usize,
    pub total: f64,
    pub term_nijenhuis: f64,
    pub term_potential: f64,
    pub max_nijenhuis: f64,
    pub max_potential: f64,
    pub max_square: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub final_phi: SampledField,
    /// Sup norms of the two vacuum residuals at the last iterate.
    pub final_residuals: (f64, f64),
}

impl Trajectory {
    pub fn iterations(&self) -> usize {
        self.rows.last().map_or(0, |r| r.iteration)
    }
    pub fn last(&self) -> &TrajectoryRow {
        self.rows.last().expect("trajectory has an initial row")
    }
}

fn row(iteration: usize, e: &LatticeEnergy, step: f64) -> TrajectoryRow {
    TrajectoryRow {
        iteration,
        total: e.total,
        term_nijenhuis: e.term_nijenhuis,
        term_potential: e.term_potential,
        max_nijenhuis: e.max_nijenhuis,
        max_potential: e.max_potential,
        max_square: e.max_square,
        step,
    }
}

/// Backtracking gradient descent with the metric held flat and Φ free.
pub fn minimize_weak(initial: &FieldConfiguration, opts: &MinimizeOptions) -> Result<Trajectory, EnergyError> {
    let lat = &opts.lattice;
    let e = initial.coupling;
    if e == 0.0 || !e.is_finite() {
        return Err(EnergyError::ZeroCoupling);
    }
    let mut phis: Vec<DMatrix<f64>> = (0..lat.len()).map(|i| initial.phi.eval(&lat.position(i))).collect();
    let n = phis[0].nrows();
    for (i, p) in phis.iter().enumerate() {
        let x = lat.position(i);
        if (initial.metric.eval(&x) - DMatrix::identity(n, n)).amax() > 1e-12 {
            return Err(EnergyError::Unsupported("the minimizer runs on a flat torus".into()));
        }
        if (p + p.transpose()).amax() > 1e-12 {
            return Err(EnergyError::Unsupported("the initial Higgs field must be skew".into()));
        }
    }
    if let Some(c) = &initial.connection {
        if c.christoffel(&lat.position(0)).data.iter().any(|v| *v != 0.0) {
            return Err(EnergyError::Unsupported("the minimizer uses the flat connection".into()));
        }
    }
    let sched = opts.schedule;
    let mut step = sched.initial;
    let mut energy = lattice_energy(lat, &phis, e);
    let mut rows = vec![row(0, &energy, 0.0)];
    let mut failures = 0;
    let mut iteration = 0;
    while iteration < opts.max_iterations && energy.total >= opts.target_energy {
        let grad: Vec<DMatrix<f64>> =
            lattice_gradient(lat, &phis, e).into_iter().map(|g| (&g - g.transpose()) * 0.5).collect();
        let gnorm2: f64 = grad.iter().map(|g| g.norm_squared()).sum();
        if gnorm2 == 0.0 {
            break;
        }
        loop {
            let trial: Vec<DMatrix<f64>> = phis.iter().zip(&grad).map(|(p, g)| p - g * step).collect();
            let te = lattice_energy(lat, &trial, e);
            if te.total <= energy.total - sched.armijo * step * gnorm2 {
                phis = trial;
                energy = te;
                iteration += 1;
                rows.push(row(iteration, &energy, step));
                step *= sched.growth;
                failures = 0;
                break;
            }
            failures += 1;
            step *= sched.shrink;
            if failures >= sched.max_failures {
                return Err(EnergyError::NonDecreasingStep { iteration, failures });
            }
        }
    }
    let final_residuals = (energy.max_nijenhuis, energy.max_potential);
    Ok(Trajectory {
        rows,
        final_phi: SampledField { lattice: lat.clone(), shape: (n, n), values: phis },
        final_residuals,
    })
}

/// `J + amplitude · skew noise` at every node, from a pinned seed.
pub fn perturbed_structure(lattice: &Lattice, j: &DMatrix<f64>, amplitude: f64, seed: u64) -> SampledField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = j.nrows();
    let values = (0..lattice.len())
        .map(|_| {
            let r = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            j + (&r - r.transpose()) * (0.5 * amplitude)
        })
        .collect();
    SampledField { lattice: lattice.clone(), shape: (n, n), values }
}
