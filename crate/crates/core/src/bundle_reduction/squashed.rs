//! The squashed left-invariant metric on G₂ and the horizontal vacuum
//! integrand at the identity.
//!
//! The metric is written in fourteen coframe combinations. Six of them are
//! horizontal with weights `1, 1/3`, eight are vertical and carry `λ^{-1/4}`,
//! so the SU(3) fibers have volume `∝ λ⁻¹`. The combinations are identified
//! with the g₂ basis: horizontal ones with the short root planes `m`, vertical
//! ones with the long root planes and the Cartan of su(3).

use super::{check_lambda, BundleError};
use crate::energy_theory::{endo_norm_sq, potential_tensor};
use crate::lie_core::{blockdiagonal_check, nijenhuis_at_identity, SubalgebraEmbedding, Tensor3};
use crate::tensor_geometry::tensor3_norm_sq;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// The coframe combinations in Gram order.
pub const COFRAME_LABELS: [&str; 14] = [
    "s(2,3^)-s(3,2^)",
    "s(2,3)-2s(1)",
    "s(3,1^)-s(1,3^)",
    "s(3,1)-2s(2)",
    "s(1,2^)-s(2,1^)",
    "s(1,2)-2s(3)",
    "s(2,3^)+s(3,2^)",
    "s(2,3)",
    "s(3,1^)+s(1,3^)",
    "s(3,1)",
    "s(1,2^)+s(2,1^)",
    "s(1,2)",
    "s(1,1^)-s(2,2^)",
    "s(1,1^)+s(2,2^)",
];

/// The raw one-forms `σ_i, σ_ij, σ_iĵ` in the order used by [`SquashedMetric::raw_gram`].
pub const RAW_COFRAME_LABELS: [&str; 14] = [
    "s(1)", "s(2)", "s(3)", "s(2,3)", "s(3,1)", "s(1,2)", "s(2,3^)", "s(3,2^)", "s(3,1^)", "s(1,3^)", "s(1,2^)", "s(2,1^)",
    "s(1,1^)", "s(2,2^)",
];

pub const HORIZONTAL: std::ops::Range<usize> = 0..6;
pub const VERTICAL: std::ops::Range<usize> = 6..14;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SquashedMetric {
    pub lambda: f64,
    /// Diagonal Gram matrix in the [`COFRAME_LABELS`] order.
    pub gram: DMatrix<f64>,
}

pub fn squashed_metric(lambda: f64) -> Result<SquashedMetric, BundleError> {
    check_lambda(lambda)?;
    let l = lambda.powf(-0.25);
    let third = 1.0 / 3.0;
    let w = [1.0, third, 1.0, third, 1.0, third, l, 3.0 * l, l, 3.0 * l, l, 3.0 * l, l, 3.0 * l];
    Ok(SquashedMetric { lambda, gram: DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&w)) })
}

impl SquashedMetric {
    /// Rows are the combinations, columns the raw one-forms.
    pub fn combination_matrix() -> DMatrix<f64> {
        let mut t = DMatrix::zeros(14, 14);
        let rows: [&[(usize, f64)]; 14] = [
            &[(6, 1.0), (7, -1.0)],
            &[(3, 1.0), (0, -2.0)],
            &[(8, 1.0), (9, -1.0)],
            &[(4, 1.0), (1, -2.0)],
            &[(10, 1.0), (11, -1.0)],
            &[(5, 1.0), (2, -2.0)],
            &[(6, 1.0), (7, 1.0)],
            &[(3, 1.0)],
            &[(8, 1.0), (9, 1.0)],
            &[(4, 1.0)],
            &[(10, 1.0), (11, 1.0)],
            &[(5, 1.0)],
            &[(12, 1.0), (13, -1.0)],
            &[(12, 1.0), (13, 1.0)],
        ];
        for (r, entries) in rows.iter().enumerate() {
            for &(c, v) in entries.iter() {
                t[(r, c)] = v;
            }
        }
        t
    }

    /// The same metric in the raw `σ` coframe, `TᵀDT`.
    pub fn raw_gram(&self) -> DMatrix<f64> {
        let t = Self::combination_matrix();
        t.transpose() * &self.gram * t
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.raw_gram().symmetric_eigen().eigenvalues.min()
    }

    pub fn vertical_block(&self) -> DMatrix<f64> {
        self.gram.view((VERTICAL.start, VERTICAL.start), (8, 8)).into_owned()
    }

    pub fn horizontal_block(&self) -> DMatrix<f64> {
        self.gram.view((HORIZONTAL.start, HORIZONTAL.start), (6, 6)).into_owned()
    }

    pub fn vertical_determinant(&self) -> f64 {
        self.vertical_block().determinant()
    }

    /// Induced fiber volume element relative to `λ = 1`: `√(det V_λ / det V_1)`.
    pub fn fiber_volume_ratio(&self) -> f64 {
        let base = squashed_metric(1.0).expect("1 is a valid lambda");
        (self.vertical_determinant() / base.vertical_determinant()).sqrt()
    }

    /// Frobenius norm of the horizontal/vertical off-diagonal blocks.
    pub fn off_block_norm(&self) -> f64 {
        self.gram.view((HORIZONTAL.start, VERTICAL.start), (6, 8)).norm()
            + self.gram.view((VERTICAL.start, HORIZONTAL.start), (8, 6)).norm()
    }

    /// The Gram matrix on the g₂ basis: horizontal combinations go to the
    /// complement basis in order, the six root-plane vertical combinations to
    /// the long root planes and the last two to the Cartan.
    pub fn on_g2(&self, emb: &SubalgebraEmbedding) -> DMatrix<f64> {
        let n = emb.ambient.dim;
        let mut slots: Vec<usize> = emb.complement_indices.clone();
        slots.extend(&emb.sub_indices[2..]);
        slots.extend(&emb.sub_indices[..2]);
        let mut g = DMatrix::zeros(n, n);
        for (c, &i) in slots.iter().enumerate() {
            g[(i, i)] = self.gram[(c, c)];
        }
        g
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct G2ReductionRow {
    pub lambda: f64,
    /// `|N_φ|² + e²|φφ* − Id_H|²` at the identity.
    pub integrand: f64,
    pub nijenhuis_term: f64,
    pub potential_term: f64,
    /// `max |φᵀhφ − h|` for the projected horizontal metric `h`.
    pub orthogonality_residual: f64,
    pub min_eigenvalue: f64,
    /// `det V_λ / det V_1`.
    pub vertical_det_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct G2ReductionReport {
    pub off_block_norm: f64,
    pub rows: Vec<G2ReductionRow>,
}

impl G2ReductionReport {
    pub fn max_integrand(&self) -> f64 {
        self.rows.iter().map(|r| r.integrand).fold(0.0, f64::max)
    }
}

const BLOCK_TOLERANCE: f64 = 1e-10;

/// Horizontal vacuum integrand of a left-invariant `J` on g₂ for the squashed
/// metric projected by `J`, per scheduled λ.
pub fn g2_reduction_check(
    j: &DMatrix<f64>,
    emb: &SubalgebraEmbedding,
    schedule: &[f64],
    coupling: f64,
) -> Result<G2ReductionReport, BundleError> {
    if schedule.is_empty() {
        return Err(BundleError::EmptySchedule);
    }
    let blocks = blockdiagonal_check(emb, j);
    if blocks.off_block_norm() > BLOCK_TOLERANCE {
        return Err(BundleError::NotBlockDiagonal(blocks.off_block_norm()));
    }
    let spec = &emb.ambient;
    let full = nijenhuis_at_identity(spec, j)?;
    let m = &emb.complement_indices;
    let mut n_phi = Tensor3::zeros(m.len());
    for (a, &i) in m.iter().enumerate() {
        for (b, &jj) in m.iter().enumerate() {
            for (c, &k) in m.iter().enumerate() {
                n_phi.set(a, b, c, full.get(i, jj, k));
            }
        }
    }
    let phi = &blocks.phi;
    let rows = schedule
        .iter()
        .map(|&lambda| {
            let metric = squashed_metric(lambda)?;
            let g = metric.on_g2(emb);
            let projected = (&g + j.transpose() * &g * j) * 0.5;
            let h = DMatrix::from_fn(m.len(), m.len(), |a, b| projected[(m[a], m[b])]);
            let hinv = h.clone().try_inverse().expect("projected metric is positive definite");
            let nij = tensor3_norm_sq(&n_phi, &h, &hinv).max(0.0);
            let pot = endo_norm_sq(&potential_tensor(phi, &h, &hinv), &h, &hinv).max(0.0);
            let e2 = coupling * coupling;
            Ok(G2ReductionRow {
                lambda,
                integrand: nij + e2 * pot,
                nijenhuis_term: nij,
                potential_term: e2 * pot,
                orthogonality_residual: (phi.transpose() * &h * phi - &h).amax(),
                min_eigenvalue: metric.min_eigenvalue(),
                vertical_det_ratio: metric.vertical_determinant() / squashed_metric(1.0)?.vertical_determinant(),
            })
        })
        .collect::<Result<Vec<_>, BundleError>>()?;
    Ok(G2ReductionReport { off_block_norm: blocks.off_block_norm(), rows })
}
