//! Octonions on the basis `{1, e₁, …, e₇}` with a fixed Fano-plane table.
//!
//! Oriented lines `(i, j, k)` mean `e_i e_j = e_k` together with its cyclic
//! shifts; reversing the order flips the sign. Only results independent of
//! this choice are asserted elsewhere.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const FANO_LINES: [(usize, usize, usize); 7] =
    [(1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5)];

pub type Octonion = [f64; 8];

#[derive(Debug, Error, PartialEq)]
pub enum OctonionError {
    #[error("expected a unit imaginary octonion (|x| = {norm:.3e}, real part {re:.3e})")]
    NotUnitImaginary { norm: f64, re: f64 },
}

/// `TABLE[i][j] = (sign, k)` with `e_i e_j = sign · e_k`.
fn table() -> [[(f64, usize); 8]; 8] {
    let mut t = [[(0.0, 0); 8]; 8];
    for (i, row) in t.iter_mut().enumerate() {
        row[0] = (1.0, i);
    }
    for j in 0..8 {
        t[0][j] = (1.0, j);
    }
    for i in 1..8 {
        t[i][i] = (-1.0, 0);
    }
    for &(a, b, c) in &FANO_LINES {
        for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
            t[x][y] = (1.0, z);
            t[y][x] = (-1.0, z);
        }
    }
    t
}

pub fn octonion_multiply(x: &Octonion, y: &Octonion) -> Octonion {
    thread_local! {
        static T: [[(f64, usize); 8]; 8] = table();
    }
    T.with(|t| {
        let mut out = [0.0; 8];
        for i in 0..8 {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..8 {
                let (s, k) = t[i][j];
                out[k] += s * x[i] * y[j];
            }
        }
        out
    })
}

/// The shipped multiplication table as signed index pairs.
#[derive(Clone, Debug)]
pub struct OctonionAlgebra {
    pub table: [[(f64, usize); 8]; 8],
}

impl Default for OctonionAlgebra {
    fn default() -> Self {
        OctonionAlgebra { table: table() }
    }
}

impl OctonionAlgebra {
    pub fn multiply(&self, x: &Octonion, y: &Octonion) -> Octonion {
        octonion_multiply(x, y)
    }

    /// `(xy)z − x(yz)`.
    pub fn associator(&self, x: &Octonion, y: &Octonion, z: &Octonion) -> Octonion {
        let a = octonion_multiply(&octonion_multiply(x, y), z);
        let b = octonion_multiply(x, &octonion_multiply(y, z));
        std::array::from_fn(|i| a[i] - b[i])
    }

    /// Largest component of `(x, x, y)` and `(x, y, y)`.
    pub fn alternativity_residual(&self, x: &Octonion, y: &Octonion) -> f64 {
        let l = self.associator(x, x, y);
        let r = self.associator(x, y, y);
        l.iter().chain(r.iter()).fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn norm(x: &Octonion) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn basis(i: usize) -> Octonion {
    let mut e = [0.0; 8];
    e[i] = 1.0;
    e
}

/// Imaginary part embedded as an octonion.
pub fn imaginary(v: &[f64]) -> Octonion {
    let mut o = [0.0; 8];
    o[1..].copy_from_slice(&v[..7]);
    o
}

/// Matrix of `v ↦ Im(x v)` on `Im O ≅ R⁷`, the cross product with `x`.
pub fn cross_matrix(x: &[f64]) -> DMatrix<f64> {
    let xo = imaginary(x);
    let mut m = DMatrix::zeros(7, 7);
    for c in 0..7 {
        let p = octonion_multiply(&xo, &basis(c + 1));
        for r in 0..7 {
            m[(r, c)] = p[r + 1];
        }
    }
    m
}

/// `J_x(v) = x·v` on `T_x S⁶ = x^⊥ ∩ Im O`, returned as a `7 × 7` matrix
/// that vanishes on `x` itself.
#[derive(Clone, Debug)]
pub struct CayleyMap {
    pub x: DVector<f64>,
    pub matrix: DMatrix<f64>,
}

impl CayleyMap {
    /// Orthonormal basis of `T_x S⁶` as the columns of a `7 × 6` matrix.
    pub fn tangent_basis(&self) -> DMatrix<f64> {
        let mut cols: Vec<DVector<f64>> = vec![self.x.clone()];
        for i in 0..7 {
            let mut v = DVector::zeros(7);
            v[i] = 1.0;
            for c in &cols {
                let p = c.dot(&v);
                v -= c * p;
            }
            if v.norm() > 1e-6 {
                let n = v.norm();
                cols.push(v / n);
            }
        }
        DMatrix::from_columns(&cols[1..7])
    }
}

pub fn cayley_structure(x: &[f64]) -> Result<CayleyMap, OctonionError> {
    let (re, im) = if x.len() == 8 { (x[0], &x[1..]) } else { (0.0, x) };
    let n = im.iter().map(|v| v * v).sum::<f64>().sqrt();
    if im.len() != 7 || (n - 1.0).abs() > 1e-10 || re.abs() > 1e-10 {
        return Err(OctonionError::NotUnitImaginary { norm: (n * n + re * re).sqrt(), re });
    }
    let xv = DVector::from_column_slice(im);
    let proj = DMatrix::identity(7, 7) - &xv * xv.transpose();
    Ok(CayleyMap { matrix: &proj * cross_matrix(im) * &proj, x: xv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squares_and_table_sign() {
        for i in 1..8 {
            assert_eq!(octonion_multiply(&basis(i), &basis(i)), {
                let mut m = [0.0; 8];
                m[0] = -1.0;
                m
            });
        }
        assert_eq!(octonion_multiply(&basis(1), &basis(2)), basis(3));
        assert_eq!(octonion_multiply(&basis(2), &basis(1)).map(|v| -v), basis(3));
    }

    #[test]
    fn rejects_non_unit_points() {
        assert!(cayley_structure(&[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(cayley_structure(&[0.1, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }
}
