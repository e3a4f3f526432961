//! Lie algebras by structure constants, root planes and Samelson complex structures.
//!
//! Every algebra is built from a complex matrix representation: Cartan
//! elements `iH_a` and, per positive root vector `E`, the real pair
//! `u = i(E + E†)`, `v = E − E†`. The basis is then orthonormalized against
//! the negative Killing form, so the structure constants are totally
//! antisymmetric and `ad(h)` acts on each `(u, v)` plane as a rotation.
//!
//! Sign convention for Samelson structures: a root sign `s` puts
//! `J u = s v`, `J v = −s u` on the root plane. The `−i` eigenspace of `J`
//! then contains `E_α` for `s = +1` and `E_{−α}` for `s = −1`; the
//! eigenspace is a subalgebra iff whenever `α`, `β` and `α + β` are all
//! positive, `s(α) = s(β)` forces `s(α + β)` to agree.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for identities that are exact in rational arithmetic.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum LieError {
    #[error("unknown algebra `{0}` (expected one of u1, su2, su2_su2, su3, g2)")]
    UnknownAlgebra(String),
    #[error("algebra `{0}` is not semisimple")]
    NotSemisimple(String),
    #[error("closure residual {0:.3e} exceeds 1e-10")]
    EmbeddingFailure(f64),
    #[error("the -i eigenspace is not a subalgebra (closure residual {0:.3e})")]
    NotSubalgebra(f64),
    #[error("J^2 + Id has norm {0:.3e}")]
    NotAlmostComplex(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("malformed algebra data: {0}")]
    Malformed(String),
}

/// A real Lie algebra in a fixed basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LieAlgebraSpec {
    pub name: String,
    pub dim: usize,
    pub basis_labels: Vec<String>,
    /// `c^k_{ij}` stored row-major as `[(i * dim + j) * dim + k]`.
    pub structure_constants: Vec<f64>,
    /// Row-major `dim × dim`.
    pub killing_form: Vec<f64>,
    /// Basis indices spanning the Cartan subalgebra.
    pub cartan: Vec<usize>,
    /// Per positive root, the `(u, v)` indices spanning its real root plane.
    pub root_pairs: Vec<(usize, usize)>,
    /// Human-readable positive root names, parallel to `root_pairs`.
    pub root_names: Vec<String>,
}

impl LieAlgebraSpec {
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure_constants[(i * self.dim + j) * self.dim + k]
    }

    pub fn killing(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.killing_form)
    }

    /// `ad(e_i)` as a matrix: column `j` holds the coordinates of `[e_i, e_j]`.
    pub fn ad(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, j| self.c(i, j, k))
    }

    pub fn ad_of(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            if x[i] != 0.0 {
                m += self.ad(i) * x[i];
            }
        }
        m
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += xy * self.structure_constants[base + k];
                }
            }
        }
        out
    }

    pub fn bracket_c(&self, x: &DVector<Complex64>, y: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.dim;
        let mut out = DVector::from_element(n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy.norm_sqr() == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += xy * self.structure_constants[base + k];
                }
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r = r.max((self.c(i, j, k) + self.c(j, i, k)).abs());
                }
            }
        }
        r
    }

    /// Brute-force Jacobi residual over all index quadruples.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        let mut s = 0.0;
                        for k in 0..n {
                            s += self.c(i, j, k) * self.c(k, l, m)
                                + self.c(j, l, k) * self.c(k, i, m)
                                + self.c(l, i, k) * self.c(k, j, m);
                        }
                        r = r.max(s.abs());
                    }
                }
            }
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("algebra spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, LieError> {
        let spec: LieAlgebraSpec =
            serde_json::from_str(s).map_err(|e| LieError::Malformed(e.to_string()))?;
        let n = spec.dim;
        if spec.structure_constants.len() != n * n * n
            || spec.killing_form.len() != n * n
            || spec.basis_labels.len() != n
        {
            return Err(LieError::Malformed("array lengths do not match dim".into()));
        }
        if spec.cartan.iter().chain(spec.root_pairs.iter().flat_map(|p| [&p.0, &p.1])).any(|&i| i >= n) {
            return Err(LieError::Malformed("basis index out of range".into()));
        }
        Ok(spec)
    }
}

type CMat = DMatrix<Complex64>;

fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

fn diag(entries: &[f64]) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| if i == j { Complex64::new(entries[i], 0.0) } else { Complex64::new(0.0, 0.0) })
}

fn comm(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Real coordinates of matrix `m` in the real span of `basis` (least squares).
struct Coordinatizer {
    pinv: DMatrix<f64>,
}

impl Coordinatizer {
    fn new(basis: &[CMat]) -> Self {
        let rows = 2 * basis[0].len();
        let v = DMatrix::from_fn(rows, basis.len(), |r, c| flat(&basis[c])[r]);
        let gram = v.transpose() * &v;
        let inv = gram.try_inverse().expect("basis matrices are linearly independent");
        Coordinatizer { pinv: inv * v.transpose() }
    }

    fn coords(&self, m: &CMat) -> DVector<f64> {
        &self.pinv * DVector::from_vec(flat(m))
    }
}

fn flat(m: &CMat) -> Vec<f64> {
    m.iter().map(|z| z.re).chain(m.iter().map(|z| z.im)).collect()
}

fn structure_from_matrices(basis: &[CMat]) -> Vec<f64> {
    let n = basis.len();
    let coord = Coordinatizer::new(basis);
    let mut c = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let x = coord.coords(&comm(&basis[i], &basis[j]));
            for k in 0..n {
                // Round away float dust from the least-squares solve.
                let v = x[k];
                c[(i * n + j) * n + k] = if v.abs() < 1e-14 { 0.0 } else { v };
            }
        }
    }
    c
}

fn killing_from(c: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                // tr(ad_i ad_j) = Σ_{a,b} c^a_{ib} c^b_{ja}
                s += c[(i * n + b) * n + a] * c[(j * n + a) * n + b];
            }
        }
        s
    })
}

fn from_matrix_rep(
    name: &str,
    cartan_h: Vec<CMat>,
    roots: Vec<(String, CMat)>,
) -> LieAlgebraSpec {
    let i_unit = Complex64::new(0.0, 1.0);
    let rank = cartan_h.len();
    let mut basis: Vec<CMat> = cartan_h.iter().map(|h| h * i_unit).collect();
    for (_, e) in &roots {
        let ed = e.adjoint();
        basis.push((e + &ed) * i_unit);
        basis.push(e - &ed);
    }
    let n = basis.len();
    let k = killing_from(&structure_from_matrices(&basis), n);
    let neg = |ca: &DVector<f64>, cb: &DVector<f64>| -(ca.transpose() * &k * cb)[(0, 0)];

    // Gram-Schmidt on the Cartan block only; root planes are already
    // Killing-orthogonal to everything else.
    let mut coeffs: Vec<DVector<f64>> = Vec::with_capacity(n);
    for a in 0..rank {
        let mut v = DVector::zeros(n);
        v[a] = 1.0;
        for prev in coeffs.iter() {
            let p = neg(&v, prev);
            v -= prev * p;
        }
        let nrm = neg(&v, &v).sqrt();
        coeffs.push(v / nrm);
    }
    for a in rank..n {
        let mut v = DVector::zeros(n);
        v[a] = 1.0;
        let nrm = neg(&v, &v).sqrt();
        coeffs.push(v / nrm);
    }
    let ortho: Vec<CMat> = coeffs
        .iter()
        .map(|cv| {
            let mut m = CMat::zeros(basis[0].nrows(), basis[0].ncols());
            for (idx, w) in cv.iter().enumerate() {
                if *w != 0.0 {
                    m += &basis[idx] * Complex64::new(*w, 0.0);
                }
            }
            m
        })
        .collect();

    let c = structure_from_matrices(&ortho);
    let killing = killing_from(&c, n);
    let mut labels: Vec<String> = (1..=rank).map(|a| format!("h{a}")).collect();
    for (r, _) in &roots {
        labels.push(format!("u[{r}]"));
        labels.push(format!("v[{r}]"));
    }
    LieAlgebraSpec {
        name: name.to_string(),
        dim: n,
        basis_labels: labels,
        structure_constants: c,
        killing_form: killing.transpose().as_slice().to_vec(),
        cartan: (0..rank).collect(),
        root_pairs: (0..roots.len()).map(|r| (rank + 2 * r, rank + 2 * r + 1)).collect(),
        root_names: roots.into_iter().map(|(r, _)| r).collect(),
    }
}

/// The 7-dimensional representation of g₂ from its Chevalley generators.
fn g2_rep() -> (Vec<CMat>, Vec<(String, CMat)>) {
    let s2 = Complex64::new(2f64.sqrt(), 0.0);
    let e = |i: usize, j: usize| unit(7, i - 1, j - 1);
    let e1 = e(1, 2) + e(3, 4) * s2 + e(4, 5) * s2 + e(6, 7);
    let e2 = e(2, 3) + e(5, 6);
    let h1 = diag(&[1.0, -1.0, 2.0, 0.0, -2.0, 1.0, -1.0]);
    let h2 = diag(&[0.0, 1.0, -1.0, 0.0, 1.0, -1.0, 0.0]);
    let e12 = comm(&e1, &e2);
    let e112 = comm(&e1, &e12);
    let e1112 = comm(&e1, &e112);
    let e21112 = comm(&e2, &e1112);
    let roots = vec![
        ("a1".to_string(), e1),
        ("a2".to_string(), e2),
        ("a1+a2".to_string(), e12),
        ("2a1+a2".to_string(), e112),
        ("3a1+a2".to_string(), e1112),
        ("3a1+2a2".to_string(), e21112),
    ];
    (vec![h1, h2], roots)
}

/// Builds one of the shipped algebras: `u1`, `su2`, `su2_su2`, `su3`, `g2`.
pub fn build_algebra(name: &str) -> Result<LieAlgebraSpec, LieError> {
    match name {
        "u1" => Ok(LieAlgebraSpec {
            name: "u1".into(),
            dim: 1,
            basis_labels: vec!["h1".into()],
            structure_constants: vec![0.0],
            // Abelian: the Killing form vanishes identically.
            killing_form: vec![0.0],
            cartan: vec![0],
            root_pairs: vec![],
            root_names: vec![],
        }),
        "su2" => Ok(from_matrix_rep(
            "su2",
            vec![diag(&[1.0, -1.0])],
            vec![("a".into(), unit(2, 0, 1))],
        )),
        "su2_su2" => Ok(from_matrix_rep(
            "su2_su2",
            vec![diag(&[1.0, -1.0, 0.0, 0.0]), diag(&[0.0, 0.0, 1.0, -1.0])],
            vec![("a".into(), unit(4, 0, 1)), ("b".into(), unit(4, 2, 3))],
        )),
        "su3" => {
            let r3 = 3f64.sqrt();
            Ok(from_matrix_rep(
                "su3",
                vec![diag(&[1.0, -1.0, 0.0]), diag(&[1.0 / r3, 1.0 / r3, -2.0 / r3])],
                vec![
                    ("a".into(), unit(3, 0, 1)),
                    ("b".into(), unit(3, 1, 2)),
                    ("a+b".into(), unit(3, 0, 2)),
                ],
            ))
        }
        "g2" => {
            let (h, roots) = g2_rep();
            Ok(from_matrix_rep("g2", h, roots))
        }
        other => Err(LieError::UnknownAlgebra(other.to_string())),
    }
}

/// Cartan subalgebra plus positive root planes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootSystem {
    pub cartan_dim: usize,
    pub cartan_basis_indices: Vec<usize>,
    /// Root covectors evaluated on the orthonormal Cartan basis.
    pub positive_roots: Vec<Vec<f64>>,
    pub root_space_pairs: Vec<(usize, usize)>,
    pub root_names: Vec<String>,
    /// False for the abelian `u1`, which has no roots at all.
    pub semisimple: bool,
}

impl RootSystem {
    pub fn root_length(&self, r: usize) -> f64 {
        self.positive_roots[r].iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Max residual of `[h, plane] ⊆ plane` over Cartan elements and root planes.
    pub fn plane_invariance_residual(&self, spec: &LieAlgebraSpec) -> f64 {
        let mut r: f64 = 0.0;
        for &h in &self.cartan_basis_indices {
            for &(u, v) in &self.root_space_pairs {
                for x in [u, v] {
                    for k in 0..spec.dim {
                        if k != u && k != v {
                            r = r.max(spec.c(h, x, k).abs());
                        }
                    }
                }
            }
        }
        r
    }
}

/// Root decomposition read off from the Cartan action on each root plane.
///
/// The abelian `u1` yields a Cartan-only system with `semisimple = false`.
pub fn root_decomposition(spec: &LieAlgebraSpec) -> RootSystem {
    let roots = spec
        .root_pairs
        .iter()
        .map(|&(u, v)| spec.cartan.iter().map(|&h| spec.c(h, v, u)).collect())
        .collect();
    RootSystem {
        cartan_dim: spec.cartan.len(),
        cartan_basis_indices: spec.cartan.clone(),
        positive_roots: roots,
        root_space_pairs: spec.root_pairs.clone(),
        root_names: spec.root_names.clone(),
        semisimple: !spec.root_pairs.is_empty(),
    }
}

/// A left-invariant almost complex structure assembled per root plane.
#[derive(Clone, Debug)]
pub struct SamelsonStructure {
    pub algebra: LieAlgebraSpec,
    pub j: DMatrix<f64>,
    pub cartan_block: DMatrix<f64>,
    pub root_signs: Vec<i8>,
    /// Max leakage of `[s, s]` out of `s`.
    pub closure_residual: f64,
}

/// The 90° rotation on a `2m`-dimensional Cartan.
pub fn standard_rotation(m2: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(m2, m2);
    for p in 0..m2 / 2 {
        j[(2 * p + 1, 2 * p)] = 1.0;
        j[(2 * p, 2 * p + 1)] = -1.0;
    }
    j
}

/// Assembles `J` without checking the Samelson condition.
pub fn assemble_j(spec: &LieAlgebraSpec, cartan_rotation: &DMatrix<f64>, signs: &[i8]) -> Result<DMatrix<f64>, LieError> {
    let rank = spec.cartan.len();
    if spec.dim % 2 != 0 {
        return Err(LieError::Shape(format!("{} has odd dimension {}", spec.name, spec.dim)));
    }
    if cartan_rotation.shape() != (rank, rank) {
        return Err(LieError::Shape(format!("cartan rotation must be {rank}x{rank}")));
    }
    if signs.len() != spec.root_pairs.len() || signs.iter().any(|s| *s != 1 && *s != -1) {
        return Err(LieError::Shape(format!("expected {} signs in {{+1, -1}}", spec.root_pairs.len())));
    }
    let j0sq = cartan_rotation * cartan_rotation + DMatrix::identity(rank, rank);
    if j0sq.amax() > 1e-10 {
        return Err(LieError::NotAlmostComplex(j0sq.amax()));
    }
    let mut j = DMatrix::zeros(spec.dim, spec.dim);
    for (a, &ia) in spec.cartan.iter().enumerate() {
        for (b, &ib) in spec.cartan.iter().enumerate() {
            j[(ia, ib)] = cartan_rotation[(a, b)];
        }
    }
    for (&(u, v), &s) in spec.root_pairs.iter().zip(signs) {
        let s = s as f64;
        j[(v, u)] = s;
        j[(u, v)] = -s;
    }
    Ok(j)
}

/// Max over basis pairs of the `+i` component of `[w_a, w_b]`, `w = x + iJx`.
pub fn closure_residual(spec: &LieAlgebraSpec, j: &DMatrix<f64>) -> f64 {
    let n = spec.dim;
    let i_unit = Complex64::new(0.0, 1.0);
    let jc = j.map(|x| Complex64::new(x, 0.0));
    let ws: Vec<DVector<Complex64>> = (0..n)
        .map(|a| {
            let mut e = DVector::from_element(n, Complex64::new(0.0, 0.0));
            e[a] = Complex64::new(1.0, 0.0);
            let je = &jc * &e;
            e + je * i_unit
        })
        .collect();
    // Projector onto the +i eigenspace along s.
    let p_plus = (DMatrix::<Complex64>::identity(n, n) - &jc * i_unit) * Complex64::new(0.5, 0.0);
    let mut r: f64 = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let br = spec.bracket_c(&ws[a], &ws[b]);
            let leak = &p_plus * br;
            r = r.max(leak.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    r
}

/// Builds `J` from a Cartan rotation and per-root signs and checks that its
/// `−i` eigenspace is closed under the bracket.
pub fn build_samelson(
    spec: &LieAlgebraSpec,
    cartan_rotation: &DMatrix<f64>,
    signs: &[i8],
) -> Result<SamelsonStructure, LieError> {
    let j = assemble_j(spec, cartan_rotation, signs)?;
    let res = closure_residual(spec, &j);
    if res > 1e-10 {
        return Err(LieError::NotSubalgebra(res));
    }
    Ok(SamelsonStructure {
        algebra: spec.clone(),
        j,
        cartan_block: cartan_rotation.clone(),
        root_signs: signs.to_vec(),
        closure_residual: res,
    })
}

/// Dense rank-3 array `N[(i, j, k)]` = k-th coordinate of `N(e_i, e_j)`.
#[derive(Clone, Debug)]
pub struct Tensor3 {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 { n, data: vec![0.0; n * n * n] }
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Nijenhuis tensor of a left-invariant `J` at the identity, from structure
/// constants: `N(X,Y) = [X,Y] − [JX,JY] + J[X,JY] + J[JX,Y]`.
pub fn nijenhuis_at_identity(spec: &LieAlgebraSpec, j: &DMatrix<f64>) -> Result<Tensor3, LieError> {
    let n = spec.dim;
    if j.shape() != (n, n) {
        return Err(LieError::Shape(format!("J must be {n}x{n}")));
    }
    let sq = j * j + DMatrix::identity(n, n);
    if sq.amax() > 1e-10 {
        return Err(LieError::NotAlmostComplex(sq.amax()));
    }
    let cols: Vec<DVector<f64>> = (0..n).map(|a| j.column(a).into_owned()).collect();
    let mut out = Tensor3::zeros(n);
    for a in 0..n {
        let mut ea = DVector::zeros(n);
        ea[a] = 1.0;
        for b in 0..n {
            let mut eb = DVector::zeros(n);
            eb[b] = 1.0;
            let v = spec.bracket(&ea, &eb) - spec.bracket(&cols[a], &cols[b])
                + j * (spec.bracket(&ea, &cols[b]) + spec.bracket(&cols[a], &eb));
            for k in 0..n {
                out.set(a, b, k, v[k]);
            }
        }
    }
    Ok(out)
}

/// su(3) inside g₂ as Cartan plus long root planes, with the short root
/// planes as reductive complement.
#[derive(Clone, Debug)]
pub struct SubalgebraEmbedding {
    pub ambient: LieAlgebraSpec,
    /// Ambient basis indices spanning the subalgebra.
    pub sub_indices: Vec<usize>,
    /// Ambient basis indices spanning the complement.
    pub complement_indices: Vec<usize>,
    pub sub_basis: Vec<DVector<f64>>,
    pub complement_basis: Vec<DVector<f64>>,
    /// Positive root indices (into the ambient root list) of the subalgebra.
    pub sub_roots: Vec<usize>,
    pub shared_cartan: bool,
    pub closure_residual: f64,
    pub reductive_residual: f64,
}

fn span_leak(spec: &LieAlgebraSpec, a: &[usize], b: &[usize], target: &[usize]) -> f64 {
    let mut r: f64 = 0.0;
    for &i in a {
        for &j in b {
            for k in 0..spec.dim {
                if !target.contains(&k) {
                    r = r.max(spec.c(i, j, k).abs());
                }
            }
        }
    }
    r
}

pub fn embed_su3_in_g2(g2: &LieAlgebraSpec) -> Result<SubalgebraEmbedding, LieError> {
    if g2.dim != 14 || g2.cartan.len() != 2 || g2.root_pairs.len() != 6 {
        return Err(LieError::Shape("expected g2 with rank 2 and 6 positive roots".into()));
    }
    let rs = root_decomposition(g2);
    let longest = (0..6).map(|r| rs.root_length(r)).fold(0.0, f64::max);
    let sub_roots: Vec<usize> = (0..6).filter(|&r| (rs.root_length(r) - longest).abs() < 1e-9).collect();
    let mut sub = g2.cartan.clone();
    let mut comp = Vec::new();
    for (r, &(u, v)) in g2.root_pairs.iter().enumerate() {
        if sub_roots.contains(&r) {
            sub.extend([u, v]);
        } else {
            comp.extend([u, v]);
        }
    }
    let closure = span_leak(g2, &sub, &sub, &sub);
    let reductive = span_leak(g2, &sub, &comp, &comp);
    if closure > 1e-10 || reductive > 1e-10 || sub.len() != 8 {
        return Err(LieError::EmbeddingFailure(closure.max(reductive)));
    }
    let unit_vec = |i: usize| {
        let mut v = DVector::zeros(14);
        v[i] = 1.0;
        v
    };
    Ok(SubalgebraEmbedding {
        ambient: g2.clone(),
        sub_basis: sub.iter().map(|&i| unit_vec(i)).collect(),
        complement_basis: comp.iter().map(|&i| unit_vec(i)).collect(),
        sub_indices: sub,
        complement_indices: comp,
        sub_roots,
        shared_cartan: true,
        closure_residual: closure,
        reductive_residual: reductive,
    })
}

/// Off-block norms of `J` for the su(3) ⊕ m splitting, plus the diagonal blocks.
#[derive(Clone, Debug)]
pub struct BlockReport {
    /// Frobenius norm of `P_m J P_su3`.
    pub m_from_sub: f64,
    /// Frobenius norm of `P_su3 J P_m`.
    pub sub_from_m: f64,
    /// `J` restricted to su(3), in `sub_basis` coordinates.
    pub q: DMatrix<f64>,
    /// `J` restricted to m, in `complement_basis` coordinates.
    pub phi: DMatrix<f64>,
}

impl BlockReport {
    pub fn off_block_norm(&self) -> f64 {
        self.m_from_sub.max(self.sub_from_m)
    }
    pub fn phi_square_residual(&self) -> f64 {
        let n = self.phi.nrows();
        (&self.phi * &self.phi + DMatrix::identity(n, n)).amax()
    }
}

pub fn blockdiagonal_check(emb: &SubalgebraEmbedding, j: &DMatrix<f64>) -> BlockReport {
    let s = DMatrix::from_columns(&emb.sub_basis);
    let m = DMatrix::from_columns(&emb.complement_basis);
    BlockReport {
        m_from_sub: (m.transpose() * j * &s).norm(),
        sub_from_m: (s.transpose() * j * &m).norm(),
        q: s.transpose() * j * &s,
        phi: m.transpose() * j * &m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_names() {
        for (n, d) in [("u1", 1), ("su2", 3), ("su2_su2", 6), ("su3", 8), ("g2", 14)] {
            let s = build_algebra(n).unwrap();
            assert_eq!(s.dim, d, "{n}");
            assert_eq!(s.basis_labels.len(), d);
        }
        assert_eq!(build_algebra("e8").unwrap_err(), LieError::UnknownAlgebra("e8".into()));
    }

    #[test]
    fn killing_is_minus_identity_for_semisimple() {
        for n in ["su2", "su2_su2", "su3", "g2"] {
            let s = build_algebra(n).unwrap();
            let k = s.killing() + DMatrix::identity(s.dim, s.dim);
            assert!(k.amax() < 1e-12, "{n}: {}", k.amax());
        }
    }

    #[test]
    fn u1_is_abelian() {
        let s = build_algebra("u1").unwrap();
        assert!(s.structure_constants.iter().all(|c| *c == 0.0));
        assert!(!root_decomposition(&s).semisimple);
    }

    #[test]
    fn root_lengths_of_g2_split_three_three() {
        let g2 = build_algebra("g2").unwrap();
        let rs = root_decomposition(&g2);
        let mut lens: Vec<f64> = (0..6).map(|r| rs.root_length(r)).collect();
        lens.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Long/short ratio of g₂ is √3.
        assert!((lens[5] / lens[0] - 3f64.sqrt()).abs() < 1e-12);
        assert!((lens[2] - lens[0]).abs() < 1e-12 && (lens[5] - lens[3]).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let s = build_algebra("su3").unwrap();
        let back = LieAlgebraSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back.structure_constants, s.structure_constants);
        assert!(LieAlgebraSpec::from_json("{\"name\":1}").is_err());
    }

    #[test]
    fn bad_sign_vector_rejected() {
        let s = build_algebra("su3").unwrap();
        let j0 = standard_rotation(2);
        assert!(matches!(build_samelson(&s, &j0, &[1, 1]), Err(LieError::Shape(_))));
        assert!(matches!(build_samelson(&s, &DMatrix::identity(2, 2), &[1, 1, 1]), Err(LieError::NotAlmostComplex(_))));
    }
}
