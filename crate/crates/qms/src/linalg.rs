//! Small complex linear-algebra helpers. Vectorisation is column-major.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr[A^* B]`.
pub fn pairing(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// `|A - A^*|_sup`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

pub fn sup_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn vec_of(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &[Complex64], d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v)
}

/// `E_{ij}`.
pub fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = c(1.0);
    m
}

/// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
pub fn herm_eig(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let d = m.nrows();
    let e = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(d, d, |i, j| e.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// `f` applied to a Hermitian matrix through its spectrum.
pub fn herm_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, u) = herm_eig(m);
    let d = vals.len();
    let fd = CMatrix::from_fn(d, d, |i, j| if i == j { c(f(vals[i])) } else { c(0.0) });
    &u * fd * u.adjoint()
}

/// Orthonormal basis of traceless Hermitian `d x d` matrices under
/// `Tr[A B]`: symmetric, antisymmetric and diagonal generalised Gell-Mann
/// matrices, in that order.
pub fn tangent_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = c(s);
            m[(k, j)] = c(s);
            out.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMatrix::zeros(d, d);
            m[(j, k)] = Complex64::new(0.0, -s);
            m[(k, j)] = Complex64::new(0.0, s);
            out.push(m);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for i in 0..l {
            m[(i, i)] = c(norm);
        }
        m[(l, l)] = c(-(l as f64) * norm);
        out.push(m);
    }
    out
}

/// Real coordinates `Tr[G_j A]` of a Hermitian matrix in a tangent basis.
pub fn coordinates(basis: &[CMatrix], a: &CMatrix) -> Vec<f64> {
    basis.iter().map(|g| pairing(g, a).re).collect()
}

pub fn from_coordinates(basis: &[CMatrix], x: &[f64]) -> CMatrix {
    let d = basis.first().map_or(0, |g| g.nrows());
    basis.iter().zip(x).fold(CMatrix::zeros(d, d), |acc, (g, &v)| acc + g.scale(v))
}
