//! The operator `M_σ(B) = ∫_0^1 σ^{1-s} B σ^s ds` and its inverse, in the
//! eigenbasis of σ.

use crate::error::{QmsError, Result};
use crate::generator::LindbladGenerator;
use crate::linalg::{herm_eig, op_norm, unit, vec_of, CMatrix};
use crate::state::DensityMatrix;

/// Logarithmic mean `(a - b) / (ln a - ln b)`, `a` when equal.
pub fn log_mean(a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    if 0.5 * b <= a && a <= 2.0 * b {
        // a - b is exact here, and ln_1p keeps the log ratio accurate.
        let d = a - b;
        return d / (d / b).ln_1p();
    }
    (a - b) / (a.ln() - b.ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BkmForm {
    eigenvalues: Vec<f64>,
    unitary: CMatrix,
    /// `W_{ij}`, the logarithmic mean of `λ_i` and `λ_j`.
    weights: Vec<Vec<f64>>,
}

impl BkmForm {
    pub fn new(sigma: &DensityMatrix) -> Result<Self> {
        let (eigenvalues, unitary) = herm_eig(sigma.matrix());
        if eigenvalues[0] <= 0.0 {
            return Err(QmsError::SingularState(eigenvalues[0]));
        }
        let weights = eigenvalues.iter().map(|&a| eigenvalues.iter().map(|&b| log_mean(a, b)).collect()).collect();
        Ok(BkmForm { eigenvalues, unitary, weights })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    fn scaled(&self, b: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
        let u = &self.unitary;
        let mut m = u.adjoint() * b * u;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                m[(i, j)] *= f(self.weights[i][j]);
            }
        }
        u * m * u.adjoint()
    }

    /// `M_σ(B)`.
    pub fn apply(&self, b: &CMatrix) -> CMatrix {
        self.scaled(b, |w| w)
    }

    /// `M_σ^{-1}(B) = ∫_0^∞ (t+σ)^{-1} B (t+σ)^{-1} dt`.
    pub fn inv_apply(&self, b: &CMatrix) -> CMatrix {
        self.scaled(b, |w| 1.0 / w)
    }

    /// `d² x d²` matrix of `M_σ` on column-major vectorisations.
    pub fn superoperator(&self) -> CMatrix {
        superop_of(self.dim(), |b| self.apply(b))
    }

    pub fn inverse_superoperator(&self) -> CMatrix {
        superop_of(self.dim(), |b| self.inv_apply(b))
    }
}

pub(crate) fn superop_of(d: usize, f: impl Fn(&CMatrix) -> CMatrix) -> CMatrix {
    let mut m = CMatrix::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            m.set_column(j * d + i, &vec_of(&f(&unit(d, i, j))));
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DetailedBalance {
    pub pass: bool,
    /// `|M_σ L - L† M_σ|` in operator norm.
    pub defect: f64,
    /// `|L|` in operator norm.
    pub generator_norm: f64,
    pub tol: f64,
}

/// `M_σ L = L† M_σ`, to `tol * |L|`.
pub fn check_bkm_detailed_balance(gen: &LindbladGenerator, sigma: &DensityMatrix, tol: f64) -> Result<DetailedBalance> {
    let form = BkmForm::new(sigma)?;
    let m = form.superoperator();
    let defect = op_norm(&(&m * gen.superop() - gen.superop_dagger() * &m));
    let generator_norm = op_norm(gen.superop());
    Ok(DetailedBalance { pass: defect <= tol * generator_norm, defect, generator_norm, tol })
}

/// The same criterion through the inverse: `M_σ^{-1} L† = L M_σ^{-1}`.
pub fn check_inverse_bkm_detailed_balance(gen: &LindbladGenerator, sigma: &DensityMatrix, tol: f64) -> Result<DetailedBalance> {
    let form = BkmForm::new(sigma)?;
    let m = form.inverse_superoperator();
    let defect = op_norm(&(&m * gen.superop_dagger() - gen.superop() * &m));
    let generator_norm = op_norm(gen.superop());
    // M^{-1} scales like 1/λ; compare against |M^{-1}| |L|.
    let scale = op_norm(&m) * generator_norm;
    Ok(DetailedBalance { pass: defect <= tol * scale, defect, generator_norm, tol })
}
