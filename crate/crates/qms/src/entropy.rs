//! Relative entropy, entropy production and the BKM Hessian.

use serde::{Deserialize, Serialize};

use crate::bkm::BkmForm;
use crate::error::{QmsError, Result};
use crate::generator::LindbladGenerator;
use crate::linalg::{herm_eig, herm_fn, hermitian_defect, pairing, trace, CMatrix};
use crate::state::DensityMatrix;

/// Tangent-space membership tolerance.
pub const TANGENT_TOL: f64 = 1e-10;

fn log_of(rho: &CMatrix) -> Result<CMatrix> {
    let (vals, _) = herm_eig(rho);
    if vals[0] <= 0.0 {
        return Err(QmsError::SingularState(vals[0]));
    }
    Ok(herm_fn(rho, f64::ln))
}

/// `Tr[ρ (log ρ - log σ)]`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    relative_entropy_of(rho.matrix(), sigma.matrix())
}

/// As [`relative_entropy`] for any positive Hermitian `ρ`, without the trace
/// normalisation check (used on perturbations `σ + εA`).
pub fn relative_entropy_of(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let diff = log_of(rho)? - log_of(sigma)?;
    Ok(pairing(rho, &diff).re)
}

/// `I_σ(ρ) = -Tr[(log ρ - log σ) L†ρ]`.
pub fn entropy_production(rho: &DensityMatrix, sigma: &DensityMatrix, gen: &LindbladGenerator) -> Result<f64> {
    entropy_production_of(rho.matrix(), sigma.matrix(), gen)
}

pub fn entropy_production_of(rho: &CMatrix, sigma: &CMatrix, gen: &LindbladGenerator) -> Result<f64> {
    let diff = log_of(rho)? - log_of(sigma)?;
    Ok(-pairing(&diff, &gen.apply_dagger(rho)).re)
}

/// `∂_ε H_σ(ρ + εA)` at 0, `Tr[(log ρ - log σ) A]` for traceless `A`.
pub fn entropy_derivative(rho: &DensityMatrix, sigma: &DensityMatrix, a: &CMatrix) -> Result<f64> {
    let diff = log_of(rho.matrix())? - log_of(sigma.matrix())?;
    Ok(pairing(&diff, a).re)
}

/// `max(|A - A^*|, |Tr A|)`.
pub fn tangent_defect(a: &CMatrix) -> f64 {
    hermitian_defect(a).max(trace(a).norm())
}

fn require_tangent(a: &CMatrix) -> Result<()> {
    let defect = tangent_defect(a);
    if defect > TANGENT_TOL {
        return Err(QmsError::NotTangent(defect));
    }
    Ok(())
}

/// `h(A, B) = <A, M_σ^{-1} B>`, the Hessian of `H_σ` at σ.
pub fn hessian_form(sigma: &DensityMatrix, a: &CMatrix, b: &CMatrix) -> Result<f64> {
    require_tangent(a)?;
    require_tangent(b)?;
    let form = BkmForm::new(sigma)?;
    Ok(pairing(a, &form.inv_apply(b)).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HessianCheck {
    /// Richardson-extrapolated second difference of `ε ↦ I_σ(σ + εA)`.
    pub lhs: f64,
    /// `-2 <A, M_σ^{-1} L† A>`.
    pub rhs: f64,
    pub gap: f64,
    pub step: f64,
}

/// Largest `ε` with `σ ± εA` positive definite.
pub fn positivity_range(sigma: &DensityMatrix, a: &CMatrix) -> f64 {
    let norm = crate::linalg::op_norm(a);
    if norm == 0.0 {
        f64::INFINITY
    } else {
        sigma.min_eigenvalue() / norm
    }
}

/// Compares the second derivative of entropy production at σ with the BKM
/// closed form. Uses central differences at `step` and `step/2`.
///
/// At σ, `log(σ + εA) - log σ = ε M_σ^{-1} A + O(ε²)` and `L†(σ + εA) =
/// εL†A`, so `I_σ(σ + εA) = -ε² <M_σ^{-1} A, L† A> + O(ε³)`.
pub fn entropy_production_hessian_check(sigma: &DensityMatrix, gen: &LindbladGenerator, a: &CMatrix, step: f64) -> Result<HessianCheck> {
    require_tangent(a)?;
    let form = BkmForm::new(sigma)?;
    let rhs = -2.0 * pairing(a, &form.inv_apply(&gen.apply_dagger(a))).re;
    let max = positivity_range(sigma, a);
    if !(step < max) {
        return Err(QmsError::StepTooLarge { step, max });
    }
    let s = sigma.matrix();
    let i_at = |e: f64| entropy_production_of(&(s + a.scale(e)), s, gen);
    let i0 = i_at(0.0)?;
    let d2 = |h: f64| -> Result<f64> { Ok((i_at(h)? - 2.0 * i0 + i_at(-h)?) / (h * h)) };
    let (coarse, fine) = (d2(step)?, d2(0.5 * step)?);
    let lhs = (4.0 * fine - coarse) / 3.0;
    Ok(HessianCheck { lhs, rhs, gap: (lhs - rhs).abs(), step })
}

/// Mixed second difference of `H_σ(σ + εA + ηB)` at 0, Richardson-refined.
pub fn hessian_by_differences(sigma: &DensityMatrix, a: &CMatrix, b: &CMatrix, step: f64) -> Result<f64> {
    let s = sigma.matrix();
    let h = |e: f64, n: f64| relative_entropy_of(&(s + a.scale(e) + b.scale(n)), s);
    let mixed = |k: f64| -> Result<f64> { Ok((h(k, k)? - h(k, -k)? - h(-k, k)? + h(-k, -k)?) / (4.0 * k * k)) };
    let (coarse, fine) = (mixed(step)?, mixed(0.5 * step)?);
    Ok((4.0 * fine - coarse) / 3.0)
}
