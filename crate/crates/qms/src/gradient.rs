//! Whether the Lindblad flow is the gradient flow of relative entropy.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bkm::{check_bkm_detailed_balance, check_inverse_bkm_detailed_balance, BkmForm, DetailedBalance};
use crate::entropy::entropy_production;
use crate::error::Result;
use crate::generator::LindbladGenerator;
use crate::linalg::{op_norm, pairing, tangent_basis, CMatrix};
use crate::state::{random_state, stationary_state, DensityMatrix, StateSummary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientOptions {
    /// Interior states sampled for condition (i).
    pub samples: usize,
    pub seed: u64,
    /// Eigenvalue floor of the sampled states.
    pub floor: f64,
    /// Relative tolerance of both detailed-balance defects.
    pub bkm_tol: f64,
    /// `|L†σ|` bound relative to `max(1, |L|)`.
    pub stationarity_tol: f64,
    /// Relative asymmetry allowed in the h-representation of `-L†`.
    pub symmetry_tol: f64,
    /// Smallest eigenvalue accepted for that representation.
    pub min_eigenvalue: f64,
}

impl Default for GradientOptions {
    fn default() -> Self {
        GradientOptions {
            samples: 1000,
            seed: 0,
            floor: 1e-3,
            bkm_tol: 1e-9,
            stationarity_tol: 1e-10,
            symmetry_tol: 1e-8,
            min_eigenvalue: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOne {
    pub samples: usize,
    pub min_production: f64,
    pub violations: usize,
    /// Sample indices with `I_σ(ρ) <= 0`, at most 20.
    pub violating_samples: Vec<usize>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionTwo {
    /// `|L†σ|` in operator norm.
    pub defect: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionThree {
    /// `|Λ - Λ^T| / |Λ|` for `Λ = H^{1/2} (-L) H^{-1/2}`.
    pub symmetry_defect: f64,
    /// Smallest eigenvalue of the symmetric part of `Λ`.
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue of the Hessian Gram matrix `H`.
    pub hessian_min_eigenvalue: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientStructureReport {
    pub d: usize,
    pub sigma: StateSummary,
    pub bkm: DetailedBalance,
    pub inverse_bkm: DetailedBalance,
    pub cond_i: ConditionOne,
    pub cond_ii: ConditionTwo,
    pub cond_iii: ConditionThree,
    /// Conditions (i)-(iii) all hold.
    pub verdict: bool,
    pub bkm_detailed_balance: bool,
    /// `verdict == bkm_detailed_balance`.
    pub equivalence_holds: bool,
    pub options: GradientOptions,
}

/// Real matrices of `L†` and of the Hessian `h` in the Gell-Mann basis:
/// `L_{jk} = Tr[G_j L† G_k]`, `H_{jk} = h(G_j, G_k)`.
pub fn tangent_representation(gen: &LindbladGenerator, sigma: &DensityMatrix) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let basis = tangent_basis(gen.dim());
    let form = BkmForm::new(sigma)?;
    let m = basis.len();
    let images: Vec<CMatrix> = basis.iter().map(|g| gen.apply_dagger(g)).collect();
    let inv: Vec<CMatrix> = basis.iter().map(|g| form.inv_apply(g)).collect();
    let l = DMatrix::from_fn(m, m, |j, k| pairing(&basis[j], &images[k]).re);
    let h = DMatrix::from_fn(m, m, |j, k| pairing(&basis[j], &inv[k]).re);
    Ok((l, (&h + h.transpose()) * 0.5))
}

fn sym_power(h: &DMatrix<f64>, p: f64) -> DMatrix<f64> {
    let e = SymmetricEigen::new(h.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|v| v.powf(p)));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

pub fn condition_three(l: &DMatrix<f64>, h: &DMatrix<f64>, opts: &GradientOptions) -> ConditionThree {
    let hessian_min_eigenvalue = SymmetricEigen::new(h.clone()).eigenvalues.min();
    if l.is_empty() {
        return ConditionThree { symmetry_defect: 0.0, min_eigenvalue: f64::INFINITY, hessian_min_eigenvalue, pass: true };
    }
    let lam = sym_power(h, 0.5) * (-l) * sym_power(h, -0.5);
    let norm = lam.norm().max(f64::MIN_POSITIVE);
    let symmetry_defect = (&lam - lam.transpose()).norm() / norm;
    let min_eigenvalue = SymmetricEigen::new((&lam + lam.transpose()) * 0.5).eigenvalues.min();
    let pass = symmetry_defect <= opts.symmetry_tol && min_eigenvalue > opts.min_eigenvalue && hessian_min_eigenvalue > 0.0;
    ConditionThree { symmetry_defect, min_eigenvalue, hessian_min_eigenvalue, pass }
}

pub fn check_gradient_structure(gen: &LindbladGenerator, opts: &GradientOptions) -> Result<GradientStructureReport> {
    let d = gen.dim();
    let sigma = stationary_state(gen)?;
    let lnorm = op_norm(gen.superop());
    let defect = op_norm(&gen.apply_dagger(sigma.matrix()));
    let cond_ii = ConditionTwo { defect, pass: defect <= opts.stationarity_tol * lnorm.max(1.0) };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut min_production = f64::INFINITY;
    let mut violating = Vec::new();
    let mut violations = 0;
    for k in 0..opts.samples {
        let rho = random_state(d, opts.floor, &mut rng);
        let p = entropy_production(&rho, &sigma, gen)?;
        min_production = min_production.min(p);
        if !(p > 0.0) {
            violations += 1;
            if violating.len() < 20 {
                violating.push(k);
            }
        }
    }
    let cond_i = ConditionOne { samples: opts.samples, min_production, violations, violating_samples: violating, pass: violations == 0 };

    let (l, h) = tangent_representation(gen, &sigma)?;
    let cond_iii = condition_three(&l, &h, opts);
    let bkm = check_bkm_detailed_balance(gen, &sigma, opts.bkm_tol)?;
    let inverse_bkm = check_inverse_bkm_detailed_balance(gen, &sigma, opts.bkm_tol)?;
    let verdict = cond_i.pass && cond_ii.pass && cond_iii.pass;
    Ok(GradientStructureReport {
        d,
        sigma: StateSummary::from(&sigma),
        bkm,
        inverse_bkm,
        cond_i,
        cond_ii,
        cond_iii,
        verdict,
        bkm_detailed_balance: bkm.pass,
        equivalence_holds: verdict == bkm.pass,
        options: *opts,
    })
}
