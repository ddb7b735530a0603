//! Density matrices, stationary states and random interior states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{QmsError, Result};
use crate::generator::LindbladGenerator;
use crate::linalg::{c, herm_eig, hermitian_defect, hermitian_part, trace, unvec, CMatrix};

pub const STATE_TOL: f64 = 1e-12;
/// Ratio of the two smallest singular values of `L†` above which the kernel
/// counts as more than one-dimensional.
pub const ERGODICITY_RATIO: f64 = 1e-8;
/// Smallest eigenvalue accepted for a stationary state.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: CMatrix,
    eigenvalues: Vec<f64>,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positive semi-definiteness.
    pub fn new(rho: CMatrix) -> Result<Self> {
        let d = rho.nrows();
        if d == 0 || rho.ncols() != d {
            return Err(QmsError::SpecDimension(format!("state is {}x{}", rho.nrows(), rho.ncols())));
        }
        let herm = hermitian_defect(&rho);
        let tr = trace(&rho);
        if herm > STATE_TOL || (tr - c(1.0)).norm() > STATE_TOL {
            return Err(QmsError::SpecDimension(format!(
                "not a density matrix: hermiticity defect {herm:e}, trace {tr}"
            )));
        }
        let rho = hermitian_part(&rho);
        let (eigenvalues, _) = herm_eig(&rho);
        if eigenvalues[0] < -STATE_TOL {
            return Err(QmsError::SingularState(eigenvalues[0]));
        }
        Ok(DensityMatrix { rho, eigenvalues })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix::new(CMatrix::identity(d, d) * c(1.0 / d as f64)).expect("valid state")
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Errors unless the smallest eigenvalue is at least `eps`.
    pub fn require_positive(&self, eps: f64) -> Result<()> {
        if self.min_eigenvalue() < eps {
            return Err(QmsError::SingularState(self.min_eigenvalue()));
        }
        Ok(())
    }
}

/// Normalised kernel element of `L†`.
pub fn stationary_state(gen: &LindbladGenerator) -> Result<DensityMatrix> {
    let d = gen.dim();
    let svd = gen.superop_dagger().clone().svd(false, true);
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let scale = sv.max().max(f64::MIN_POSITIVE);
    if sv.len() > 1 {
        let (s0, s1) = (sv[order[0]], sv[order[1]]);
        let ratio = if s1 > 0.0 { s0 / s1 } else { 1.0 };
        if ratio > ERGODICITY_RATIO || s1 <= 1e-12 * scale {
            return Err(QmsError::NotErgodic { ratio });
        }
    }
    let v_t = svd.v_t.expect("requested");
    let kernel: Vec<Complex64> = v_t.row(order[0]).iter().map(|z| z.conj()).collect();
    let m = unvec(&kernel, d);
    let tr = trace(&m);
    if tr.norm() < 1e-12 {
        return Err(QmsError::SingularState(0.0));
    }
    let rho = hermitian_part(&(m / tr));
    let (vals, _) = herm_eig(&rho);
    if vals[0] < POSITIVITY_FLOOR {
        return Err(QmsError::SingularState(vals[0]));
    }
    DensityMatrix::new(rho)
}

/// Haar unitary from the QR factorisation of a complex Ginibre matrix, with
/// the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let z = r[(i, i)];
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                c(1.0)
            }
        } else {
            c(0.0)
        }
    });
    q * phases
}

/// `λ = floor + (1 - d floor) p` with `p` uniform on the simplex, conjugated
/// by a Haar unitary.
pub fn random_state<R: Rng + ?Sized>(d: usize, floor: f64, rng: &mut R) -> DensityMatrix {
    let w: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    let lam: Vec<f64> = w.iter().map(|v| floor + (1.0 - d as f64 * floor) * v / s).collect();
    let u = haar_unitary(d, rng);
    let diag = DMatrix::from_fn(d, d, |i, j| if i == j { c(lam[i]) } else { c(0.0) });
    let rho = &u * diag * u.adjoint();
    DensityMatrix::new(hermitian_part(&rho)).expect("sampled state is valid")
}

/// Summary for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub eigenvalues: Vec<f64>,
    /// Rows of `[re, im]` pairs.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl From<&DensityMatrix> for StateSummary {
    fn from(s: &DensityMatrix) -> Self {
        let d = s.dim();
        StateSummary {
            eigenvalues: s.eigenvalues.clone(),
            matrix: (0..d).map(|i| (0..d).map(|j| [s.rho[(i, j)].re, s.rho[(i, j)].im]).collect()).collect(),
        }
    }
}
