//! Generators with known detailed-balance properties.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::generator::{lindblad_superoperator, LindbladGenerator};
use crate::linalg::{c, unit, CMatrix};
use crate::state::haar_unitary;

/// Jumps `√a |0><1|` and `√b |1><0|`; stationary state `diag(a, b)/(a+b)`.
pub fn birth_death(a: f64, b: f64) -> LindbladGenerator {
    let jumps = vec![unit(2, 0, 1).scale(a.sqrt()), unit(2, 1, 0).scale(b.sqrt())];
    lindblad_superoperator(CMatrix::zeros(2, 2), jumps).expect("valid generator")
}

pub fn pauli_z() -> CMatrix {
    unit(2, 0, 0) - unit(2, 1, 1)
}

/// `L†ρ = γ (σ_0 Tr ρ - ρ)` for diagonal `σ_0`, with jumps `√(γ λ_i) |i><j|`.
pub fn depolarizing(lambda: &[f64], gamma: f64) -> LindbladGenerator {
    let d = lambda.len();
    let mut jumps = Vec::with_capacity(d * d);
    for (i, &l) in lambda.iter().enumerate() {
        for j in 0..d {
            jumps.push(unit(d, i, j).scale((gamma * l).sqrt()));
        }
    }
    lindblad_superoperator(CMatrix::zeros(d, d), jumps).expect("valid generator")
}

/// Random GNS-detailed-balance generator: a random spectrum `λ`, rates
/// `c_ij > 0` and jump pairs `√(c_ij λ_i) |i><j|`, `√(c_ij λ_j) |j><i|`, plus
/// diagonal dephasing, all conjugated by a Haar unitary. Its stationary
/// state is `U diag(λ) U^*`.
pub fn random_detailed_balance<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<LindbladGenerator> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..1.0)).collect();
    let s: f64 = raw.iter().sum();
    let lam: Vec<f64> = raw.iter().map(|v| v / s).collect();
    let u = haar_unitary(d, rng);
    let conj = |m: CMatrix| &u * m * u.adjoint();
    let mut jumps = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let rate: f64 = rng.random_range(0.5..2.0);
            jumps.push(conj(unit(d, i, j).scale((rate * lam[i]).sqrt())));
            jumps.push(conj(unit(d, j, i).scale((rate * lam[j]).sqrt())));
        }
    }
    let dephase = CMatrix::from_fn(d, d, |i, j| if i == j { c(rng.random_range(-0.5..0.5)) } else { c(0.0) });
    jumps.push(conj(dephase));
    lindblad_superoperator(CMatrix::zeros(d, d), jumps)
}

/// Random Hermitian matrix with Gaussian entries, scaled by `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    (&g + g.adjoint()).scale(0.5 * scale)
}

/// Two uncoupled blocks, each relaxing inside itself: the kernel of `L†`
/// is two-dimensional.
pub fn reducible(d: usize) -> LindbladGenerator {
    assert!(d >= 4 && d % 2 == 0);
    let h = d / 2;
    let mut jumps = Vec::new();
    for blk in [0, h] {
        for i in 0..h {
            for j in 0..h {
                if i != j {
                    jumps.push(unit(d, blk + i, blk + j));
                }
            }
        }
    }
    lindblad_superoperator(CMatrix::zeros(d, d), jumps).expect("valid generator")
}
