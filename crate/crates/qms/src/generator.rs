//! GKSL generators and their superoperator matrices.

use flowmetric_core::scalar::Scalar;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QmsError, Result};
use crate::linalg::{anticommutator, c, commutator, hermitian_defect, unit, unvec, vec_of, CMatrix};

/// Hermiticity defect of `H` above which it is rejected.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    d: usize,
    h: CMatrix,
    jumps: Vec<CMatrix>,
    /// Schrödinger picture `L†` acting on column-major `vec(ρ)`.
    superop_dagger: CMatrix,
    /// Heisenberg picture `L`, the adjoint under `Tr[A^* B]`.
    superop: CMatrix,
}

/// `-i[H, ρ] + sum_k (L_k ρ L_k^* - {L_k^* L_k, ρ}/2)`.
pub fn gksl_dagger(h: &CMatrix, jumps: &[CMatrix], rho: &CMatrix) -> CMatrix {
    let mut out = commutator(h, rho) * Complex64::new(0.0, -1.0);
    for l in jumps {
        let ld = l.adjoint();
        out += l * rho * &ld - anticommutator(&(&ld * l), rho).scale(0.5);
    }
    out
}

/// `i[H, A] + sum_k (L_k^* A L_k - {L_k^* L_k, A}/2)`.
pub fn gksl(h: &CMatrix, jumps: &[CMatrix], a: &CMatrix) -> CMatrix {
    let mut out = commutator(h, a) * Complex64::new(0.0, 1.0);
    for l in jumps {
        let ld = l.adjoint();
        out += &ld * a * l - anticommutator(&(&ld * l), a).scale(0.5);
    }
    out
}

pub fn lindblad_superoperator(h: CMatrix, jumps: Vec<CMatrix>) -> Result<LindbladGenerator> {
    let d = h.nrows();
    if d == 0 || h.ncols() != d {
        return Err(QmsError::SpecDimension(format!("H is {}x{}", h.nrows(), h.ncols())));
    }
    if let Some(k) = jumps.iter().position(|l| l.nrows() != d || l.ncols() != d) {
        return Err(QmsError::SpecDimension(format!("jump {k} is not {d}x{d}")));
    }
    let defect = hermitian_defect(&h);
    if defect > HERMITIAN_TOL {
        return Err(QmsError::InvalidHamiltonian(defect));
    }
    let dd = d * d;
    let mut superop_dagger = CMatrix::zeros(dd, dd);
    for j in 0..d {
        for i in 0..d {
            let col = vec_of(&gksl_dagger(&h, &jumps, &unit(d, i, j)));
            superop_dagger.set_column(j * d + i, &col);
        }
    }
    let superop = superop_dagger.adjoint();
    Ok(LindbladGenerator { d, h, jumps, superop_dagger, superop })
}

impl LindbladGenerator {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h
    }

    pub fn jumps(&self) -> &[CMatrix] {
        &self.jumps
    }

    pub fn superop_dagger(&self) -> &CMatrix {
        &self.superop_dagger
    }

    pub fn superop(&self) -> &CMatrix {
        &self.superop
    }

    pub fn apply_dagger(&self, rho: &CMatrix) -> CMatrix {
        unvec((&self.superop_dagger * vec_of(rho)).as_slice(), self.d)
    }

    pub fn apply(&self, a: &CMatrix) -> CMatrix {
        unvec((&self.superop * vec_of(a)).as_slice(), self.d)
    }

    /// `e^{t L†} ρ`.
    pub fn evolve(&self, rho: &CMatrix, t: f64) -> CMatrix {
        let p = (&self.superop_dagger * c(t)).exp();
        unvec((p * vec_of(rho)).as_slice(), self.d)
    }

    pub fn with_hamiltonian(&self, h: CMatrix) -> Result<LindbladGenerator> {
        lindblad_superoperator(h, self.jumps.clone())
    }

    pub fn to_spec(&self) -> GeneratorSpec {
        let m = |a: &CMatrix| -> Vec<Vec<ComplexEntry>> {
            (0..self.d)
                .map(|i| (0..self.d).map(|j| ComplexEntry::from_complex(a[(i, j)])).collect())
                .collect()
        };
        GeneratorSpec { d: self.d, h: m(&self.h), jumps: self.jumps.iter().map(m).collect() }
    }
}

/// A real number, or `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexEntry {
    Real(Scalar),
    Pair([Scalar; 2]),
}

impl ComplexEntry {
    pub fn to_complex(&self) -> std::result::Result<Complex64, String> {
        match self {
            ComplexEntry::Real(s) => Ok(c(s.to_f64()?)),
            ComplexEntry::Pair([re, im]) => Ok(Complex64::new(re.to_f64()?, im.to_f64()?)),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.im == 0.0 {
            ComplexEntry::Real(Scalar::Number(z.re))
        } else {
            ComplexEntry::Pair([Scalar::Number(z.re), Scalar::Number(z.im)])
        }
    }
}

/// Generator document `{d, H, jumps}` with matrices as lists of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub d: usize,
    #[serde(rename = "H")]
    pub h: Vec<Vec<ComplexEntry>>,
    #[serde(default)]
    pub jumps: Vec<Vec<Vec<ComplexEntry>>>,
}

fn matrix_of(rows: &[Vec<ComplexEntry>], d: usize, what: &str) -> Result<CMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(QmsError::SpecDimension(format!("{what} must be {d}x{d}")));
    }
    let mut m = DMatrix::zeros(d, d);
    for (i, r) in rows.iter().enumerate() {
        for (j, e) in r.iter().enumerate() {
            m[(i, j)] = e.to_complex().map_err(|e| QmsError::SpecParse(format!("{what}[{i}][{j}]: {e}")))?;
        }
    }
    Ok(m)
}

impl GeneratorSpec {
    pub fn to_generator(&self) -> Result<LindbladGenerator> {
        if self.d == 0 {
            return Err(QmsError::SpecDimension("d must be positive".into()));
        }
        let h = matrix_of(&self.h, self.d, "H")?;
        let jumps = self
            .jumps
            .iter()
            .enumerate()
            .map(|(k, j)| matrix_of(j, self.d, &format!("jumps[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        lindblad_superoperator(h, jumps)
    }
}

pub fn parse_generator_spec(text: &str) -> Result<LindbladGenerator> {
    let spec: GeneratorSpec = serde_json::from_str(text).map_err(|e| QmsError::SpecParse(e.to_string()))?;
    spec.to_generator()
}
