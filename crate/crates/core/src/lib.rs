//! Construction and verification of Riemannian metrics `g` with `Y = g X`
//! for a vector field `X` and a co-vector field `Y` given as polynomial jets.
//!
//! Index conventions are fixed in [`critical::solve_base_metric`]; tensors
//! store upper slots first, then lower slots, row-major.

pub mod assembler;
pub mod critical;
pub mod error;
pub mod fields;
pub mod index;
pub mod jet;
pub mod manufactured;
pub mod noncritical;
pub mod pipeline;
pub mod scalar;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use fields::{Domain, FieldPair, FieldSpec};
pub use jet::{Jet, MonomialBasis};
pub use tensor::{Bilinear, MultiTensor};

/// Serde helpers writing matrices as lists of rows.
pub mod rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return None;
        }
        Some(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(m: &Option<DMatrix<f64>>, s: S) -> Result<S::Ok, S::Error> {
            m.as_ref().map(to_rows).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DMatrix<f64>>, D::Error> {
            match Option::<Vec<Vec<f64>>>::deserialize(d)? {
                None => Ok(None),
                Some(rows) => from_rows(&rows)
                    .map(Some)
                    .ok_or_else(|| serde::de::Error::custom("ragged matrix rows")),
            }
        }
    }
}
