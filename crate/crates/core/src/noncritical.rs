//! Pointwise metric at points where `Y != 0` and `<X, Y> > 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pairing below which condition (i) counts as violated.
pub const PAIRING_THRESHOLD: f64 = 1e-12;

/// Co-vector frame `e^1, ..., e^n` stored as matrix rows, `e^1 = y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualFrame {
    #[serde(with = "crate::rows")]
    rows: DMatrix<f64>,
}

impl DualFrame {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.rows.nrows()
    }
}

/// Householder completion: with `v = y/|y|` and `w = v + sign(v_1) e_1`, the
/// reflection `H = I - 2 w w^T / w^T w` sends `v` to a multiple of `e_1`, so
/// rows `2..n` of `H` are orthonormal and orthogonal to `y`. The first row is
/// `y` itself, unnormalised, so that `Y` has frame coordinates `(1, 0, ..., 0)`.
pub fn complete_dual_frame(y: &[f64]) -> Result<DualFrame> {
    let n = y.len();
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0 || norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroCovector);
    }
    let mut w: Vec<f64> = y.iter().map(|v| v / norm).collect();
    w[0] += if w[0] >= 0.0 { 1.0 } else { -1.0 };
    let ww: f64 = w.iter().map(|v| v * v).sum();
    let rows = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            y[j]
        } else {
            f64::from(u8::from(i == j)) - 2.0 * w[i] * w[j] / ww
        }
    });
    Ok(DualFrame { rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMetricPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub frame: DualFrame,
    /// Upper-index form in frame coordinates.
    #[serde(with = "crate::rows")]
    pub g: DMatrix<f64>,
    /// The same form in standard coordinates, `E^{-1} G E^{-T}`.
    #[serde(with = "crate::rows")]
    pub g_std: DMatrix<f64>,
    /// `X^1 = <X, Y>`.
    pub x1: f64,
    /// `|g_std y - x| / |x|`.
    pub residual: f64,
}

/// `G = [[X^1, X̄^T], [X̄, f I]]` with `f = X^1/2 + 2|X̄|^2 / X^1`, where
/// `X^j = <x, e^j>` are the frame coordinates of `x`.
pub fn build_noncritical_metric(x: &[f64], y: &[f64]) -> Result<LocalMetricPoint> {
    let n = x.len();
    if y.len() != n {
        return Err(Error::ShapeMismatch(format!("X has {n} components, Y {}", y.len())));
    }
    let frame = complete_dual_frame(y)?;
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let yn = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let pairing: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    if !(pairing > 0.0 && pairing >= PAIRING_THRESHOLD * xn * yn) {
        return Err(Error::NonPositivePairing { pairing, point: Vec::new() });
    }
    let e = frame.matrix();
    let xf = e * DVector::from_column_slice(x);
    let x1 = pairing;
    let xbar2: f64 = xf.iter().skip(1).map(|v| v * v).sum();
    let f = 0.5 * x1 + 2.0 * xbar2 / x1;
    let mut g = DMatrix::<f64>::zeros(n, n);
    g[(0, 0)] = x1;
    for j in 1..n {
        g[(0, j)] = xf[j];
        g[(j, 0)] = xf[j];
        g[(j, j)] = f;
    }
    let e_inv = e.clone().lu().try_inverse().ok_or(Error::ZeroCovector)?;
    let gs = &e_inv * &g * e_inv.transpose();
    let g_std = (&gs + gs.transpose()) * 0.5;
    let back = &g_std * DVector::from_column_slice(y);
    let err = back.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let residual = if xn > 0.0 { err / xn } else { err };
    Ok(LocalMetricPoint { x: x.to_vec(), y: y.to_vec(), frame, g, g_std, x1, residual })
}

impl LocalMetricPoint {
    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.g.clone()).eigenvalues.min()
    }
}
