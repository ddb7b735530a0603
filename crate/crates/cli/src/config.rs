//! `--config` files: the same keys as the long flags, with `-` written `_`.

use std::path::Path;

use serde::Deserialize;

use crate::failure::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub order: Option<usize>,
    pub grid: Option<usize>,
    pub tol_residual: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub simplex: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = crate::io::read(path)?;
        toml::from_str(&text).map_err(|e| Failure::parse(format!("config {}: {e}", path.display())))
    }
}

pub const DEFAULT_ORDER: usize = 6;
pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_TOL_RESIDUAL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0;
/// Upper bound on the default grid's total size.
pub const MAX_DEFAULT_POINTS: usize = 4096;

/// Default points per axis: 64, reduced so the grid has at most
/// [`MAX_DEFAULT_POINTS`] points.
pub fn default_grid(dim: usize) -> usize {
    let mut k = DEFAULT_GRID;
    while k > 2 && (k as f64).powi(dim as i32) > MAX_DEFAULT_POINTS as f64 {
        k -= 1;
    }
    k
}
