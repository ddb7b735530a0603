use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::extension::{continuous_extension, FnMetric};
use crate::error::Result;
use crate::fields::{Domain, FieldPair};
use crate::jet::Jet;

/// `X = Y = x` on the plane.
pub fn counterexample_fields() -> FieldPair {
    let base = [0.0, 0.0];
    let x: Vec<Jet> = (0..2).map(|i| Jet::coordinate(2, 1, &base, i)).collect();
    FieldPair::new(x.clone(), x, Domain::cube(2, 1.0)).expect("valid fields")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    /// Samples per ray, geometric between `t_max` and `t_min`.
    pub ray_points: usize,
    pub t_max: f64,
    pub t_min: f64,
    /// Finite-difference step relative to the distance from the origin.
    pub step_ratio: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig { ray_points: 12, t_max: 0.5, t_min: 1e-4, step_ratio: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayProbe {
    pub direction: Vec<f64>,
    pub t: Vec<f64>,
    pub derivative: Vec<f64>,
    /// Value at the smallest `t`.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub config: CounterexampleConfig,
    pub along_axis: RayProbe,
    pub along_diagonal: RayProbe,
    pub limit_gap: f64,
    pub g11_at_1_1: f64,
    pub non_differentiable: bool,
}

/// `∂_1 g̃_11` along the rays `x_2 = 0` and `x_2 = x_1` for the extension of
/// the background `diag(1 + x_2, 1)` with `X = Y = x`. The extension is
/// continuous at 0 but these limits differ, so it is not differentiable there.
pub fn counterexample_probe(cfg: &CounterexampleConfig) -> Result<CounterexampleReport> {
    let fields = counterexample_fields();
    let background = FnMetric::new(2, |x: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0 + x[1], 0.0, 0.0, 1.0]));
    let ext = continuous_extension(background, &fields);
    let g11 = |x: &[f64]| -> Result<f64> { Ok(ext.eval(x)?[(0, 0)]) };
    let d1 = |x: &[f64], h: f64| -> Result<f64> {
        Ok((g11(&[x[0] + h, x[1]])? - g11(&[x[0] - h, x[1]])?) / (2.0 * h))
    };
    let steps = cfg.ray_points.max(2);
    let ts: Vec<f64> = (0..steps)
        .map(|j| cfg.t_max * (cfg.t_min / cfg.t_max).powf(j as f64 / (steps - 1) as f64))
        .collect();
    let probe = |dir: [f64; 2]| -> Result<RayProbe> {
        let mut der = Vec::with_capacity(ts.len());
        for &t in &ts {
            let x = [t * dir[0], t * dir[1]];
            let h = cfg.step_ratio * t;
            // Richardson: cancels the h^2 term of the central difference.
            der.push((4.0 * d1(&x, 0.5 * h)? - d1(&x, h)?) / 3.0);
        }
        let limit = *der.last().expect("at least two samples");
        Ok(RayProbe { direction: dir.to_vec(), t: ts.clone(), derivative: der, limit })
    };
    let along_axis = probe([1.0, 0.0])?;
    let along_diagonal = probe([1.0, 1.0])?;
    let limit_gap = (along_axis.limit - along_diagonal.limit).abs();
    Ok(CounterexampleReport {
        config: *cfg,
        non_differentiable: limit_gap > 1e-3,
        limit_gap,
        g11_at_1_1: g11(&[1.0, 1.0])?,
        along_axis,
        along_diagonal,
    })
}
