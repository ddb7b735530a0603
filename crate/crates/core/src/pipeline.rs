//! End-to-end construction: critical points, conditions (i)-(iii), local
//! metrics, atlas, gluing and grid verification.

use serde::{Deserialize, Serialize};

use crate::assembler::{
    assemble_global, build_atlas, critical_chart_radius, verify_global, AtlasOptions, ChartRadius, CriticalChartOptions,
    GlobalMetric, VerificationReport, VerifyOptions,
};
use crate::critical::{build_metric_series, verify_order, BaseMetricResult, GrowthFit, SeriesOptions};
use crate::error::{Error, Result};
use crate::fields::{locate_critical_points, CriticalCandidate, CriticalSearch, FieldPair};
use crate::noncritical::PAIRING_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructOptions {
    /// Highest series coefficient `K`.
    pub order: usize,
    /// Grid points per axis for coverage, condition (i) and verification.
    pub grid: usize,
    pub search: CriticalSearch,
    pub series: SeriesOptions,
    pub chart: CriticalChartOptions,
    pub atlas: AtlasOptions,
    pub verify: VerifyOptions,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            order: 6,
            grid: 64,
            search: CriticalSearch::default(),
            series: SeriesOptions::default(),
            chart: CriticalChartOptions::default(),
            atlas: AtlasOptions::default(),
            verify: VerifyOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSummary {
    pub point: Vec<f64>,
    pub y_residual: f64,
    pub x_norm: f64,
    pub base_metric: BaseMetricResult,
    pub growth: Option<GrowthFit>,
    pub hierarchy_residuals: Vec<f64>,
    /// Largest Taylor coefficient of `g Y - X` up to degree `K`.
    pub order_defect: f64,
    pub radius: ChartRadius,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub metric: GlobalMetric,
    pub critical: Vec<CriticalSummary>,
    pub report: VerificationReport,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// First grid point away from the zeros of `Y` where `<X, Y>` is not
/// positive.
pub fn find_pairing_violation(fields: &FieldPair, grid: &[Vec<f64>], critical_tol: f64) -> Option<(Vec<f64>, f64)> {
    grid.iter().find_map(|p| {
        let x = fields.eval_x(p);
        let y = fields.eval_y(p);
        if sup(&y) <= critical_tol {
            return None;
        }
        let pairing: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let yn = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        (!(pairing > 0.0 && pairing >= PAIRING_THRESHOLD * xn * yn)).then(|| (p.clone(), pairing))
    })
}

pub fn construct_global(fields: &FieldPair, opts: &ConstructOptions) -> Result<Construction> {
    let grid = fields.domain().grid(opts.grid);
    let candidates = locate_critical_points(fields, &opts.search);
    if let Some(CriticalCandidate::DegenerateCandidate { point, condition, .. }) = candidates.iter().find(|c| c.is_degenerate()) {
        return Err(Error::DegenerateCritical { point: point.clone(), condition: *condition });
    }
    if let Some((point, pairing)) = find_pairing_violation(fields, &grid, opts.verify.critical_tol) {
        return Err(Error::NonPositivePairing { pairing, point });
    }
    let points: Vec<Vec<f64>> = candidates.iter().map(|c| c.point().to_vec()).collect();
    let x_scale = grid.iter().map(|p| sup(&fields.eval_x(p))).fold(1.0, f64::max);
    let mut local = Vec::with_capacity(points.len());
    let mut summaries = Vec::with_capacity(points.len());
    for cand in &candidates {
        let c = cand.point();
        let x_norm = sup(&fields.eval_x(c));
        let y_residual = sup(&fields.eval_y(c));
        if x_norm > opts.series.critical_tol.sqrt() * x_scale {
            return Err(Error::ConditionTwoViolated { point: c.to_vec(), x_norm });
        }
        let lf = fields.recentered(c, opts.order + 1);
        // Newton leaves O(eps) constant terms; they do not enter the hierarchy.
        let mut sopts = opts.series;
        sopts.critical_tol = sopts.critical_tol.max(2.0 * x_norm.max(y_residual));
        let ms = build_metric_series(&lf, opts.order, &sopts)?;
        let order_defect = verify_order(&ms, &lf, opts.order)?;
        let others: Vec<Vec<f64>> = points.iter().filter(|p| p.as_slice() != c).cloned().collect();
        let radius = critical_chart_radius(&ms, fields, &others, &opts.chart)?;
        summaries.push(CriticalSummary {
            point: c.to_vec(),
            y_residual,
            x_norm,
            base_metric: ms.base_metric.clone(),
            growth: ms.growth.clone(),
            hierarchy_residuals: ms.hierarchy_residuals.clone(),
            order_defect,
            radius: radius.clone(),
        });
        local.push((ms, radius.radius));
    }
    let charts = build_atlas(fields, local, &opts.atlas)?;
    let metric = assemble_global(fields, charts, &grid)?;
    let report = verify_global(&metric, &grid, &opts.verify);
    Ok(Construction { metric, critical: summaries, report })
}
