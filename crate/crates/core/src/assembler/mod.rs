//! Gluing local metrics with a partition of unity, the continuous and `C^k`
//! extensions across critical points, and grid verification.

mod counterexample;
mod extension;
mod verify;

pub use counterexample::{counterexample_fields, counterexample_probe, CounterexampleConfig, CounterexampleReport, RayProbe};
pub use extension::{
    ck_background, continuous_extension, deficit_slope, BackgroundMetric, BackgroundOptions, BackgroundPatch,
    ExtensionField, FnMetric, MetricField,
};
pub use verify::{verify_global, write_samples_csv, SmoothnessRow, VerificationReport, VerifyOptions};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::critical::{check_positivity_region, MetricSeries, PositivitySamples};
use crate::error::{Error, Result};
use crate::fields::{distance, Domain, FieldPair, FieldSpec};
use crate::noncritical::build_noncritical_metric;

/// `exp(1 - 1/(1 - r^2))` for `r < 1`, else 0.
pub fn bump(r: f64) -> f64 {
    if r < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartKind {
    Critical { series: Box<MetricSeries> },
    NonCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(flatten)]
    pub kind: ChartKind,
}

impl Chart {
    pub fn is_critical(&self) -> bool {
        matches!(self.kind, ChartKind::Critical { .. })
    }
}

pub fn bump_weight(chart: &Chart, x: &[f64]) -> f64 {
    bump(distance(x, &chart.center) / chart.radius)
}

/// Charts glued by normalised bump weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GlobalMetricDoc", into = "GlobalMetricDoc")]
pub struct GlobalMetric {
    fields: FieldPair,
    charts: Vec<Chart>,
}

#[derive(Serialize, Deserialize)]
struct GlobalMetricDoc {
    fields: FieldSpec,
    charts: Vec<Chart>,
}

impl TryFrom<GlobalMetricDoc> for GlobalMetric {
    type Error = Error;

    fn try_from(doc: GlobalMetricDoc) -> Result<Self> {
        let fields = doc.fields.to_field_pair()?;
        if doc.charts.iter().any(|c| c.center.len() != fields.dim() || !(c.radius > 0.0)) {
            return Err(Error::Atlas("chart with wrong dimension or non-positive radius".into()));
        }
        Ok(GlobalMetric { fields, charts: doc.charts })
    }
}

impl From<GlobalMetric> for GlobalMetricDoc {
    fn from(g: GlobalMetric) -> Self {
        GlobalMetricDoc { fields: g.fields.to_spec(), charts: g.charts }
    }
}

impl GlobalMetric {
    pub fn fields(&self) -> &FieldPair {
        &self.fields
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn dim(&self) -> usize {
        self.fields.dim()
    }

    pub fn weights(&self, x: &[f64]) -> Vec<f64> {
        self.charts.iter().map(|c| bump_weight(c, x)).collect()
    }

    /// `sum_k w_k g_k / sum_k w_k`. All non-critical charts share the
    /// pointwise construction at `x`, so it is built once.
    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut acc = DMatrix::<f64>::zeros(n, n);
        let mut total = 0.0;
        let mut nc_weight = 0.0;
        for c in &self.charts {
            let w = bump_weight(c, x);
            if w == 0.0 {
                continue;
            }
            total += w;
            match &c.kind {
                ChartKind::Critical { series } => acc += series.eval(x) * w,
                ChartKind::NonCritical => nc_weight += w,
            }
        }
        if total == 0.0 {
            return Err(Error::CoverageGap(vec![x.to_vec()]));
        }
        if nc_weight > 0.0 {
            let p = build_noncritical_metric(&self.fields.eval_x(x), &self.fields.eval_y(x)).map_err(|e| match e {
                Error::NonPositivePairing { pairing, .. } => Error::NonPositivePairing { pairing, point: x.to_vec() },
                other => other,
            })?;
            acc += p.g_std * nc_weight;
        }
        Ok(acc / total)
    }
}

/// Checks that every grid point has positive total weight.
pub fn assemble_global(fields: &FieldPair, charts: Vec<Chart>, grid: &[Vec<f64>]) -> Result<GlobalMetric> {
    let gaps: Vec<Vec<f64>> = grid
        .iter()
        .filter(|x| charts.iter().all(|c| bump_weight(c, x) == 0.0))
        .cloned()
        .collect();
    if !gaps.is_empty() {
        return Err(Error::CoverageGap(gaps));
    }
    Ok(GlobalMetric { fields: fields.clone(), charts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalChartOptions {
    pub positivity_fraction: f64,
    pub separation_fraction: f64,
    pub convergence_fraction: f64,
    /// Scaled residual the truncated series must meet on its chart.
    pub residual_tol: f64,
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for CriticalChartOptions {
    fn default() -> Self {
        CriticalChartOptions {
            positivity_fraction: 0.9,
            separation_fraction: 0.45,
            convergence_fraction: 0.9,
            residual_tol: 1e-8,
            random_directions: 24,
            seed: 0,
        }
    }
}

/// The competing radius limits of a critical chart; `radius` is their minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartRadius {
    pub radius: f64,
    pub positivity: f64,
    pub convergence: Option<f64>,
    pub separation: Option<f64>,
    pub accuracy: f64,
}

fn residual_scaled(g: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let gy: f64 = (0..n).map(|b| g[(a, b)] * y[b]).sum();
        worst = worst.max((gy - x[a]).abs());
    }
    let xs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ys = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    worst / 1f64.max(xs).max(g.amax() * ys)
}

/// Radius for the chart of `ms`: within the positivity region, the
/// `|h|_1 < 1/(p n)` region (as a Euclidean ball), half-way to the other
/// critical points, and where the truncated series solves `g Y = X` to the
/// residual tolerance at the sample points.
pub fn critical_chart_radius(ms: &MetricSeries, fields: &FieldPair, others: &[Vec<f64>], opts: &CriticalChartOptions) -> Result<ChartRadius> {
    let c = &ms.base_point;
    let n = ms.dim();
    let limit = fields.domain().reach_from(c);
    let samples = PositivitySamples::standard(n, opts.random_directions, opts.seed);
    let positivity = opts.positivity_fraction * check_positivity_region(ms, &samples, limit)?;
    let convergence = ms.convergence_radius_l1().map(|r| opts.convergence_fraction * r / (n as f64).sqrt());
    let separation = others
        .iter()
        .map(|o| distance(o, c))
        .filter(|d| *d > 0.0)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |v| v.min(d))))
        .map(|d| opts.separation_fraction * d);
    let mut cap = positivity;
    for r in [convergence, separation].into_iter().flatten() {
        cap = cap.min(r);
    }
    let accurate = |r: f64| -> bool {
        samples.directions.iter().all(|d| {
            (1..=samples.radial_steps).all(|k| {
                let s = r * k as f64 / samples.radial_steps as f64;
                let x: Vec<f64> = c.iter().zip(d).map(|(b, di)| b + s * di).collect();
                residual_scaled(&ms.eval(&x), &fields.eval_x(&x), &fields.eval_y(&x)) <= 0.5 * opts.residual_tol
            })
        })
    };
    let accuracy = if accurate(cap) {
        cap
    } else {
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..samples.bisection_steps {
            let mid = 0.5 * (lo + hi);
            if accurate(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if !(accuracy > 0.0) {
        return Err(Error::Atlas(format!("critical chart at {c:?} has zero usable radius")));
    }
    Ok(ChartRadius { radius: accuracy.min(cap), positivity, convergence, separation, accuracy })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtlasOptions {
    /// Initial cells per axis over the domain's bounding box.
    pub base_cells: usize,
    pub max_depth: usize,
    /// Chart radius as a multiple of the cell half-diagonal.
    pub overlap: f64,
    /// A non-critical chart must satisfy `radius <= exclusion * distance to the critical set`.
    pub exclusion: f64,
    /// Cells inside `inner * radius` of a critical chart are left to it.
    pub inner: f64,
    pub max_charts: usize,
}

impl Default for AtlasOptions {
    fn default() -> Self {
        AtlasOptions { base_cells: 4, max_depth: 16, overlap: 1.25, exclusion: 0.75, inner: 0.9, max_charts: 200_000 }
    }
}

fn cell_meets_domain(domain: &Domain, lo: &[f64], hi: &[f64]) -> bool {
    match domain {
        Domain::Box { min, max } => lo.iter().zip(hi).zip(min.iter().zip(max)).all(|((l, h), (a, b))| h >= a && l <= b),
        Domain::Ball { center, radius } => {
            let d2: f64 = center
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(c, (l, h))| (c - c.clamp(*l, *h)).powi(2))
                .sum();
            d2.sqrt() <= *radius
        }
    }
}

/// Whitney-type cover: critical charts as given, plus non-critical charts on
/// dyadic cells whose charts keep a fixed fraction of their distance to the
/// critical set. Cells deep inside a critical chart are skipped.
pub fn build_atlas(fields: &FieldPair, critical: Vec<(MetricSeries, f64)>, opts: &AtlasOptions) -> Result<Vec<Chart>> {
    let domain = fields.domain();
    let n = fields.dim();
    let centers: Vec<(Vec<f64>, f64)> = critical.iter().map(|(ms, r)| (ms.base_point.clone(), *r)).collect();
    let mut charts: Vec<Chart> = critical
        .into_iter()
        .map(|(ms, r)| Chart { center: ms.base_point.clone(), radius: r, kind: ChartKind::Critical { series: Box::new(ms) } })
        .collect();
    let (lo, hi) = domain.bounding_box();
    let base = opts.base_cells.max(1);
    let mut stack: Vec<(Vec<f64>, Vec<f64>, usize)> = Vec::new();
    crate::index::for_each_index(base, n, |idx| {
        let clo: Vec<f64> = (0..n).map(|k| lo[k] + (hi[k] - lo[k]) * idx[k] as f64 / base as f64).collect();
        let chi: Vec<f64> = (0..n).map(|k| lo[k] + (hi[k] - lo[k]) * (idx[k] + 1) as f64 / base as f64).collect();
        stack.push((clo, chi, 0));
    });
    stack.reverse();
    while let Some((clo, chi, depth)) = stack.pop() {
        if !cell_meets_domain(domain, &clo, &chi) {
            continue;
        }
        let center: Vec<f64> = clo.iter().zip(&chi).map(|(a, b)| 0.5 * (a + b)).collect();
        let half_diag = 0.5 * distance(&clo, &chi);
        let inside_critical = centers.iter().any(|(c, r)| distance(&center, c) + half_diag <= opts.inner * r);
        if inside_critical {
            continue;
        }
        let d_crit = centers.iter().map(|(c, _)| distance(&center, c)).fold(f64::INFINITY, f64::min);
        let radius = opts.overlap * half_diag;
        if radius <= opts.exclusion * d_crit {
            charts.push(Chart { center, radius, kind: ChartKind::NonCritical });
            if charts.len() > opts.max_charts {
                return Err(Error::Atlas(format!("more than {} charts needed", opts.max_charts)));
            }
            continue;
        }
        if depth >= opts.max_depth {
            return Err(Error::Atlas(format!("cell at {center:?} not resolved at depth {depth}")));
        }
        let mut children = Vec::with_capacity(1 << n);
        crate::index::for_each_index(2, n, |bits| {
            let c_lo: Vec<f64> = (0..n).map(|k| if bits[k] == 0 { clo[k] } else { center[k] }).collect();
            let c_hi: Vec<f64> = (0..n).map(|k| if bits[k] == 0 { center[k] } else { chi[k] }).collect();
            children.push((c_lo, c_hi, depth + 1));
        });
        children.reverse();
        stack.extend(children);
    }
    Ok(charts)
}
