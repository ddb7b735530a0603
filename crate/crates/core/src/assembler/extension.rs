use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::critical::{build_metric_series, check_positivity_region, MetricSeries, PositivitySamples, SeriesOptions};
use crate::error::{Error, Result};
use crate::fields::{distance, FieldPair};

/// A lower-index metric field `g_{ab}(x)`.
pub trait MetricField {
    fn dim(&self) -> usize;
    fn lower(&self, x: &[f64]) -> DMatrix<f64>;
}

/// Wraps a closure as a [`MetricField`].
pub struct FnMetric<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> DMatrix<f64>> FnMetric<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnMetric { dim, f }
    }
}

impl<F: Fn(&[f64]) -> DMatrix<f64>> MetricField for FnMetric<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn lower(&self, x: &[f64]) -> DMatrix<f64> {
        (self.f)(x)
    }
}

impl<M: MetricField + ?Sized> MetricField for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn lower(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).lower(x)
    }
}

/// Background metric corrected by its deficit `R = Y - g X`:
///
/// ```text
/// g̃_{ab} = g_{ab} + (R_a Y_b + R_b Y_a) / <X,Y> - <R,X> Y_a Y_b / <X,Y>^2
/// ```
///
/// which satisfies `g̃ X = Y` wherever `<X,Y> > 0`.
pub struct ExtensionField<B> {
    background: B,
    fields: FieldPair,
    critical_tol: f64,
}

pub fn continuous_extension<B: MetricField>(background: B, fields: &FieldPair) -> ExtensionField<B> {
    ExtensionField { background, fields: fields.clone(), critical_tol: 1e-10 }
}

impl<B: MetricField> ExtensionField<B> {
    /// Below this `|Y|_sup` a point counts as critical and the background value is returned.
    pub fn with_critical_tol(mut self, tol: f64) -> Self {
        self.critical_tol = tol;
        self
    }

    pub fn background(&self) -> &B {
        &self.background
    }

    pub fn deficit(&self, x: &[f64]) -> Vec<f64> {
        deficit_of(&self.background, &self.fields, x)
    }

    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let xv = self.fields.eval_x(x);
        let yv = self.fields.eval_y(x);
        let g = self.background.lower(x);
        if yv.iter().all(|v| v.abs() <= self.critical_tol) {
            return Ok(g);
        }
        let n = xv.len();
        let pairing: f64 = xv.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let xn = xv.iter().map(|v| v * v).sum::<f64>().sqrt();
        let yn = yv.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(pairing > 0.0 && pairing >= crate::noncritical::PAIRING_THRESHOLD * xn * yn) {
            return Err(Error::NonPositivePairing { pairing, point: x.to_vec() });
        }
        let r: Vec<f64> = (0..n).map(|b| yv[b] - (0..n).map(|a| g[(a, b)] * xv[a]).sum::<f64>()).collect();
        let rx: f64 = r.iter().zip(&xv).map(|(a, b)| a * b).sum();
        let mut out = g;
        for a in 0..n {
            for b in 0..n {
                out[(a, b)] += (r[a] * yv[b] + r[b] * yv[a]) / pairing - rx * yv[a] * yv[b] / (pairing * pairing);
            }
        }
        Ok(out)
    }
}

fn deficit_of<B: MetricField + ?Sized>(g: &B, fields: &FieldPair, x: &[f64]) -> Vec<f64> {
    let xv = fields.eval_x(x);
    let yv = fields.eval_y(x);
    let gm = g.lower(x);
    let n = xv.len();
    (0..n).map(|b| yv[b] - (0..n).map(|a| gm[(a, b)] * xv[a]).sum::<f64>()).collect()
}

/// Least-squares slope of `log |R(c + t d)|` against `log t` over `radii`.
pub fn deficit_slope<B: MetricField + ?Sized>(g: &B, fields: &FieldPair, center: &[f64], direction: &[f64], radii: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .filter_map(|&t| {
            let x: Vec<f64> = center.iter().zip(direction).map(|(c, d)| c + t * d).collect();
            let r = deficit_of(g, fields, &x).iter().map(|v| v * v).sum::<f64>().sqrt();
            (r > 0.0).then(|| (t.ln(), r.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let m = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundPatch {
    pub center: Vec<f64>,
    /// Degree-`k` truncation of the inverse-metric series.
    pub series: MetricSeries,
    pub r_in: f64,
    pub r_out: f64,
}

/// Lower-index metric equal to the inverse of a truncated series near each
/// critical point and the identity away from them, blended by plateau bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundMetric {
    pub dim: usize,
    pub patches: Vec<BackgroundPatch>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundOptions {
    pub series: SeriesOptions,
    pub separation_fraction: f64,
    pub positivity_fraction: f64,
    /// `r_in / r_out`.
    pub plateau_ratio: f64,
    pub random_directions: usize,
    pub seed: u64,
}

impl Default for BackgroundOptions {
    fn default() -> Self {
        BackgroundOptions {
            series: SeriesOptions::default(),
            separation_fraction: 0.45,
            positivity_fraction: 0.9,
            plateau_ratio: 0.5,
            random_directions: 24,
            seed: 0,
        }
    }
}

fn psi(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// 1 on `r <= r_in`, 0 on `r >= r_out`, smooth in between.
fn plateau(r: f64, r_in: f64, r_out: f64) -> f64 {
    let a = psi(r_out - r);
    let b = psi(r - r_in);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

impl MetricField for BackgroundMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn lower(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim;
        let mut g = DMatrix::<f64>::zeros(n, n);
        let mut rest = 1.0;
        for p in &self.patches {
            let w = plateau(distance(x, &p.center), p.r_in, p.r_out);
            if w == 0.0 {
                continue;
            }
            let upper = p.series.eval(x);
            let lower = upper.clone().cholesky().map(|c| c.inverse()).unwrap_or_else(|| {
                upper.try_inverse().unwrap_or_else(|| DMatrix::identity(n, n))
            });
            g += lower * w;
            rest -= w;
        }
        g + DMatrix::identity(n, n) * rest
    }
}

/// Background for the `C^k` extension: the degree-`k` series at every critical
/// point, so that the deficit vanishes to order `k + 1` there.
pub fn ck_background(fields: &FieldPair, k: usize, critical_points: &[Vec<f64>], opts: &BackgroundOptions) -> Result<BackgroundMetric> {
    if fields.order() < k + 1 {
        return Err(Error::OrderExceeded { requested: k + 1, available: fields.order() });
    }
    let n = fields.dim();
    let samples = PositivitySamples::standard(n, opts.random_directions, opts.seed);
    let mut patches = Vec::with_capacity(critical_points.len());
    for c in critical_points {
        let local = fields.recentered(c, k + 1);
        let series = build_metric_series(&local, k, &opts.series)?;
        let limit = fields.domain().reach_from(c);
        let mut r_out = opts.positivity_fraction * check_positivity_region(&series, &samples, limit)?;
        for o in critical_points {
            let d = distance(o, c);
            if d > 0.0 {
                r_out = r_out.min(opts.separation_fraction * d);
            }
        }
        patches.push(BackgroundPatch { center: c.clone(), series, r_in: opts.plateau_ratio * r_out, r_out });
    }
    Ok(BackgroundMetric { dim: n, patches })
}
