use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{bump_weight, GlobalMetric};
use crate::error::Error;
use crate::noncritical::PAIRING_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub residual_tol: f64,
    /// Highest derivative order probed by finite differences (0 disables).
    pub smoothness_order: usize,
    pub smoothness_step: f64,
    pub smoothness_points: usize,
    /// Points with `|Y|_sup` below this are treated as critical.
    pub critical_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { residual_tol: 1e-8, smoothness_order: 2, smoothness_step: 1e-3, smoothness_points: 16, critical_tol: 1e-10 }
    }
}

/// Finite-difference derivatives of the metric entries of one order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessRow {
    pub order: usize,
    pub step: f64,
    pub points: usize,
    /// Largest Richardson-extrapolated derivative magnitude.
    pub max_derivative: f64,
    /// Largest `|D(h) - D(h/2)|`.
    pub max_discrepancy: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub grid_points: usize,
    pub evaluated: usize,
    pub max_residual: f64,
    /// Residual divided by `max(1, |X|, |g| |Y|)` pointwise.
    pub max_scaled_residual: f64,
    pub min_eigenvalue: f64,
    pub chart_coverage: Vec<usize>,
    pub uncovered: usize,
    pub pairing_violations: usize,
    pub pairing_violation_points: Vec<Vec<f64>>,
    pub evaluation_failures: usize,
    pub smoothness: Vec<SmoothnessRow>,
    pub options: VerifyOptions,
    pub residual_pass: bool,
    pub positivity_pass: bool,
    pub coverage_pass: bool,
    pub pairing_pass: bool,
    pub smoothness_pass: bool,
    pub pass: bool,
}

const LISTED_VIOLATIONS: usize = 20;

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn verify_global(gm: &GlobalMetric, grid: &[Vec<f64>], opts: &VerifyOptions) -> VerificationReport {
    let fields = gm.fields();
    let n = gm.dim();
    let mut chart_coverage = vec![0usize; gm.charts().len()];
    let mut max_residual: f64 = 0.0;
    let mut max_scaled: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    let mut uncovered = 0;
    let mut violations = 0;
    let mut violation_points = Vec::new();
    let mut failures = 0;
    let mut evaluated = 0;
    for x in grid {
        let mut covered = false;
        for (k, c) in gm.charts().iter().enumerate() {
            if bump_weight(c, x) > 0.0 {
                chart_coverage[k] += 1;
                covered = true;
            }
        }
        if !covered {
            uncovered += 1;
            continue;
        }
        let xv = fields.eval_x(x);
        let yv = fields.eval_y(x);
        if sup(&yv) > opts.critical_tol {
            let pairing: f64 = xv.iter().zip(&yv).map(|(a, b)| a * b).sum();
            let xn = xv.iter().map(|v| v * v).sum::<f64>().sqrt();
            let yn = yv.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(pairing > 0.0 && pairing >= PAIRING_THRESHOLD * xn * yn) {
                violations += 1;
                if violation_points.len() < LISTED_VIOLATIONS {
                    violation_points.push(x.clone());
                }
                continue;
            }
        }
        let g = match gm.eval(x) {
            Ok(g) => g,
            Err(Error::NonPositivePairing { .. }) => {
                violations += 1;
                if violation_points.len() < LISTED_VIOLATIONS {
                    violation_points.push(x.clone());
                }
                continue;
            }
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        evaluated += 1;
        let mut res: f64 = 0.0;
        for a in 0..n {
            let gy: f64 = (0..n).map(|b| g[(a, b)] * yv[b]).sum();
            res = res.max((gy - xv[a]).abs());
        }
        let scale = 1f64.max(sup(&xv)).max(g.amax() * sup(&yv));
        max_residual = max_residual.max(res);
        max_scaled = max_scaled.max(res / scale);
        let sym = (&g + g.transpose()) * 0.5;
        min_eig = min_eig.min(SymmetricEigen::new(sym).eigenvalues.min());
    }
    let smoothness = smoothness_table(gm, grid, opts);
    let residual_pass = max_scaled <= opts.residual_tol;
    let positivity_pass = evaluated > 0 && min_eig > 0.0;
    let coverage_pass = uncovered == 0;
    let pairing_pass = violations == 0 && failures == 0;
    let smoothness_pass = smoothness.iter().all(|r| r.consistent);
    VerificationReport {
        grid_points: grid.len(),
        evaluated,
        max_residual,
        max_scaled_residual: max_scaled,
        min_eigenvalue: if evaluated > 0 { min_eig } else { f64::NAN },
        chart_coverage,
        uncovered,
        pairing_violations: violations,
        pairing_violation_points: violation_points,
        evaluation_failures: failures,
        smoothness,
        options: *opts,
        pass: residual_pass && positivity_pass && coverage_pass && pairing_pass,
        residual_pass,
        positivity_pass,
        coverage_pass,
        pairing_pass,
        smoothness_pass,
    }
}

/// Central difference of order `p` along axis `k`:
/// `h^-p sum_j (-1)^j C(p, j) g(x + (p/2 - j) h e_k)`.
fn central_difference(gm: &GlobalMetric, x: &[f64], k: usize, p: usize, h: f64) -> Option<DMatrix<f64>> {
    let n = gm.dim();
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for j in 0..=p {
        let mut y = x.to_vec();
        y[k] += (p as f64 / 2.0 - j as f64) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += gm.eval(&y).ok()? * (sign * crate::index::binomial(p as u32, j as u32));
    }
    Some(acc / h.powi(p as i32))
}

fn smoothness_table(gm: &GlobalMetric, grid: &[Vec<f64>], opts: &VerifyOptions) -> Vec<SmoothnessRow> {
    if opts.smoothness_order == 0 || grid.is_empty() {
        return Vec::new();
    }
    let h = opts.smoothness_step;
    let margin = opts.smoothness_order as f64 * h;
    let domain = gm.fields().domain();
    let candidates: Vec<&Vec<f64>> = grid.iter().filter(|x| domain.inner_radius(x) > margin).collect();
    let stride = (candidates.len() / opts.smoothness_points.max(1)).max(1);
    let probes: Vec<&Vec<f64>> = candidates.iter().step_by(stride).take(opts.smoothness_points).copied().collect();
    (1..=opts.smoothness_order)
        .map(|p| {
            let mut max_derivative: f64 = 0.0;
            let mut max_discrepancy: f64 = 0.0;
            let mut consistent = true;
            let mut points = 0;
            for x in &probes {
                for k in 0..gm.dim() {
                    let (Some(d1), Some(d2)) = (central_difference(gm, x, k, p, h), central_difference(gm, x, k, p, 0.5 * h)) else {
                        consistent = false;
                        continue;
                    };
                    let rich = (&d2 * 4.0 - &d1) / 3.0;
                    let disc = (&d1 - &d2).amax();
                    max_derivative = max_derivative.max(rich.amax());
                    max_discrepancy = max_discrepancy.max(disc);
                    // Round-off of a p-th difference grows like eps |g| / h^p.
                    let noise = 1e-14 * gm.eval(x).map(|g| g.amax()).unwrap_or(1.0) / (0.5 * h).powi(p as i32);
                    if disc > 1e-2 * rich.amax().max(1.0) + noise {
                        consistent = false;
                    }
                }
                points += 1;
            }
            SmoothnessRow { order: p, step: h, points, max_derivative, max_discrepancy, consistent }
        })
        .collect()
}

/// One row per grid point: coordinates, then `g^{ab}` row-major; failed
/// evaluations leave the metric columns empty.
pub fn write_samples_csv<W: Write>(gm: &GlobalMetric, grid: &[Vec<f64>], mut out: W) -> std::io::Result<()> {
    let n = gm.dim();
    let mut header: Vec<String> = (0..n).map(|i| format!("x{}", i + 1)).collect();
    for a in 0..n {
        for b in 0..n {
            header.push(format!("g{}{}", a + 1, b + 1));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for x in grid {
        let mut cells: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
        match gm.eval(x) {
            Ok(g) => {
                for a in 0..n {
                    for b in 0..n {
                        cells.push(format!("{:e}", g[(a, b)]));
                    }
                }
            }
            Err(_) => cells.extend(std::iter::repeat_n(String::new(), n * n)),
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
