//! Power series of the inverse metric `g^{ab}` around a critical point.
//!
//! `T_N = ∂_{c_1}..∂_{c_N} g^{ab}` at the base point is found order by order
//! from the tensor hierarchy; the series is `sum_N T_N h^N / N!`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldPair;
use crate::index::{counts_of, factorial, for_each_arrangement, for_each_sorted, for_each_submultiset, multi_factorial, offset, tuple_of};
use crate::jet::{Jet, MonomialBasis};
use crate::solver::{equation_residual, residual_scale, solve_order_n, TensorEquation};
use crate::tensor::{invert_bilinear, Bilinear, MultiTensor};

/// RMS residual (natural log units) above which the log-linear growth fit is
/// flagged as non-geometric. One decade.
pub const GROWTH_RESIDUAL_BOUND: f64 = std::f64::consts::LN_10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseMetricTolerances {
    /// Allowed `|G - G^T|_sup` relative to `|G|_sup`.
    pub asymmetry: f64,
    /// Smallest accepted eigenvalue of the symmetrized `G`.
    pub min_eigenvalue: f64,
}

impl Default for BaseMetricTolerances {
    fn default() -> Self {
        BaseMetricTolerances { asymmetry: 1e-8, min_eigenvalue: 1e-10 }
    }
}

/// Outcome of the search for a scalar product intertwining `∂X` and `∂Y`.
/// `exists == false` certifies that none exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseMetricResult {
    pub exists: bool,
    #[serde(with = "crate::rows::option")]
    pub g_bar: Option<DMatrix<f64>>,
    #[serde(with = "crate::rows")]
    pub g: DMatrix<f64>,
    pub asym_defect: f64,
    pub min_eigenvalue: f64,
}

/// `A[α][β] = ∂_α X^β` and `U[α][γ] = ∂_α Y_γ` at the base point.
///
/// Index conventions are fixed here. The compatibility condition
/// `∂_α X^β = ḡ^{βγ} ∂_α Y_γ` reads `A = U Ḡ` with rows labelled by the
/// derivative index, so `Ḡ = U^{-1} A`.
pub fn solve_base_metric(a: &Bilinear, u: &Bilinear, tol: &BaseMetricTolerances) -> Result<BaseMetricResult> {
    let u_inv = invert_bilinear(u)?;
    Ok(base_metric_from_inverse(a, &u_inv, tol))
}

fn base_metric_from_inverse(a: &Bilinear, u_inv: &Bilinear, tol: &BaseMetricTolerances) -> BaseMetricResult {
    let g = u_inv.matrix() * a.matrix();
    let asym_defect = (&g - g.transpose()).amax();
    let sym = (&g + g.transpose()) * 0.5;
    let min_eigenvalue = SymmetricEigen::new(sym.clone()).eigenvalues.min();
    let exists = asym_defect <= tol.asymmetry * g.amax() && min_eigenvalue >= tol.min_eigenvalue;
    BaseMetricResult { exists, g_bar: exists.then_some(sym), g, asym_defect, min_eigenvalue }
}

/// `A` and `U` of a field pair at its base point.
pub fn linearization(fp: &FieldPair) -> (Bilinear, Bilinear) {
    let n = fp.dim();
    let unit = |k: usize| -> Vec<u32> {
        let mut m = vec![0u32; n];
        m[k] = 1;
        m
    };
    let a = DMatrix::from_fn(n, n, |al, be| fp.x()[be].coeff(&unit(al)));
    let u = DMatrix::from_fn(n, n, |al, ga| fp.y()[ga].coeff(&unit(al)));
    (Bilinear::new(a).expect("square"), Bilinear::new(u).expect("square"))
}

/// `R^a_c = ∂_c X^a - sum_{S ⊂ positions, |S| < N-1} T^{ab}_{c_S} ∂_{c \ S} Y_b`
/// for the derivative tensors `coeffs[k] = T_k` of orders `0..=N-2`.
///
/// Subsets of positions are grouped by the sub-multiset they select, with
/// multiplicity `prod_j C(m_j, s_j)`.
pub fn build_r_tensor(big_n: usize, fp: &FieldPair, coeffs: &[MultiTensor]) -> Result<MultiTensor> {
    if fp.order() < big_n {
        return Err(Error::OrderExceeded { requested: big_n, available: fp.order() });
    }
    if big_n < 2 || coeffs.len() + 1 < big_n {
        return Err(Error::InvalidOrder(big_n));
    }
    let n = fp.dim();
    let deriv = |j: &Jet, m: &[u32]| multi_factorial(m) * j.coeff(m);
    let mut r = MultiTensor::zeros(n, 1, big_n);
    let stride = n.pow(big_n as u32);
    let mut rest = vec![0u32; n];
    for_each_sorted(n, big_n, |c| {
        let m = counts_of(c, n);
        let mut vals: Vec<f64> = fp.x().iter().map(|x| deriv(x, &m)).collect();
        for_each_submultiset(&m, |s| {
            let k = s.iter().sum::<u32>() as usize;
            if k + 2 > big_n {
                return;
            }
            let mult: f64 = m.iter().zip(s).map(|(&mj, &sj)| crate::index::binomial(mj, sj)).product();
            for j in 0..n {
                rest[j] = m[j] - s[j];
            }
            let dy: Vec<f64> = fp.y().iter().map(|y| deriv(y, &rest)).collect();
            let t = &coeffs[k];
            let t_stride = n.pow(k as u32);
            let off = offset(&tuple_of(s), n);
            for (a, v) in vals.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (b, dyb) in dy.iter().enumerate() {
                    acc += t.data()[(a * n + b) * t_stride + off] * dyb;
                }
                *v -= mult * acc;
            }
        });
        let data = r.data_mut();
        for_each_arrangement(c, |arr| {
            let o = offset(arr, n);
            for (a, v) in vals.iter().enumerate() {
                data[a * stride + o] = *v;
            }
        });
    });
    r.declare_symmetric((1..=big_n).collect());
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesOptions {
    /// Both `|Y(x̄)|_sup` and `|X(x̄)|_sup` must stay below this.
    pub critical_tol: f64,
    pub base: BaseMetricTolerances,
    pub growth_bound: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { critical_tol: 1e-10, base: BaseMetricTolerances::default(), growth_bound: GROWTH_RESIDUAL_BOUND }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthFlag {
    Geometric,
    NonGeometricGrowth,
    ExactPolynomial,
}

/// `t_N = |T_N|_sup <= C N! p^N` fitted in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Envelope constant: `max_N t_N / (N! p^N)` over the fitted orders.
    pub c: f64,
    pub p: f64,
    /// Intercept of the least-squares line, `exp` of it.
    pub c_fit: f64,
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    pub flag: GrowthFlag,
    pub orders_used: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub base_point: Vec<f64>,
    /// `coeffs[N]` has two upper and `N` lower slots.
    pub coeffs: Vec<MultiTensor>,
    pub growth: Option<GrowthFit>,
    /// `equation_residual / scale` of each hierarchy step `N = 2..=K+1`.
    pub hierarchy_residuals: Vec<f64>,
    pub base_metric: BaseMetricResult,
}

pub fn build_metric_series(fp: &FieldPair, order: usize, opts: &SeriesOptions) -> Result<MetricSeries> {
    if fp.order() < order + 1 {
        return Err(Error::OrderExceeded { requested: order + 1, available: fp.order() });
    }
    let base = fp.base_point().to_vec();
    let y_norm = sup(&fp.y().iter().map(|j| j.coeffs()[0]).collect::<Vec<_>>());
    let x_norm = sup(&fp.x().iter().map(|j| j.coeffs()[0]).collect::<Vec<_>>());
    if y_norm > opts.critical_tol || x_norm > opts.critical_tol {
        return Err(Error::NotCritical { y_norm, x_norm, tol: opts.critical_tol });
    }
    let (a, u) = linearization(fp);
    let u_inv = invert_bilinear(&u)?;
    let base_metric = base_metric_from_inverse(&a, &u_inv, &opts.base);
    let Some(g_bar) = base_metric.g_bar.clone() else {
        return Err(Error::ConditionThreeViolated(Box::new(base_metric)));
    };
    let n = fp.dim();
    let mut t0 = MultiTensor::from_fn(n, 2, 0, |i| g_bar[(i[0], i[1])]);
    t0.declare_symmetric(vec![0, 1]);
    let mut coeffs = vec![t0];
    let mut hierarchy_residuals = Vec::new();
    for big_n in 2..=order + 1 {
        let r = build_r_tensor(big_n, fp, &coeffs)?;
        let eq = TensorEquation::with_inverse(u.clone(), u_inv.clone(), r)?;
        let t = solve_order_n(&eq);
        let res = equation_residual(&u, &t, eq.r(), big_n)?;
        hierarchy_residuals.push(res / residual_scale(&u, &t, eq.r()));
        coeffs.push(t);
    }
    let mut ms = MetricSeries { base_point: base, coeffs, growth: None, hierarchy_residuals, base_metric };
    if order >= 3 {
        ms.growth = Some(fit_growth(&ms, opts.growth_bound)?);
    }
    Ok(ms)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Least-squares fit of `log(t_N / N!) = log C + N log p` over `N = 1..=K`.
///
/// Orders with `t_N / N!` below `1e-10` of the largest are treated as zero
/// and left out. If the orders after the last nonzero one are all zero the
/// series terminates and is flagged [`GrowthFlag::ExactPolynomial`].
pub fn fit_growth(ms: &MetricSeries, residual_bound: f64) -> Result<GrowthFit> {
    let k = ms.order();
    if k < 3 {
        return Err(Error::SeriesTooShort { order: k, required: 3 });
    }
    let a: Vec<f64> = (0..=k).map(|nn| ms.coeffs[nn].sup_norm() / factorial(nn as u32)).collect();
    fit_growth_values(&a, residual_bound)
}

/// Growth fit on normalized magnitudes `a[N] = t_N / N!` for `N = 0..=K`.
pub fn fit_growth_values(a: &[f64], residual_bound: f64) -> Result<GrowthFit> {
    let k = a.len().saturating_sub(1);
    let max_a = a.iter().fold(0.0f64, |m, &v| m.max(v));
    let used: Vec<usize> = (1..=k).filter(|&nn| a[nn] > 1e-10 * max_a && a[nn] > 0.0).collect();
    if used.is_empty() {
        return Ok(GrowthFit { c: 0.0, p: 0.0, c_fit: 0.0, residual: 0.0, flag: GrowthFlag::ExactPolynomial, orders_used: used });
    }
    let terminates = *used.last().expect("nonempty") < k;
    let (log_c, log_p, residual) = if used.len() == 1 {
        let nn = used[0] as f64;
        (0.0, a[used[0]].ln() / nn, 0.0)
    } else {
        let m = used.len() as f64;
        let xs: Vec<f64> = used.iter().map(|&nn| nn as f64).collect();
        let ys: Vec<f64> = used.iter().map(|&nn| a[nn].ln()).collect();
        let xm = xs.iter().sum::<f64>() / m;
        let ym = ys.iter().sum::<f64>() / m;
        let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
        let slope = sxy / sxx;
        let icpt = ym - slope * xm;
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
        (icpt, slope, (rss / m).sqrt())
    };
    let p = log_p.exp();
    let c = used.iter().map(|&nn| a[nn] / p.powi(nn as i32)).fold(0.0, f64::max);
    let flag = if terminates {
        GrowthFlag::ExactPolynomial
    } else if residual > residual_bound {
        GrowthFlag::NonGeometricGrowth
    } else {
        GrowthFlag::Geometric
    };
    Ok(GrowthFit { c, p, c_fit: log_c.exp(), residual, flag, orders_used: used })
}

impl MetricSeries {
    pub fn dim(&self) -> usize {
        self.base_point.len()
    }

    /// Highest derivative order `K` stored.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn g_bar(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |a, b| self.coeffs[0].data()[a * n + b])
    }

    /// The first `order + 1` coefficients.
    pub fn truncated(&self, order: usize) -> MetricSeries {
        let mut ms = self.clone();
        ms.coeffs.truncate(order + 1);
        ms.hierarchy_residuals.truncate(order);
        if order < 3 {
            ms.growth = None;
        }
        ms
    }

    /// `sum_N (1/N!) T_N h^N` with `h = x - x̄`.
    ///
    /// For each `N` the sum over index tuples runs in row-major order with the
    /// power products `h_{c_1} ... h_{c_N}` accumulated left to right, then is
    /// divided by `N!` and added.
    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let h: Vec<f64> = x.iter().zip(&self.base_point).map(|(a, b)| a - b).collect();
        let mut g = DMatrix::<f64>::zeros(n, n);
        let mut pw = vec![1.0];
        for (big_n, t) in self.coeffs.iter().enumerate() {
            if big_n > 0 {
                let mut next = Vec::with_capacity(pw.len() * n);
                for &p in &pw {
                    for &hj in &h {
                        next.push(p * hj);
                    }
                }
                pw = next;
            }
            let fact = factorial(big_n as u32);
            let len = pw.len();
            let td = t.data();
            for a in 0..n {
                for b in 0..n {
                    let block = &td[(a * n + b) * len..(a * n + b + 1) * len];
                    let mut s = 0.0;
                    for (tv, pv) in block.iter().zip(&pw) {
                        s += tv * pv;
                    }
                    g[(a, b)] += s / fact;
                }
            }
        }
        g
    }

    /// `|x - x̄|_1 < 1 / (p n)` with the fitted `p`; true when no fit exists.
    pub fn in_convergence_region(&self, x: &[f64]) -> bool {
        match self.convergence_radius_l1() {
            Some(r) => x.iter().zip(&self.base_point).map(|(a, b)| (a - b).abs()).sum::<f64>() < r,
            None => true,
        }
    }

    pub fn convergence_radius_l1(&self) -> Option<f64> {
        let g = self.growth.as_ref()?;
        if g.flag == GrowthFlag::ExactPolynomial || g.p <= 0.0 {
            return None;
        }
        Some(1.0 / (g.p * self.dim() as f64))
    }

    /// Jets of `g^{ab}` truncated at `order`, coefficient `T_{|m|}[a,b;m] / m!`.
    pub fn metric_jets(&self, order: usize) -> Result<Vec<Vec<Jet>>> {
        if order > self.order() {
            return Err(Error::OrderExceeded { requested: order, available: self.order() });
        }
        let n = self.dim();
        let basis = MonomialBasis::get(n, order);
        let mut jets = Vec::with_capacity(n);
        for a in 0..n {
            let mut row = Vec::with_capacity(n);
            for b in 0..n {
                let coeffs = basis
                    .monomials()
                    .iter()
                    .map(|m| {
                        let k = m.iter().sum::<u32>() as usize;
                        let stride = n.pow(k as u32);
                        let t = &self.coeffs[k];
                        t.data()[(a * n + b) * stride + offset(&tuple_of(m), n)] / multi_factorial(m)
                    })
                    .collect();
                row.push(Jet::from_coeffs(basis.clone(), self.base_point.clone(), coeffs));
            }
            jets.push(row);
        }
        Ok(jets)
    }
}

/// Largest Taylor coefficient of `g^{ab} Y_b - X^a` up to total degree `order`.
pub fn verify_order(ms: &MetricSeries, fp: &FieldPair, order: usize) -> Result<f64> {
    if fp.order() < order {
        return Err(Error::OrderExceeded { requested: order, available: fp.order() });
    }
    if fp.base_point() != ms.base_point.as_slice() {
        return Err(Error::BaseMismatch);
    }
    let g = ms.metric_jets(order)?;
    let n = fp.dim();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let mut acc = fp.x()[a].with_order(order).scaled(-1.0);
        for b in 0..n {
            acc = acc.add(&g[a][b].multiply(&fp.y()[b].with_order(order))?)?;
        }
        worst = worst.max(acc.max_abs_coeff());
    }
    Ok(worst)
}

/// Sample set for [`check_positivity_region`]: unit directions and the
/// number of radial sample points per direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivitySamples {
    pub directions: Vec<Vec<f64>>,
    pub radial_steps: usize,
    pub bisection_steps: usize,
}

impl PositivitySamples {
    /// Coordinate axes in both orientations plus `random` Gaussian directions.
    pub fn standard(dim: usize, random: usize, seed: u64) -> Self {
        let mut directions = Vec::new();
        for k in 0..dim {
            for s in [1.0, -1.0] {
                let mut d = vec![0.0; dim];
                d[k] = s;
                directions.push(d);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while directions.len() < 2 * dim + random {
            let d: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-8 {
                directions.push(d.iter().map(|v| v / norm).collect());
            }
        }
        PositivitySamples { directions, radial_steps: 16, bisection_steps: 40 }
    }
}

fn is_positive_definite(g: &DMatrix<f64>) -> bool {
    let sym = (g + g.transpose()) * 0.5;
    sym.cholesky().is_some()
}

/// Largest radius `r <= limit` such that the truncated series is positive
/// definite at every sample `x̄ + s r d` (`d` a sample direction, `s` on a
/// uniform radial grid in `(0, 1]`), found by bisection.
pub fn check_positivity_region(ms: &MetricSeries, samples: &PositivitySamples, limit: f64) -> Result<f64> {
    let min_eig = SymmetricEigen::new(ms.g_bar()).eigenvalues.min();
    if !(min_eig > 0.0) {
        return Err(Error::NotPositiveDefinite(min_eig));
    }
    let ok = |r: f64| -> bool {
        samples.directions.iter().all(|d| {
            (1..=samples.radial_steps).all(|k| {
                let s = r * k as f64 / samples.radial_steps as f64;
                let x: Vec<f64> = ms.base_point.iter().zip(d).map(|(b, di)| b + s * di).collect();
                is_positive_definite(&ms.eval(&x))
            })
        })
    };
    if ok(limit) {
        return Ok(limit);
    }
    let (mut lo, mut hi) = (0.0, limit);
    for _ in 0..samples.bisection_steps {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
