//! The gradient-flow pair on the interior of the state space, in Gell-Mann
//! coordinates `ρ(x) = σ + sum_j x_j G_j`, fed to the critical-point series.
//!
//! Sign convention: the pair is `X = -L†ρ` (minus the flow) and
//! `Y = ∇H_σ`, so `<X, Y> = I_σ >= 0` and the flow descends `H_σ`.

use flowmetric_core::critical::{build_metric_series, verify_order, MetricSeries, SeriesOptions};
use flowmetric_core::index::for_each_index;
use flowmetric_core::{Domain, FieldPair, Jet, MonomialBasis};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{QmsError, Result};
use crate::generator::LindbladGenerator;
use crate::gradient::tangent_representation;
use crate::linalg::{herm_eig, pairing, tangent_basis, CMatrix};
use crate::state::{stationary_state, DensityMatrix};

/// Upper bound on the multiply-adds spent on the entropy jets.
pub const SIMPLEX_WORK_LIMIT: f64 = 5e8;

/// `f^{[q]}(μ_0, ..., μ_q)` for `f = log`, from
/// `(-1)^{q+1} ∫_0^∞ prod_r (t + μ_r)^{-1} dt`, by the trapezoid rule in
/// `u = log t`. The integrand is analytic in a strip of half-width π, so the
/// rule converges geometrically.
pub fn log_divided_difference(mu: &[f64]) -> f64 {
    let q = mu.len() - 1;
    assert!(q >= 1 && mu.iter().all(|&m| m > 0.0));
    let lo = mu.iter().copied().fold(f64::INFINITY, f64::min).ln() - 40.0;
    let hi = mu.iter().copied().fold(0.0, f64::max).ln() + 40.0;
    let step = 0.05;
    let count = ((hi - lo) / step).ceil() as usize;
    let mut s = 0.0;
    for k in 0..=count {
        let u = lo + k as f64 * step;
        let t = u.exp();
        let mut v = t;
        for &m in mu {
            v /= t + m;
        }
        s += if k == 0 || k == count { 0.5 * v } else { v };
    }
    let sign = if q % 2 == 1 { 1.0 } else { -1.0 };
    sign * s * step
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexMetric {
    pub d: usize,
    pub order: usize,
    pub series: MetricSeries,
    /// `L_{jk} = Tr[G_j L† G_k]`.
    #[serde(with = "flowmetric_core::rows")]
    pub flow_matrix: DMatrix<f64>,
    /// `H_{jk} = h(G_j, G_k)`.
    #[serde(with = "flowmetric_core::rows")]
    pub hessian_matrix: DMatrix<f64>,
    /// Largest Taylor coefficient of `g Y - X` up to the series order.
    pub order_defect: f64,
    #[serde(skip)]
    pub fields: Option<FieldPair>,
}

/// Taylor jets of `Y_j(x) = Tr[G_j (log ρ(x) - log σ)]` up to `order`.
///
/// The degree-q part of `log(σ + E)` in the eigenbasis of σ is
/// `sum f^{[q]}(λ_a, λ_{k_1}, ..., λ_b) E_{a k_1} ... E_{k_{q-1} b}`.
pub fn entropy_gradient_jets(sigma: &DensityMatrix, basis: &[CMatrix], order: usize) -> Result<Vec<Jet>> {
    let d = sigma.dim();
    let m = basis.len();
    let work: f64 = (1..=order).map(|q| (m as f64).powi(q as i32) * (d as f64).powi(q as i32 + 1) * q as f64).sum();
    if work > SIMPLEX_WORK_LIMIT {
        return Err(QmsError::TooExpensive { work, limit: SIMPLEX_WORK_LIMIT });
    }
    let (lam, u) = herm_eig(sigma.matrix());
    let rotated: Vec<CMatrix> = basis.iter().map(|g| u.adjoint() * g * &u).collect();
    let jbasis = MonomialBasis::get(m, order);
    let mut coeffs = vec![vec![0.0; jbasis.len()]; m];
    let mut counts = vec![0u32; m];
    for q in 1..=order {
        let mut dd = vec![0.0; d.pow(q as u32 + 1)];
        let mut mu = vec![0.0; q + 1];
        for_each_index(d, q + 1, |idx| {
            for (r, &i) in idx.iter().enumerate() {
                mu[r] = lam[i];
            }
            dd[flowmetric_core::index::offset(idx, d)] = log_divided_difference(&mu);
        });
        for_each_index(m, q, |tuple| {
            counts.iter_mut().for_each(|c| *c = 0);
            for &t in tuple {
                counts[t] += 1;
            }
            let slot = jbasis.index_of(&counts).expect("degree within order");
            // Chain sum over (a, k_1, ..., k_{q-1}, b) of F * E_{j_1} ... E_{j_q}.
            let mut chain = vec![num_complex::Complex64::new(0.0, 0.0); d.pow(q as u32 + 1)];
            for_each_index(d, q + 1, |idx| {
                let mut v = num_complex::Complex64::new(dd[flowmetric_core::index::offset(idx, d)], 0.0);
                for r in 0..q {
                    v *= rotated[tuple[r]][(idx[r], idx[r + 1])];
                    if v == num_complex::Complex64::new(0.0, 0.0) {
                        break;
                    }
                }
                chain[flowmetric_core::index::offset(idx, d)] = v;
            });
            // P_{ab} = sum over interior indices; Tr[G_j P] = sum_{ab} (G_j)_{ba} P_{ab}.
            let inner = d.pow(q as u32 - 1);
            let mut p = CMatrix::zeros(d, d);
            for (k, v) in chain.iter().enumerate() {
                let a = k / (inner * d);
                let b = k % d;
                p[(a, b)] += v;
            }
            for (j, g) in rotated.iter().enumerate() {
                coeffs[j][slot] += (g.transpose().component_mul(&p)).iter().sum::<num_complex::Complex64>().re;
            }
        });
    }
    let base = vec![0.0; m];
    let jets = coeffs
        .into_iter()
        .map(|cs| {
            let terms = jbasis.monomials().iter().cloned().zip(cs).filter(|(_, c)| *c != 0.0);
            Jet::from_terms(m, order, &base, terms)
        })
        .collect::<flowmetric_core::Result<Vec<_>>>()?;
    Ok(jets)
}

/// Runs the critical-point construction at σ for the pair `(-L†ρ, ∇H_σ)`.
pub fn build_simplex_metric(gen: &LindbladGenerator, order: usize, opts: &SeriesOptions) -> Result<SimplexMetric> {
    let d = gen.dim();
    let sigma = stationary_state(gen)?;
    let basis = tangent_basis(d);
    let m = basis.len();
    let (l, h) = tangent_representation(gen, &sigma)?;
    let jet_order = order + 1;
    let base = vec![0.0; m];
    let drift: Vec<f64> = basis.iter().map(|g| pairing(g, &gen.apply_dagger(sigma.matrix())).re).collect();
    let x: Vec<Jet> = (0..m)
        .map(|j| {
            let mut terms = vec![(vec![0u32; m], -drift[j])];
            for k in 0..m {
                let mut e = vec![0u32; m];
                e[k] = 1;
                terms.push((e, -l[(j, k)]));
            }
            Jet::from_terms(m, jet_order, &base, terms)
        })
        .collect::<flowmetric_core::Result<_>>()?;
    let y = entropy_gradient_jets(&sigma, &basis, jet_order)?;
    let domain = Domain::Ball { center: base.clone(), radius: 0.9 * sigma.min_eigenvalue() };
    let fields = FieldPair::new(x, y, domain)?;
    let series = build_metric_series(&fields, order, opts)?;
    let order_defect = verify_order(&series, &fields, order)?;
    Ok(SimplexMetric { d, order, series, flow_matrix: l, hessian_matrix: h, order_defect, fields: Some(fields) })
}
