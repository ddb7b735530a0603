//! Truncated multivariate Taylor expansions.
//!
//! A jet of order `K` around `b` stores the coefficient of `(x - b)^m` for
//! every multi-index `|m| <= K`, in graded-lex order: by total degree, then
//! lexicographically descending exponents (`x1^2, x1 x2, x2^2`).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::index::{binomial, for_each_submultiset, multi_factorial};

#[derive(Debug)]
pub struct MonomialBasis {
    dim: usize,
    order: usize,
    monomials: Vec<Vec<u32>>,
    degree_start: Vec<usize>,
}

impl MonomialBasis {
    /// Shared basis for `(dim, order)`.
    pub fn get(dim: usize, order: usize) -> Arc<MonomialBasis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MonomialBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(Self::build(dim, order)))
            .clone()
    }

    fn build(dim: usize, order: usize) -> Self {
        assert!(dim > 0, "jet dimension must be positive");
        let mut monomials = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(monomials.len());
            let mut m = vec![0u32; dim];
            push_degree(&mut monomials, &mut m, 0, d as u32);
        }
        degree_start.push(monomials.len());
        MonomialBasis { dim, order, monomials, degree_start }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u32] {
        &self.monomials[i]
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    /// Positions of the monomials of total degree `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        self.degree_start[d]..self.degree_start[d + 1]
    }

    /// Position of `m`, or `None` when its degree exceeds the order.
    pub fn index_of(&self, m: &[u32]) -> Option<usize> {
        if m.len() != self.dim {
            return None;
        }
        let deg: u32 = m.iter().sum();
        if deg as usize > self.order {
            return None;
        }
        let mut rank = 0usize;
        let mut r = deg;
        for (j, &mj) in m.iter().enumerate() {
            let after = self.dim - j - 1;
            for e in (mj + 1)..=r {
                rank += count_monomials(after, r - e);
            }
            r -= mj;
        }
        Some(self.degree_start[deg as usize] + rank)
    }
}

fn push_degree(out: &mut Vec<Vec<u32>>, m: &mut [u32], j: usize, r: u32) {
    if j + 1 == m.len() {
        m[j] = r;
        out.push(m.to_vec());
        return;
    }
    for e in (0..=r).rev() {
        m[j] = e;
        push_degree(out, m, j + 1, r - e);
    }
    m[j] = 0;
}

fn count_monomials(vars: usize, degree: u32) -> usize {
    if vars == 0 {
        return usize::from(degree == 0);
    }
    binomial(vars as u32 + degree - 1, degree) as usize
}

#[derive(Debug, Clone)]
pub struct Jet {
    basis: Arc<MonomialBasis>,
    base: Vec<f64>,
    coeffs: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.base == other.base && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(dim: usize, order: usize, base: &[f64]) -> Self {
        assert_eq!(base.len(), dim, "base point dimension");
        let basis = MonomialBasis::get(dim, order);
        let coeffs = vec![0.0; basis.len()];
        Jet { basis, base: base.to_vec(), coeffs }
    }

    pub fn constant(dim: usize, order: usize, base: &[f64], c: f64) -> Self {
        let mut j = Self::zero(dim, order, base);
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function `x_i` expanded around `base`.
    pub fn coordinate(dim: usize, order: usize, base: &[f64], i: usize) -> Self {
        let mut j = Self::constant(dim, order, base, base[i]);
        if order > 0 {
            let mut m = vec![0u32; dim];
            m[i] = 1;
            let k = j.basis.index_of(&m).expect("degree 1 fits");
            j.coeffs[k] = 1.0;
        }
        j
    }

    /// Builds a jet from `(monomial, coefficient)` pairs; repeated monomials add.
    pub fn from_terms<I>(dim: usize, order: usize, base: &[f64], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        if base.len() != dim {
            return Err(Error::ShapeMismatch(format!("base point has {} coordinates, dim is {dim}", base.len())));
        }
        let mut j = Self::zero(dim, order, base);
        for (m, c) in terms {
            if m.len() != dim {
                return Err(Error::ShapeMismatch(format!("monomial {m:?} has wrong length for dim {dim}")));
            }
            let k = j.basis.index_of(&m).ok_or(Error::OrderExceeded {
                requested: m.iter().sum::<u32>() as usize,
                available: order,
            })?;
            j.coeffs[k] += c;
        }
        Ok(j)
    }

    pub(crate) fn from_coeffs(basis: Arc<MonomialBasis>, base: Vec<f64>, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), basis.len());
        Jet { basis, base, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    pub fn order(&self) -> usize {
        self.basis.order
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base
    }

    pub fn basis(&self) -> &Arc<MonomialBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `(x - b)^m`; zero beyond the order.
    pub fn coeff(&self, m: &[u32]) -> f64 {
        self.basis.index_of(m).map_or(0.0, |k| self.coeffs[k])
    }

    /// Nonzero terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.basis
            .monomials
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, &c)| c != 0.0)
            .map(|(m, &c)| (m.as_slice(), c))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// `sum_m c_m (x - b)^m`, summed in canonical order with each monomial
    /// formed as a left-to-right product of integer powers.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let h: Vec<f64> = x.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let mut acc = 0.0;
        for (m, &c) in self.basis.monomials.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let mut v = 1.0;
            for (hj, &e) in h.iter().zip(m) {
                v *= hj.powi(e as i32);
            }
            acc += c * v;
        }
        acc
    }

    /// `∂_m` at the base point, i.e. `m! c_m`.
    pub fn derivative_at_base(&self, m: &[u32]) -> Result<f64> {
        let deg = m.iter().sum::<u32>() as usize;
        if deg > self.order() {
            return Err(Error::OrderExceeded { requested: deg, available: self.order() });
        }
        if m.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!("multi-index {m:?} for dim {}", self.dim())));
        }
        Ok(multi_factorial(m) * self.coeff(m))
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.dim() != other.dim() || self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(())
    }

    /// Cauchy product truncated at the smaller order.
    pub fn multiply(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let order = self.order().min(other.order());
        let basis = MonomialBasis::get(self.dim(), order);
        let mut coeffs = vec![0.0; basis.len()];
        let mut m = vec![0u32; self.dim()];
        for d in 0..=order {
            for i in self.basis.degree_range(d) {
                let a = self.coeffs[i];
                if a == 0.0 {
                    continue;
                }
                for e in 0..=(order - d) {
                    for j in other.basis.degree_range(e) {
                        let b = other.coeffs[j];
                        if b == 0.0 {
                            continue;
                        }
                        for (k, slot) in m.iter_mut().enumerate() {
                            *slot = self.basis.monomials[i][k] + other.basis.monomials[j][k];
                        }
                        let k = basis.index_of(&m).expect("degree within order");
                        coeffs[k] += a * b;
                    }
                }
            }
        }
        Ok(Jet { basis, base: self.base.clone(), coeffs })
    }

    fn combine(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Result<Jet> {
        self.check_compatible(other)?;
        let order = self.order().min(other.order());
        let basis = MonomialBasis::get(self.dim(), order);
        let coeffs = (0..basis.len()).map(|k| f(self.coeffs[k], other.coeffs[k])).collect();
        Ok(Jet { basis, base: self.base.clone(), coeffs })
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.combine(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs.iter_mut().for_each(|v| *v *= c);
        j
    }

    /// Truncates, or pads with zero coefficients.
    pub fn with_order(&self, order: usize) -> Jet {
        let basis = MonomialBasis::get(self.dim(), order);
        let keep = self.basis.len().min(basis.len());
        let mut coeffs = vec![0.0; basis.len()];
        coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        Jet { basis, base: self.base.clone(), coeffs }
    }

    /// `∂/∂x_var` as a jet of one order less (order 0 stays 0).
    pub fn partial(&self, var: usize) -> Jet {
        let order = self.order().saturating_sub(1);
        let basis = MonomialBasis::get(self.dim(), order);
        let mut coeffs = vec![0.0; basis.len()];
        for (m, &c) in self.basis.monomials.iter().zip(&self.coeffs) {
            if m[var] == 0 || c == 0.0 {
                continue;
            }
            let mut d = m.clone();
            d[var] -= 1;
            if let Some(k) = basis.index_of(&d) {
                coeffs[k] += c * m[var] as f64;
            }
        }
        Jet { basis, base: self.base.clone(), coeffs }
    }

    /// Re-expands the truncated polynomial around another base point. Exact
    /// as a polynomial identity, so only meaningful for polynomial fields.
    pub fn recenter(&self, new_base: &[f64]) -> Jet {
        assert_eq!(new_base.len(), self.dim());
        let delta: Vec<f64> = new_base.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let mut coeffs = vec![0.0; self.basis.len()];
        for (m, &c) in self.basis.monomials.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            for_each_submultiset(m, |k| {
                let mut w = c;
                for j in 0..m.len() {
                    w *= binomial(m[j], k[j]) * delta[j].powi((m[j] - k[j]) as i32);
                }
                let idx = self.basis.index_of(k).expect("sub-multi-index fits");
                coeffs[idx] += w;
            });
        }
        Jet { basis: self.basis.clone(), base: new_base.to_vec(), coeffs }
    }
}
