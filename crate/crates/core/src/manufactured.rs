//! Field pairs with a known solution: `X^a = g*^{ab} Y_b` for a polynomial
//! inverse metric `g*`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::fields::{Domain, FieldPair};
use crate::jet::Jet;

/// `X^a = sum_b g[a][b] Y_b` with products truncated at the common order.
pub fn manufactured_pair(g_star: &[Vec<Jet>], y: Vec<Jet>, domain: Domain) -> Result<FieldPair> {
    let n = y.len();
    let mut x = Vec::with_capacity(n);
    for row in g_star {
        let mut acc = Jet::zero(n, y[0].order(), y[0].base_point());
        for (g, yb) in row.iter().zip(&y) {
            acc = acc.add(&g.multiply(yb)?)?;
        }
        x.push(acc);
    }
    FieldPair::new(x, y, domain)
}

/// A random manufactured problem around the origin.
#[derive(Debug, Clone)]
pub struct Manufactured {
    /// `g*^{ab}` as jets.
    pub metric: Vec<Vec<Jet>>,
    pub fields: FieldPair,
}

impl Manufactured {
    pub fn metric_at(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.metric.len();
        DMatrix::from_fn(n, n, |a, b| self.metric[a][b].eval(x))
    }
}

fn sym_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let m = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    (&m + m.transpose()) * 0.5
}

/// `g* = S_0 + sum_i x_i S_i + sum_{i<=j} x_i x_j S_ij` with `S_0 >= I` and
/// small symmetric corrections, and `Y = A^T x + q(x)` with `cond(A) <= 10`
/// and a small quadratic `q`. On the cube of half-width `1/2`, `g*` stays
/// positive definite and the origin is the only zero of `Y`. `X` has degree
/// at most 4, so any `order >= 4` represents it exactly.
pub fn random_manufactured<R: Rng + ?Sized>(n: usize, order: usize, rng: &mut R) -> Result<Manufactured> {
    let base = vec![0.0; n];
    let nf = n as f64;
    let m = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let s0 = DMatrix::identity(n, n) + &m * m.transpose() * (0.5 / nf);
    let lin: Vec<DMatrix<f64>> = (0..n).map(|_| sym_gaussian(n, rng) * (0.05 / (nf * nf))).collect();
    let mut quad: Vec<(usize, usize, DMatrix<f64>)> = Vec::new();
    for i in 0..n {
        for j in i..n {
            quad.push((i, j, sym_gaussian(n, rng) * (0.02 / (nf * nf * nf))));
        }
    }
    let metric: Vec<Vec<Jet>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut terms = vec![(vec![0u32; n], s0[(a, b)])];
                    for (i, s) in lin.iter().enumerate() {
                        let mut e = vec![0u32; n];
                        e[i] = 1;
                        terms.push((e, s[(a, b)]));
                    }
                    for (i, j, s) in &quad {
                        let mut e = vec![0u32; n];
                        e[*i] += 1;
                        e[*j] += 1;
                        terms.push((e, s[(a, b)]));
                    }
                    Jet::from_terms(n, order, &base, terms)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let a = loop {
        let a = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
        let sv = a.singular_values();
        if sv.min() > 0.0 && sv.max() / sv.min() <= 10.0 {
            break a / sv.max();
        }
    };
    let smin = a.singular_values().min();
    let y: Vec<Jet> = (0..n)
        .map(|g| {
            let mut terms: Vec<(Vec<u32>, f64)> = (0..n)
                .map(|al| {
                    let mut e = vec![0u32; n];
                    e[al] = 1;
                    (e, a[(al, g)])
                })
                .collect();
            for i in 0..n {
                for j in i..n {
                    let mut e = vec![0u32; n];
                    e[i] += 1;
                    e[j] += 1;
                    let c: f64 = rng.random_range(-1.0..1.0);
                    terms.push((e, c * 0.2 * smin / (nf * nf)));
                }
            }
            Jet::from_terms(n, order, &base, terms)
        })
        .collect::<Result<_>>()?;
    let fields = manufactured_pair(&metric, y, Domain::cube(n, 0.5))?;
    Ok(Manufactured { metric, fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn solves_its_own_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            let m = random_manufactured(n, 6, &mut rng).unwrap();
            let p = vec![0.3; n];
            let g = m.metric_at(&p);
            let y = m.fields.eval_y(&p);
            let x = m.fields.eval_x(&p);
            for a in 0..n {
                let gy: f64 = (0..n).map(|b| g[(a, b)] * y[b]).sum();
                assert!((gy - x[a]).abs() < 1e-12);
            }
            assert!(g.symmetric_eigenvalues().min() > 0.5);
        }
    }
}
