//! The tensor hierarchy equation
//!
//! ```text
//! sum_i U_{c_i b} T^{ab}_{c_1..(c_i omitted)..c_N} = R^a_{c_1..c_N}
//! ```
//!
//! for `T` symmetric in `(a, b)` and in its `N - 1` lower slots, given a
//! non-degenerate `U` and `R` symmetric in its `N` lower slots.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::index::{for_each_arrangement, for_each_sorted, offset, sorted_count};
use crate::tensor::{invert_bilinear, Bilinear, MultiTensor};

/// Largest number of unknowns [`brute_force_solve`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 5000;

#[derive(Debug, Clone)]
pub struct TensorEquation {
    order: usize,
    u: Bilinear,
    u_inv: Bilinear,
    r: MultiTensor,
}

impl TensorEquation {
    /// Symmetrizes `r` over its lower slots and inverts `u`.
    pub fn new(u: Bilinear, r: MultiTensor) -> Result<Self> {
        let u_inv = invert_bilinear(&u)?;
        Self::with_inverse(u, u_inv, r)
    }

    pub(crate) fn with_inverse(u: Bilinear, u_inv: Bilinear, r: MultiTensor) -> Result<Self> {
        if r.upper_rank() != 1 {
            return Err(Error::ShapeMismatch(format!("R needs one upper slot, has {}", r.upper_rank())));
        }
        let order = r.lower_rank();
        if order < 2 {
            return Err(Error::InvalidOrder(order));
        }
        if r.dim() != u.dim() {
            return Err(Error::ShapeMismatch(format!("R has dimension {}, U {}", r.dim(), u.dim())));
        }
        let group: Vec<usize> = (1..=order).collect();
        let r = if r.sym_groups().contains(&group) { r } else { r.symmetrize(&group)? };
        Ok(TensorEquation { order, u, u_inv, r })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn u(&self) -> &Bilinear {
        &self.u
    }

    pub fn u_inv(&self) -> &Bilinear {
        &self.u_inv
    }

    pub fn r(&self) -> &MultiTensor {
        &self.r
    }

    pub fn residual_of(&self, t: &MultiTensor) -> Result<f64> {
        equation_residual(&self.u, t, &self.r, self.order)
    }
}

/// `max(1, |R|, |U| |T|)`, the scale residual tolerances refer to.
pub fn residual_scale(u: &Bilinear, t: &MultiTensor, r: &MultiTensor) -> f64 {
    1f64.max(r.sup_norm()).max(u.sup_norm() * t.sup_norm())
}

fn pow(n: usize, k: usize) -> usize {
    n.pow(k as u32)
}

/// Order-2 closed form
/// `T^{ab}_c = (U^{bd} R^a_{cd} + U^{ad} R^b_{cd} - U_{cc'} U^{aa'} U^{bb'} R^{c'}_{a'b'}) / 2`,
/// written entry by entry over the full index range.
pub fn solve_order2(u: &Bilinear, r: &MultiTensor) -> Result<MultiTensor> {
    let eq = TensorEquation::new(u.clone(), r.clone())?;
    if eq.order != 2 {
        return Err(Error::InvalidOrder(eq.order));
    }
    let n = u.dim();
    let ui = eq.u_inv.matrix();
    let um = u.matrix();
    let rd = eq.r.data();
    let rr = |a: usize, b: usize, c: usize| rd[(a * n + b) * n + c];
    let mut t = MultiTensor::zeros(n, 2, 1);
    for a in 0..n {
        for b in a..n {
            for c in 0..n {
                let mut v = 0.0;
                for d in 0..n {
                    v += ui[(b, d)] * rr(a, c, d) + ui[(a, d)] * rr(b, c, d);
                }
                let mut w = 0.0;
                for c2 in 0..n {
                    for a2 in 0..n {
                        for b2 in 0..n {
                            w += um[(c, c2)] * ui[(a, a2)] * ui[(b, b2)] * rr(c2, a2, b2);
                        }
                    }
                }
                let val = 0.5 * (v - w);
                t.data_mut()[(a * n + b) * n + c] = val;
                t.data_mut()[(b * n + a) * n + c] = val;
            }
        }
    }
    t.declare_symmetric(vec![0, 1]);
    t.declare_symmetric(vec![2]);
    Ok(t)
}

/// General-order closed form
/// `T^{ab}_{g} = (U^{bd} R^a_{d g} + U^{ad} R^b_{d g}
///              - (1/(N-1)) sum_i U_{g_i g'} U^{aa'} U^{bb'} R^{g'}_{a'b' g without g_i}) / N`.
///
/// Evaluated once per orbit of the symmetry group and copied to the orbit,
/// so the output is exactly symmetric.
pub fn solve_order_n(eq: &TensorEquation) -> MultiTensor {
    let n = eq.u.dim();
    let big_n = eq.order;
    let low = big_n - 1;
    let um = eq.u.matrix();
    let ui = eq.u_inv.matrix();
    let rd = eq.r.data();
    let r_stride = pow(n, big_n);

    // Q_rest[g'][a][b] = U^{aa'} U^{bb'} R^{g'}_{a'b' rest}, for sorted rests.
    let mut q_index: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut q_data: Vec<f64> = Vec::new();
    let rest_len = big_n - 2;
    let mut idx = vec![0usize; big_n];
    for_each_sorted(n, rest_len, |rest| {
        let base = q_data.len();
        q_index.insert(rest.to_vec(), base);
        q_data.resize(base + n * n * n, 0.0);
        idx[2..].copy_from_slice(rest);
        for g in 0..n {
            let mut raw = DMatrix::<f64>::zeros(n, n);
            for a2 in 0..n {
                idx[0] = a2;
                for b2 in 0..n {
                    idx[1] = b2;
                    raw[(a2, b2)] = rd[g * r_stride + offset(&idx, n)];
                }
            }
            let q = ui * raw * ui.transpose();
            for a in 0..n {
                for b in 0..n {
                    q_data[base + (g * n + a) * n + b] = q[(a, b)];
                }
            }
        }
    });

    let mut t = MultiTensor::zeros(n, 2, low);
    let t_stride = pow(n, low);
    let mut ridx = vec![0usize; big_n];
    let mut rest = vec![0usize; rest_len];
    let inv_n = 1.0 / big_n as f64;
    let inv_low = 1.0 / low as f64;
    for_each_sorted(n, low, |g| {
        ridx[1..].copy_from_slice(g);
        for a in 0..n {
            for b in a..n {
                let mut t1 = 0.0;
                let mut t2 = 0.0;
                for d in 0..n {
                    ridx[0] = d;
                    let off = offset(&ridx, n);
                    t1 += ui[(b, d)] * rd[a * r_stride + off];
                    t2 += ui[(a, d)] * rd[b * r_stride + off];
                }
                let mut t3 = 0.0;
                for i in 0..low {
                    rest[..i].copy_from_slice(&g[..i]);
                    rest[i..].copy_from_slice(&g[i + 1..]);
                    let base = q_index[&rest];
                    for g2 in 0..n {
                        t3 += um[(g[i], g2)] * q_data[base + (g2 * n + a) * n + b];
                    }
                }
                let val = inv_n * (t1 + t2 - inv_low * t3);
                let data = t.data_mut();
                for_each_arrangement(g, |arr| {
                    let o = offset(arr, n);
                    data[(a * n + b) * t_stride + o] = val;
                    data[(b * n + a) * t_stride + o] = val;
                });
            }
        }
    });
    t.declare_symmetric(vec![0, 1]);
    t.declare_symmetric((2..2 + low).collect());
    t
}

/// Sup-norm of `sum_i U_{c_i b} T^{ab}_{c without c_i} - R^a_c` over all
/// index tuples.
pub fn equation_residual(u: &Bilinear, t: &MultiTensor, r: &MultiTensor, order: usize) -> Result<f64> {
    let n = u.dim();
    if order < 1
        || t.dim() != n
        || r.dim() != n
        || t.upper_rank() != 2
        || t.lower_rank() + 1 != order
        || r.upper_rank() != 1
        || r.lower_rank() != order
    {
        return Err(Error::InvalidContraction(format!(
            "shapes T({};{},{}) R({};{},{}) U({n}) do not fit order {order}",
            t.dim(),
            t.upper_rank(),
            t.lower_rank(),
            r.dim(),
            r.upper_rank(),
            r.lower_rank()
        )));
    }
    let um = u.matrix();
    let td = t.data();
    let rd = r.data();
    let low = order - 1;
    let t_stride = pow(n, low);
    let r_stride = pow(n, order);
    let mut rest = vec![0usize; low];
    let mut worst: f64 = 0.0;
    let mut k = 0usize;
    crate::index::for_each_index(n, order, |c| {
        let mut rest_off = vec![0usize; order];
        for i in 0..order {
            rest[..i].copy_from_slice(&c[..i]);
            rest[i..].copy_from_slice(&c[i + 1..]);
            rest_off[i] = offset(&rest, n);
        }
        for a in 0..n {
            let mut lhs = 0.0;
            for i in 0..order {
                for b in 0..n {
                    lhs += um[(c[i], b)] * td[(a * n + b) * t_stride + rest_off[i]];
                }
            }
            worst = worst.max((lhs - rd[a * r_stride + k]).abs());
        }
        k += 1;
    });
    Ok(worst)
}

/// Independent solver: the least-squares problem over orbit values of the
/// symmetric unknowns, minimum-norm solution. Falls back from the normal
/// equations to a QR factorisation of the transposed system, then to SVD.
pub fn brute_force_solve(eq: &TensorEquation) -> Result<MultiTensor> {
    let n = eq.u.dim();
    let big_n = eq.order;
    let low = big_n - 1;
    let unknowns = n * (n + 1) / 2 * sorted_count(n, low);
    if unknowns > BRUTE_FORCE_LIMIT {
        return Err(Error::ProblemTooLarge { unknowns, limit: BRUTE_FORCE_LIMIT });
    }
    let mut col_of: HashMap<(usize, usize, Vec<usize>), usize> = HashMap::new();
    let mut cols: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for_each_sorted(n, low, |g| {
        for a in 0..n {
            for b in a..n {
                col_of.insert((a, b, g.to_vec()), cols.len());
                cols.push((a, b, g.to_vec()));
            }
        }
    });

    let um = eq.u.matrix();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let r_stride = pow(n, big_n);
    let mut rest = vec![0usize; low];
    for_each_sorted(n, big_n, |c| {
        for a in 0..n {
            let mut entries: Vec<(usize, f64)> = Vec::new();
            for i in 0..big_n {
                rest[..i].copy_from_slice(&c[..i]);
                rest[i..].copy_from_slice(&c[i + 1..]);
                for b in 0..n {
                    let key = (a.min(b), a.max(b), rest.clone());
                    entries.push((col_of[&key], um[(c[i], b)]));
                }
            }
            entries.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
            for (col, v) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == col => last.1 += v,
                    _ => merged.push((col, v)),
                }
            }
            rows.push(merged);
            rhs.push(eq.r.data()[a * r_stride + offset(c, n)]);
        }
    });

    let x = min_norm_solve(&rows, &rhs, cols.len());

    let mut t = MultiTensor::zeros(n, 2, low);
    let t_stride = pow(n, low);
    let data = t.data_mut();
    for (k, (a, b, g)) in cols.iter().enumerate() {
        for_each_arrangement(g, |arr| {
            let o = offset(arr, n);
            data[(a * n + b) * t_stride + o] = x[k];
            data[(b * n + a) * t_stride + o] = x[k];
        });
    }
    t.declare_symmetric(vec![0, 1]);
    t.declare_symmetric((2..2 + low).collect());
    Ok(t)
}

fn min_norm_solve(rows: &[Vec<(usize, f64)>], rhs: &[f64], ncols: usize) -> Vec<f64> {
    let m = rows.len();
    let mut at = DMatrix::<f64>::zeros(ncols, m);
    for (i, r) in rows.iter().enumerate() {
        for &(c, v) in r {
            at[(c, i)] = v;
        }
    }
    let b = DVector::from_column_slice(rhs);
    // Normal equations of the row space first; kept only when the residual
    // is at round-off level, since they square the condition number.
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncols];
    for (i, r) in rows.iter().enumerate() {
        for &(c, v) in r {
            by_col[c].push((i, v));
        }
    }
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for col in &by_col {
        for &(i, vi) in col {
            for &(j, vj) in col {
                gram[(i, j)] += vi * vj;
            }
        }
    }
    if let Some(chol) = gram.cholesky() {
        let mut y = chol.solve(&b);
        let mut x = &at * &y;
        for _ in 0..2 {
            let resid = &b - at.tr_mul(&x);
            y += chol.solve(&resid);
            x = &at * &y;
        }
        let resid = (&b - at.tr_mul(&x)).amax();
        let nnz = rows.iter().map(|r| r.len()).max().unwrap_or(0) as f64;
        let floor = 8.0 * f64::EPSILON * (at.amax() * x.amax() * nnz + b.amax());
        if resid <= floor {
            return x.as_slice().to_vec();
        }
    }
    if m <= ncols {
        // A^T = QR gives x = Q R^{-T} b when A has full row rank.
        let qr = at.clone().qr();
        let r = qr.r();
        let diag_max = r.diagonal().amax();
        if r.diagonal().iter().all(|d| d.abs() > 1e-13 * diag_max) {
            let q = qr.q();
            let solve = |rhs: &DVector<f64>| -> DVector<f64> {
                let z = r.tr_solve_upper_triangular(rhs).expect("nonzero diagonal");
                &q * z
            };
            let mut x = solve(&b);
            let resid = &b - at.tr_mul(&x);
            x += solve(&resid);
            return x.as_slice().to_vec();
        }
    }
    let a = at.transpose();
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-13 * svd.singular_values.max())
        .expect("SVD with both factors computed");
    x.as_slice().to_vec()
}
