//! Dense real tensors with `k` upper and `l` lower slots over dimension `n`.
//!
//! Entries are stored row-major over the slot sequence `(upper..., lower...)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{for_each_arrangement, for_each_index, offset};

/// Condition number above which a bilinear form counts as degenerate.
pub const DEFAULT_CONDITION_BOUND: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorDoc", into = "TensorDoc")]
pub struct MultiTensor {
    dim: usize,
    upper: usize,
    lower: usize,
    data: Vec<f64>,
    sym_groups: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct TensorDoc {
    dim: usize,
    upper_rank: usize,
    lower_rank: usize,
    entries: Vec<f64>,
    #[serde(default)]
    sym_groups: Vec<Vec<usize>>,
}

impl TryFrom<TensorDoc> for MultiTensor {
    type Error = Error;

    fn try_from(doc: TensorDoc) -> Result<Self> {
        let mut t = MultiTensor::from_vec(doc.dim, doc.upper_rank, doc.lower_rank, doc.entries)?;
        for g in &doc.sym_groups {
            t.check_group(g)?;
            if !t.is_symmetric(g) {
                return Err(Error::InvalidIndexGroup {
                    group: g.clone(),
                    reason: "entries are not symmetric in the declared group".into(),
                });
            }
        }
        t.sym_groups = doc.sym_groups;
        Ok(t)
    }
}

impl From<MultiTensor> for TensorDoc {
    fn from(t: MultiTensor) -> Self {
        TensorDoc {
            dim: t.dim,
            upper_rank: t.upper,
            lower_rank: t.lower,
            entries: t.data,
            sym_groups: t.sym_groups,
        }
    }
}

fn pow(n: usize, k: usize) -> usize {
    n.checked_pow(k as u32).expect("tensor size overflows usize")
}

impl MultiTensor {
    pub fn zeros(dim: usize, upper: usize, lower: usize) -> Self {
        assert!(dim > 0, "tensor dimension must be positive");
        MultiTensor {
            dim,
            upper,
            lower,
            data: vec![0.0; pow(dim, upper + lower)],
            sym_groups: Vec::new(),
        }
    }

    pub fn from_vec(dim: usize, upper: usize, lower: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ShapeMismatch("dimension must be positive".into()));
        }
        let expected = pow(dim, upper + lower);
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "{} entries given, shape ({dim}; {upper} up, {lower} down) needs {expected}",
                data.len()
            )));
        }
        Ok(MultiTensor { dim, upper, lower, data, sym_groups: Vec::new() })
    }

    /// Fills entries by calling `f` on each index tuple in row-major order.
    pub fn from_fn(dim: usize, upper: usize, lower: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, upper, lower);
        let mut k = 0;
        for_each_index(dim, upper + lower, |idx| {
            t.data[k] = f(idx);
            k += 1;
        });
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper_rank(&self) -> usize {
        self.upper
    }

    pub fn lower_rank(&self) -> usize {
        self.lower
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn sym_groups(&self) -> &[Vec<usize>] {
        &self.sym_groups
    }

    /// Records a group as symmetric without averaging. Callers must have
    /// written the entries symmetrically.
    pub(crate) fn declare_symmetric(&mut self, group: Vec<usize>) {
        debug_assert!(self.is_symmetric(&group));
        if !self.sym_groups.contains(&group) {
            self.sym_groups.push(group);
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank());
        self.data[offset(idx, self.dim)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_shape(&self, other: &MultiTensor) -> bool {
        self.dim == other.dim && self.upper == other.upper && self.lower == other.lower
    }

    fn zip(&self, other: &MultiTensor, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch(format!(
                "({}; {}, {}) vs ({}; {}, {})",
                self.dim, self.upper, self.lower, other.dim, other.upper, other.lower
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        let sym_groups = self
            .sym_groups
            .iter()
            .filter(|g| other.sym_groups.contains(g))
            .cloned()
            .collect();
        Ok(MultiTensor { dim: self.dim, upper: self.upper, lower: self.lower, data, sym_groups })
    }

    pub fn add(&self, other: &MultiTensor) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &MultiTensor) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|v| *v *= c);
        t
    }

    fn check_group(&self, group: &[usize]) -> Result<()> {
        let bad = |reason: &str| Error::InvalidIndexGroup { group: group.to_vec(), reason: reason.into() };
        if group.iter().any(|&s| s >= self.rank()) {
            return Err(bad("slot out of range"));
        }
        let mut sorted = group.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad("repeated slot"));
        }
        if let (Some(&lo), Some(&hi)) = (sorted.first(), sorted.last()) {
            if (lo < self.upper) != (hi < self.upper) {
                return Err(bad("mixed variance"));
            }
        }
        Ok(())
    }

    /// Exact test: every entry equals the entry at the sorted rearrangement
    /// of its `group` slots.
    pub fn is_symmetric(&self, group: &[usize]) -> bool {
        if self.check_group(group).is_err() {
            return false;
        }
        let mut ok = true;
        let mut canon = vec![0usize; self.rank()];
        let mut g = vec![0usize; group.len()];
        let mut slots = group.to_vec();
        slots.sort_unstable();
        for_each_index(self.dim, self.rank(), |idx| {
            if !ok {
                return;
            }
            for (k, &s) in group.iter().enumerate() {
                g[k] = idx[s];
            }
            g.sort_unstable();
            canon.copy_from_slice(idx);
            for (k, &s) in slots.iter().enumerate() {
                canon[s] = g[k];
            }
            if self.data[offset(idx, self.dim)] != self.data[offset(&canon, self.dim)] {
                ok = false;
            }
        });
        ok
    }

    /// Averages over all permutations of the slots in `group`.
    ///
    /// Every orbit is averaged once, anchored at its sorted representative
    /// `r` as `r + sum(v - r) / |orbit|`, and the result is written to every
    /// member. A second application therefore reproduces the stored entries
    /// bit for bit.
    pub fn symmetrize(&self, group: &[usize]) -> Result<Self> {
        self.check_group(group)?;
        let mut group = group.to_vec();
        group.sort_unstable();
        let mut out = self.clone();
        if group.len() > 1 {
            let n = self.dim;
            let mut scratch = vec![0usize; self.rank()];
            let mut offsets = Vec::new();
            for_each_index(n, self.rank(), |idx| {
                let g: Vec<usize> = group.iter().map(|&s| idx[s]).collect();
                if g.windows(2).any(|w| w[0] > w[1]) {
                    return;
                }
                scratch.copy_from_slice(idx);
                offsets.clear();
                for_each_arrangement(&g, |arr| {
                    for (k, &s) in group.iter().enumerate() {
                        scratch[s] = arr[k];
                    }
                    offsets.push(offset(&scratch, n));
                });
                let r = self.data[offsets[0]];
                let dev: f64 = offsets.iter().map(|&o| self.data[o] - r).sum();
                let mean = r + dev / offsets.len() as f64;
                for &o in &offsets {
                    out.data[o] = mean;
                }
            });
        }
        out.sym_groups.retain(|g| g.iter().all(|s| group.contains(s)) || g.iter().all(|s| !group.contains(s)));
        if !out.sym_groups.contains(&group) {
            out.sym_groups.push(group);
        }
        Ok(out)
    }

    /// Einstein contraction over `pairs` of `(slot of self, slot of other)`;
    /// each pair must join an upper slot with a lower one.
    ///
    /// Output slots: free uppers of `self`, free uppers of `other`, free lowers
    /// of `self`, free lowers of `other`, each in their original order.
    pub fn contract(&self, other: &MultiTensor, pairs: &[(usize, usize)]) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::InvalidContraction(format!("dimensions {} and {}", self.dim, other.dim)));
        }
        let mut used_a = vec![false; self.rank()];
        let mut used_b = vec![false; other.rank()];
        for &(a, b) in pairs {
            if a >= self.rank() || b >= other.rank() {
                return Err(Error::InvalidContraction(format!("slot pair ({a}, {b}) out of range")));
            }
            if used_a[a] || used_b[b] {
                return Err(Error::InvalidContraction(format!("slot pair ({a}, {b}) reuses a slot")));
            }
            let a_up = a < self.upper;
            let b_up = b < other.upper;
            if a_up == b_up {
                return Err(Error::InvalidContraction(format!(
                    "slot pair ({a}, {b}) joins two {} slots",
                    if a_up { "upper" } else { "lower" }
                )));
            }
            used_a[a] = true;
            used_b[b] = true;
        }
        let free = |used: &[bool], range: std::ops::Range<usize>| -> Vec<usize> {
            range.filter(|&s| !used[s]).collect()
        };
        let a_up = free(&used_a, 0..self.upper);
        let a_lo = free(&used_a, self.upper..self.rank());
        let b_up = free(&used_b, 0..other.upper);
        let b_lo = free(&used_b, other.upper..other.rank());
        let upper = a_up.len() + b_up.len();
        let lower = a_lo.len() + b_lo.len();

        let n = self.dim;
        let mut ia = vec![0usize; self.rank()];
        let mut ib = vec![0usize; other.rank()];
        let out = MultiTensor::from_fn(n, upper, lower, |ri| {
            let (ru, rl) = ri.split_at(upper);
            for (k, &s) in a_up.iter().enumerate() {
                ia[s] = ru[k];
            }
            for (k, &s) in b_up.iter().enumerate() {
                ib[s] = ru[a_up.len() + k];
            }
            for (k, &s) in a_lo.iter().enumerate() {
                ia[s] = rl[k];
            }
            for (k, &s) in b_lo.iter().enumerate() {
                ib[s] = rl[a_lo.len() + k];
            }
            let mut acc = 0.0;
            for_each_index(n, pairs.len(), |si| {
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    ia[a] = si[k];
                    ib[b] = si[k];
                }
                acc += self.data[offset(&ia, n)] * other.data[offset(&ib, n)];
            });
            acc
        });
        Ok(out)
    }
}

/// A general (not necessarily symmetric) bilinear form on `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bilinear {
    m: DMatrix<f64>,
}

impl Bilinear {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!("bilinear form needs a square matrix, got {}x{}", m.nrows(), m.ncols())));
        }
        Ok(Bilinear { m })
    }

    pub fn identity(n: usize) -> Self {
        Bilinear { m: DMatrix::identity(n, n) }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.m.amax()
    }

    /// As a rank-2 tensor with `upper` upper slots (0, 1 or 2).
    pub fn to_tensor(&self, upper: usize) -> MultiTensor {
        assert!(upper <= 2);
        let m = &self.m;
        MultiTensor::from_fn(self.dim(), upper, 2 - upper, |i| m[(i[0], i[1])])
    }

    pub fn condition_number(&self) -> f64 {
        let sv = self.m.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn inverse(&self) -> Result<Bilinear> {
        invert_bilinear(self)
    }
}

pub fn invert_bilinear(u: &Bilinear) -> Result<Bilinear> {
    invert_bilinear_with_bound(u, DEFAULT_CONDITION_BOUND)
}

pub fn invert_bilinear_with_bound(u: &Bilinear, bound: f64) -> Result<Bilinear> {
    let cond = u.condition_number();
    if !(cond <= bound) {
        return Err(Error::DegenerateForm { cond, bound });
    }
    match u.m.clone().lu().try_inverse() {
        Some(inv) => Ok(Bilinear { m: inv }),
        None => Err(Error::DegenerateForm { cond: f64::INFINITY, bound }),
    }
}
