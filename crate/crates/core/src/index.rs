//! Multi-index bookkeeping shared by tensors, jets and the series builder.
//!
//! Two encodings are used: index tuples `(c_1, ..., c_k)` with `c_i < n`, and
//! count vectors `m` with `m_j` = number of occurrences of `j`.

/// Row-major offset of an index tuple.
pub fn offset(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Calls `f` on every index tuple of length `rank` in row-major order.
pub fn for_each_index(n: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    loop {
        f(&idx);
        if !advance(&mut idx, n) {
            return;
        }
    }
}

fn advance(idx: &mut [usize], n: usize) -> bool {
    for slot in (0..idx.len()).rev() {
        idx[slot] += 1;
        if idx[slot] < n {
            return true;
        }
        idx[slot] = 0;
    }
    false
}

/// Calls `f` on every non-decreasing tuple of length `k` over `0..n`, in
/// lexicographic order. These are the canonical representatives of
/// fully symmetric index groups.
pub fn for_each_sorted(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if n == 0 && k > 0 {
        return;
    }
    let mut idx = vec![0usize; k];
    loop {
        f(&idx);
        let mut slot = k;
        loop {
            if slot == 0 {
                return;
            }
            slot -= 1;
            if idx[slot] + 1 < n {
                let v = idx[slot] + 1;
                for s in &mut idx[slot..] {
                    *s = v;
                }
                break;
            }
        }
    }
}

/// Rearranges into the next lexicographic permutation; false when `v` was the
/// last one (and leaves it reset to sorted order).
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Calls `f` on every distinct arrangement of a sorted tuple.
pub fn for_each_arrangement(sorted: &[usize], mut f: impl FnMut(&[usize])) {
    let mut v = sorted.to_vec();
    loop {
        f(&v);
        if !next_permutation(&mut v) {
            return;
        }
    }
}

pub fn counts_of(idx: &[usize], n: usize) -> Vec<u32> {
    let mut m = vec![0u32; n];
    for &i in idx {
        m[i] += 1;
    }
    m
}

/// Sorted tuple with the given occurrence counts.
pub fn tuple_of(counts: &[u32]) -> Vec<usize> {
    let mut v = Vec::with_capacity(counts.iter().sum::<u32>() as usize);
    for (j, &c) in counts.iter().enumerate() {
        v.extend(std::iter::repeat_n(j, c as usize));
    }
    v
}

pub fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// `m! = prod m_j!`
pub fn multi_factorial(m: &[u32]) -> f64 {
    m.iter().map(|&c| factorial(c)).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Number of non-decreasing tuples of length `k` over `n` symbols.
pub fn sorted_count(n: usize, k: usize) -> usize {
    if n == 0 {
        return usize::from(k == 0);
    }
    binomial((n + k - 1) as u32, k as u32) as usize
}

/// Calls `f` on every count vector `s` with `s_j <= m_j` for all `j`.
pub fn for_each_submultiset(m: &[u32], mut f: impl FnMut(&[u32])) {
    let mut s = vec![0u32; m.len()];
    loop {
        f(&s);
        let mut j = 0;
        loop {
            if j == m.len() {
                return;
            }
            if s[j] < m[j] {
                s[j] += 1;
                break;
            }
            s[j] = 0;
            j += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_iteration_matches_offsets() {
        let mut seen = Vec::new();
        for_each_index(3, 2, |i| seen.push(offset(i, 3)));
        assert_eq!(seen, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn sorted_tuples_are_counted_by_binomials() {
        for n in 1..5 {
            for k in 0..5 {
                let mut c = 0;
                let mut prev: Option<Vec<usize>> = None;
                for_each_sorted(n, k, |i| {
                    assert!(i.windows(2).all(|w| w[0] <= w[1]));
                    if let Some(p) = &prev {
                        assert!(p.as_slice() < i);
                    }
                    prev = Some(i.to_vec());
                    c += 1;
                });
                assert_eq!(c, sorted_count(n, k));
            }
        }
    }

    #[test]
    fn arrangements_of_multisets() {
        let mut c = 0;
        for_each_arrangement(&[0, 0, 1, 2], |_| c += 1);
        assert_eq!(c, 12);
        let mut c = 0;
        for_each_arrangement(&[], |_| c += 1);
        assert_eq!(c, 1);
    }

    #[test]
    fn submultisets_and_binomials() {
        let mut c = 0;
        for_each_submultiset(&[2, 0, 1], |_| c += 1);
        assert_eq!(c, 6);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(tuple_of(&counts_of(&[2, 0, 2, 1], 3)), vec![0, 1, 2, 2]);
        assert_eq!(multi_factorial(&[3, 2]), 12.0);
    }
}
