//! Strictly increasing multi-indices and the permutation signs that drive
//! antisymmetric coefficient bookkeeping.
//!
//! Coefficients of a k-form are stored only on increasing index tuples; every
//! operator reduces general tuples to increasing ones through the helpers
//! here.

/// All strictly increasing `k`-tuples over `0..d`, in lexicographic order.
pub fn indices(d: usize, k: usize) -> Vec<Vec<u8>> {
    if k > d {
        return Vec::new();
    }
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut cur: Vec<u8> = (0..k as u8).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < (d - k + i) as u8 {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Number of increasing `k`-tuples over `0..d`.
pub fn count(d: usize, k: usize) -> usize {
    if k > d {
        return 0;
    }
    let mut c: usize = 1;
    for i in 0..k {
        c = c * (d - i) / (i + 1);
    }
    c
}

/// Position of an increasing tuple in the lexicographic table `indices(d, k)`.
pub fn position(d: usize, idx: &[u8]) -> usize {
    // Rank of a combination in lex order.
    let k = idx.len();
    let mut rank = 0usize;
    let mut prev: i64 = -1;
    for (i, &v) in idx.iter().enumerate() {
        for w in (prev + 1) as u8..v {
            rank += count(d - w as usize - 1, k - i - 1);
        }
        prev = v as i64;
    }
    rank
}

/// Inserts `j` into the increasing tuple `idx`. Returns the new tuple and the
/// sign `(-1)^p` where `p` is the insertion position, or `None` when `j` is
/// already present (so the wedge collapses).
pub fn insert(idx: &[u8], j: u8) -> Option<(Vec<u8>, f64)> {
    let mut out = Vec::with_capacity(idx.len() + 1);
    let mut sign = 1.0;
    let mut placed = false;
    for &v in idx {
        if v == j {
            return None;
        }
        if !placed && v > j {
            out.push(j);
            placed = true;
        }
        if !placed {
            sign = -sign;
        }
        out.push(v);
    }
    if !placed {
        out.push(j);
    }
    Some((out, sign))
}

/// Sorts an arbitrary tuple into increasing order, returning the permutation
/// sign, or `None` if any index repeats.
pub fn sort_signed(tuple: &[u8]) -> Option<(Vec<u8>, f64)> {
    let mut v = tuple.to_vec();
    let mut sign = 1.0;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, sign))
}

/// Splits the increasing tuple `k_idx` into every (p, q)-shuffle. Yields
/// `(first, second, sign)` where `sign` is the sign of the permutation taking
/// `k_idx` to `first ++ second`.
pub fn shuffles(k_idx: &[u8], p: usize) -> Vec<(Vec<u8>, Vec<u8>, f64)> {
    let n = k_idx.len();
    assert!(p <= n);
    let mut out = Vec::new();
    for picks in indices(n, p) {
        let mut first = Vec::with_capacity(p);
        let mut second = Vec::with_capacity(n - p);
        let mut in_first = vec![false; n];
        for &t in &picks {
            in_first[t as usize] = true;
        }
        for (t, &v) in k_idx.iter().enumerate() {
            if in_first[t] {
                first.push(v);
            } else {
                second.push(v);
            }
        }
        // Sign: number of inversions between the `second` block elements that
        // precede `first` block elements in the original tuple.
        let mut inversions = 0usize;
        let mut seconds_seen = 0usize;
        for t in 0..n {
            if in_first[t] {
                inversions += seconds_seen;
            } else {
                seconds_seen += 1;
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        out.push((first, second, sign));
    }
    out
}

/// Appends `j` as the LAST slot of `idx` and sorts it in, i.e. the sign of
/// evaluating a form on `(e_idx..., e_j)`. `None` when `j` occurs in `idx`.
pub fn insert_last(idx: &[u8], j: u8) -> Option<(Vec<u8>, f64)> {
    if idx.contains(&j) {
        return None;
    }
    let greater = idx.iter().filter(|&&v| v > j).count();
    let (sorted, _) = insert(idx, j)?;
    let sign = if greater % 2 == 0 { 1.0 } else { -1.0 };
    Some((sorted, sign))
}

/// Removes the entry at position `t`, returning the remaining tuple.
pub fn remove_at(idx: &[u8], t: usize) -> Vec<u8> {
    let mut out = idx.to_vec();
    out.remove(t);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_and_positions_agree() {
        for d in 0..=6 {
            for k in 0..=6 {
                let table = indices(d, k);
                assert_eq!(table.len(), count(d, k));
                for (p, idx) in table.iter().enumerate() {
                    assert_eq!(position(d, idx), p, "d={d} k={k} idx={idx:?}");
                }
            }
        }
    }

    #[test]
    fn insert_signs() {
        assert_eq!(insert(&[1, 3], 0), Some((vec![0, 1, 3], 1.0)));
        assert_eq!(insert(&[1, 3], 2), Some((vec![1, 2, 3], -1.0)));
        assert_eq!(insert(&[1, 3], 4), Some((vec![1, 3, 4], 1.0)));
        assert_eq!(insert(&[1, 3], 3), None);
    }

    #[test]
    fn sort_signs() {
        assert_eq!(sort_signed(&[2, 0, 1]), Some((vec![0, 1, 2], 1.0)));
        assert_eq!(sort_signed(&[1, 0]), Some((vec![0, 1], -1.0)));
        assert_eq!(sort_signed(&[1, 1]), None);
    }

    #[test]
    fn shuffle_signs_sum_to_wedge_expansion() {
        // For K = (0,1,2), the (1,2)-shuffles are (0|12)+, (1|02)-, (2|01)+.
        let sh = shuffles(&[0, 1, 2], 1);
        assert_eq!(sh.len(), 3);
        assert_eq!(sh[0], (vec![0], vec![1, 2], 1.0));
        assert_eq!(sh[1], (vec![1], vec![0, 2], -1.0));
        assert_eq!(sh[2], (vec![2], vec![0, 1], 1.0));
    }
}
