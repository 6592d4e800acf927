//! Index bookkeeping for exterior powers: `k`-subsets in lexicographic order.

use std::collections::HashMap;

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Sign of the permutation sorting `idx`, together with the sorted indices;
/// `None` when an index repeats.
pub fn sort_with_sign(idx: &[usize]) -> Option<(i32, Vec<usize>)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return None;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((sign, v))
}

/// `e^i ^ e^I` for sorted `I`.
pub fn insert_front(i: usize, set: &[usize]) -> Option<(i32, Vec<usize>)> {
    if set.contains(&i) {
        return None;
    }
    let before = set.iter().filter(|&&x| x < i).count();
    let mut v = set.to_vec();
    v.insert(before, i);
    Some((if before % 2 == 0 { 1 } else { -1 }, v))
}

/// `e^I ^ e^J` for sorted `I`, `J`.
pub fn wedge_sets(a: &[usize], b: &[usize]) -> Option<(i32, Vec<usize>)> {
    let mut joined = a.to_vec();
    joined.extend_from_slice(b);
    sort_with_sign(&joined)
}

/// Lookup tables for `Lambda^k` of an `n`-dimensional space, all degrees.
#[derive(Clone, Debug)]
pub struct ExteriorIndex {
    pub n: usize,
    pub bases: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
}

impl ExteriorIndex {
    pub fn new(n: usize) -> Self {
        let bases: Vec<Vec<Vec<usize>>> = (0..=n).map(|k| subsets(n, k)).collect();
        let lookup = bases
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        ExteriorIndex { n, bases, lookup }
    }

    pub fn dim(&self, k: usize) -> usize {
        self.bases.get(k).map_or(0, |b| b.len())
    }

    pub fn basis(&self, k: usize) -> &[Vec<usize>] {
        &self.bases[k]
    }

    pub fn index_of(&self, set: &[usize]) -> usize {
        self.lookup[set.len()][set]
    }
}
