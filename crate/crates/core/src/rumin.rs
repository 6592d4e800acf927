//! Per-algebra tables for the Chevalley-Eilenberg differential `d0`, its
//! Moore-Penrose inverse and the space `E0 = ker d0 ∩ ker d0⁻¹`.
//!
//! The tables are computed once, lazily, and cached on the algebra.

use crate::algebra::StratifiedAlgebra;
use crate::exterior::{insert_front, ExteriorIndex};
use crate::linalg::{inner, orthogonalize, projector, pseudo_inverse, QMatrix};
use crate::rational::{q, Q};
use num_traits::Zero;

#[derive(Debug)]
pub struct DegreeData {
    pub weights: Vec<usize>,
    /// Inner product on `Lambda^k g*` induced by the algebra's gram.
    pub gram: QMatrix,
    /// `d0 : Lambda^k -> Lambda^{k+1}`.
    pub d0: QMatrix,
    /// Pseudo-inverse of `d0` above, `Lambda^{k+1} -> Lambda^k`.
    pub d0_pinv: QMatrix,
    /// Orthogonal, pure-weight basis of `E0^k`, sorted by weight.
    pub e0: Vec<Vec<Q>>,
    pub e0_weights: Vec<usize>,
    pub pi_e0: QMatrix,
}

#[derive(Debug)]
pub struct RuminData {
    pub index: ExteriorIndex,
    pub degrees: Vec<DegreeData>,
}

impl RuminData {
    pub fn build(alg: &StratifiedAlgebra) -> Self {
        let n = alg.dim();
        let index = ExteriorIndex::new(n);
        let inv_gram = alg.gram().inverse().expect("gram is positive definite");
        let mut d0s = Vec::new();
        let mut grams = Vec::new();
        let mut weights = Vec::new();
        for k in 0..=n {
            weights.push(index.basis(k).iter().map(|s| s.iter().map(|&i| alg.layer_of(i)).sum()).collect::<Vec<usize>>());
            grams.push(form_gram(&index, k, &inv_gram));
            d0s.push(d0_matrix(alg, &index, k));
        }
        let mut degrees = Vec::new();
        for k in 0..=n {
            let g_next = if k < n { grams[k + 1].clone() } else { QMatrix::zeros(0, 0) };
            let d0_pinv = pseudo_inverse(&d0s[k], &grams[k], &g_next);
            let (e0, e0_weights) = e0_basis(&index, k, &weights[k], &grams[k], &d0s[k], k.checked_sub(1).map(|j| &d0s[j]));
            let pi_e0 = projector(index.dim(k), &e0, &grams[k]);
            degrees.push(DegreeData {
                weights: weights[k].clone(),
                gram: grams[k].clone(),
                d0: d0s[k].clone(),
                d0_pinv,
                e0,
                e0_weights,
                pi_e0,
            });
        }
        RuminData { index, degrees }
    }

    pub fn dim(&self, k: usize) -> usize {
        self.index.dim(k)
    }

    pub fn degree(&self, k: usize) -> &DegreeData {
        &self.degrees[k]
    }

    /// Matrix of `d0⁻¹ : Lambda^k -> Lambda^{k-1}` (zero map for `k = 0`).
    pub fn d0_inverse_on(&self, k: usize) -> QMatrix {
        if k == 0 {
            QMatrix::zeros(0, self.dim(0))
        } else {
            self.degrees[k - 1].d0_pinv.clone()
        }
    }
}

fn form_gram(index: &ExteriorIndex, k: usize, inv_gram: &QMatrix) -> QMatrix {
    let basis = index.basis(k);
    let m = basis.len();
    let mut g = QMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let v = if k == 0 { q(1) } else { inv_gram.submatrix(&basis[a], &basis[b]).determinant() };
            g[(a, b)] = v.clone();
            g[(b, a)] = v;
        }
    }
    g
}

/// `(d0 w)(X_1..X_{k+1}) = sum_{p<q} (-1)^{p+q} w([X_p,X_q], X_1..^p..^q..)`.
fn d0_matrix(alg: &StratifiedAlgebra, index: &ExteriorIndex, k: usize) -> QMatrix {
    let n = alg.dim();
    if k >= n {
        return QMatrix::zeros(0, index.dim(k));
    }
    let mut m = QMatrix::zeros(index.dim(k + 1), index.dim(k));
    for (row, j) in index.basis(k + 1).iter().enumerate() {
        for p in 0..j.len() {
            for qq in p + 1..j.len() {
                let sign = if (p + qq) % 2 == 0 { 1 } else { -1 };
                let rest: Vec<usize> = j.iter().enumerate().filter(|(t, _)| *t != p && *t != qq).map(|(_, &x)| x).collect();
                for (l, c) in alg.bracket_basis(j[p], j[qq]) {
                    if let Some((s, set)) = insert_front(*l, &rest) {
                        let col = index.index_of(&set);
                        m[(row, col)] += c * q((sign * s) as i64);
                    }
                }
            }
        }
    }
    m
}

fn e0_basis(
    index: &ExteriorIndex,
    k: usize,
    weights: &[usize],
    gram: &QMatrix,
    d0: &QMatrix,
    d0_prev: Option<&QMatrix>,
) -> (Vec<Vec<Q>>, Vec<usize>) {
    let dim = index.dim(k);
    let mut ws: Vec<usize> = weights.to_vec();
    ws.sort_unstable();
    ws.dedup();
    let mut basis = Vec::new();
    let mut basis_w = Vec::new();
    for w in ws {
        let block: Vec<usize> = (0..dim).filter(|&i| weights[i] == w).collect();
        // Constraints on x supported in the block: d0 x = 0 and x ⊥ im(d0_prev).
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for r in 0..d0.rows() {
            let row: Vec<Q> = block.iter().map(|&c| d0[(r, c)].clone()).collect();
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
        if let Some(prev) = d0_prev {
            for c in 0..prev.cols() {
                let col = prev.col(c);
                if col.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let g_col = gram.mul_vec(&col);
                let row: Vec<Q> = block.iter().map(|&i| g_col[i].clone()).collect();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        let null = if rows.is_empty() {
            (0..block.len())
                .map(|i| {
                    let mut v = vec![Q::zero(); block.len()];
                    v[i] = q(1);
                    v
                })
                .collect()
        } else {
            QMatrix::from_rows(&rows).nullspace()
        };
        let lifted: Vec<Vec<Q>> = null
            .into_iter()
            .map(|v| {
                let mut full = vec![Q::zero(); dim];
                for (t, &i) in block.iter().enumerate() {
                    full[i] = v[t].clone();
                }
                full
            })
            .collect();
        for b in orthogonalize(&lifted, gram) {
            debug_assert!(!inner(&b, gram, &b).is_zero());
            basis.push(b);
            basis_w.push(w);
        }
    }
    (basis, basis_w)
}
