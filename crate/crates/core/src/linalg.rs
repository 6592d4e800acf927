//! Dense exact linear algebra over the rationals.
//!
//! Everything here is small (dimensions are exterior powers of Lie algebras of
//! dimension at most about ten), so plain Gaussian elimination is used.

use crate::rational::{q_one, q_zero, Q};
use num_traits::{Signed, Zero};
use std::fmt;
use std::ops::{Index, IndexMut};

#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self[(r, c)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (r, c): (usize, usize)) -> &Q {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Q {
        &mut self.data[r * self.cols + c]
    }
}

/// Result of reducing a matrix to reduced row echelon form.
pub struct Rref {
    pub reduced: QMatrix,
    pub pivots: Vec<usize>,
    /// Invertible `E` with `E * original = reduced`.
    pub transform: QMatrix,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![q_zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = q_one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn from_cols(rows: usize, cols: &[Vec<Q>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn diagonal(d: &[Q]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> Vec<Q> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = q_zero();
                for (j, x) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !x.is_zero() {
                        acc += a * x;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> QMatrix {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                m[(i, j)] = self[(r, c)].clone();
            }
        }
        m
    }

    pub fn rref(&self) -> Rref {
        let mut a = self.clone();
        let mut e = QMatrix::identity(self.rows);
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = (row..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(row, p);
            e.swap_rows(row, p);
            let inv = q_one() / &a[(row, col)];
            a.scale_row(row, &inv);
            e.scale_row(row, &inv);
            for r in 0..a.rows {
                if r != row && !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone();
                    a.axpy_row(r, row, &f);
                    e.axpy_row(r, row, &f);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Rref { reduced: a, pivots, transform: e }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: &Q) {
        for c in 0..self.cols {
            let v = &mut self.data[r * self.cols + c];
            if !v.is_zero() {
                *v *= s;
            }
        }
    }

    /// `row[target] -= f * row[source]`
    fn axpy_row(&mut self, target: usize, source: usize, f: &Q) {
        for c in 0..self.cols {
            let s = self.data[source * self.cols + c].clone();
            if !s.is_zero() {
                self.data[target * self.cols + c] -= f * s;
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Basis of the right null space, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let Rref { reduced, pivots, .. } = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![q_zero(); self.cols];
            v[free] = q_one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -reduced[(i, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Some solution of `self * x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.rows);
        let Rref { pivots, transform, .. } = self.rref();
        let eb = transform.mul_vec(b);
        if eb[pivots.len()..].iter().any(|x| !x.is_zero()) {
            return None;
        }
        let mut x = vec![q_zero(); self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            x[p] = eb[i].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let Rref { pivots, transform, .. } = self.rref();
        (pivots.len() == self.rows).then_some(transform)
    }

    pub fn determinant(&self) -> Q {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = q_one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
                return q_zero();
            };
            if p != col {
                a.swap_rows(p, col);
                det = -det;
            }
            let pivot = a[(col, col)].clone();
            det *= &pivot;
            for r in col + 1..n {
                if !a[(r, col)].is_zero() {
                    let f = &a[(r, col)] / &pivot;
                    a.axpy_row(r, col, &f);
                }
            }
        }
        det
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Sylvester's criterion on leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        if !self.is_symmetric() {
            return false;
        }
        (1..=self.rows).all(|k| {
            let idx: Vec<usize> = (0..k).collect();
            self.submatrix(&idx, &idx).determinant().is_positive()
        })
    }
}

pub fn inner(u: &[Q], gram: &QMatrix, v: &[Q]) -> Q {
    let gv = gram.mul_vec(v);
    u.iter().zip(&gv).fold(q_zero(), |acc, (a, b)| if a.is_zero() { acc } else { acc + a * b })
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero())
}

/// Gram-Schmidt without normalisation; dependent inputs are dropped.
pub fn orthogonalize(vectors: &[Vec<Q>], gram: &QMatrix) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    let mut norms: Vec<Q> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for (b, nb) in out.iter().zip(&norms) {
            let c = inner(&w, gram, b) / nb;
            if !c.is_zero() {
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= &c * bi;
                }
            }
        }
        if !is_zero_vec(&w) {
            let n = inner(&w, gram, &w);
            out.push(w);
            norms.push(n);
        }
    }
    out
}

/// Orthogonal projector onto `span(vectors)` with respect to `gram`.
pub fn projector(dim: usize, vectors: &[Vec<Q>], gram: &QMatrix) -> QMatrix {
    let basis = orthogonalize(vectors, gram);
    let mut p = QMatrix::zeros(dim, dim);
    for b in &basis {
        let nb = inner(b, gram, b);
        let gb = gram.mul_vec(b);
        for i in 0..dim {
            if b[i].is_zero() {
                continue;
            }
            let bi = &b[i] / &nb;
            for j in 0..dim {
                if !gb[j].is_zero() {
                    p[(i, j)] += &bi * &gb[j];
                }
            }
        }
    }
    p
}

/// Moore-Penrose inverse of `a : (R^n, g_dom) -> (R^m, g_cod)`.
///
/// The result sends `y` to the unique `x` orthogonal to `ker a` with
/// `a x` equal to the orthogonal projection of `y` onto `im a`.
pub fn pseudo_inverse(a: &QMatrix, g_dom: &QMatrix, g_cod: &QMatrix) -> QMatrix {
    let (m, n) = (a.rows(), a.cols());
    let Rref { pivots, transform, .. } = a.rref();
    // Right inverse on the image: free variables set to zero.
    let mut s = QMatrix::zeros(n, m);
    for (i, &p) in pivots.iter().enumerate() {
        for j in 0..m {
            s[(p, j)] = transform[(i, j)].clone();
        }
    }
    let cols: Vec<Vec<Q>> = (0..n).map(|j| a.col(j)).collect();
    let p_im = projector(m, &cols, g_cod);
    let p_ker = projector(n, &a.nullspace(), g_dom);
    let keep = QMatrix::identity(n).sub(&p_ker);
    keep.mul(&s).mul(&p_im)
}
