//! Left-invariant (vector-valued) forms on a stratified algebra.
//!
//! A `k`-form with values in `R^m` stores, for every value component, its
//! coefficients on the coframe monomials `e^I` (sorted `I`, lexicographic).
//! The convention is `e^I(e_{i1},...,e_{ik}) = 1`, so `e^1 ^ e^2 (e_1,e_2) = 1`.

use crate::algebra::{Alg, StratifiedAlgebra};
use crate::exterior::{sort_with_sign, wedge_sets};
use crate::linalg::{inner, QMatrix};
use crate::rational::{q, Q};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("forms live on different algebras")]
    AlgebraMismatch,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("value dimension mismatch: {0} vs {1}")]
    ValueMismatch(usize, usize),
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("repeated index in a monomial")]
    RepeatedIndex,
    #[error("degree {0} exceeds the dimension")]
    DegreeTooLarge(usize),
}

#[derive(Clone, Debug)]
pub struct AlgebraForm {
    alg: Alg,
    degree: usize,
    coeffs: Vec<Vec<Q>>,
}

impl PartialEq for AlgebraForm {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.alg, &other.alg) || *self.alg == *other.alg)
            && self.degree == other.degree
            && self.coeffs == other.coeffs
    }
}

impl AlgebraForm {
    pub fn zero(alg: &Alg, degree: usize, vdim: usize) -> Self {
        let d = alg.rumin().dim(degree);
        AlgebraForm { alg: alg.clone(), degree, coeffs: vec![vec![Q::zero(); d]; vdim] }
    }

    pub fn from_coeffs(alg: &Alg, degree: usize, coeffs: Vec<Vec<Q>>) -> Self {
        let d = alg.rumin().dim(degree);
        assert!(coeffs.iter().all(|c| c.len() == d), "coefficient length must be C(n,k)");
        AlgebraForm { alg: alg.clone(), degree, coeffs }
    }

    /// Real-valued form from a single coefficient vector.
    pub fn scalar(alg: &Alg, degree: usize, coeffs: Vec<Q>) -> Self {
        Self::from_coeffs(alg, degree, vec![coeffs])
    }

    /// Builds a form from `(indices, value component, coefficient)` terms;
    /// indices may be unsorted.
    pub fn from_terms(alg: &Alg, degree: usize, vdim: usize, terms: &[(Vec<usize>, usize, Q)]) -> Result<Self, FormError> {
        if degree > alg.dim() {
            return Err(FormError::DegreeTooLarge(degree));
        }
        let mut f = Self::zero(alg, degree, vdim);
        for (idx, v, c) in terms {
            if idx.len() != degree {
                return Err(FormError::DegreeMismatch(idx.len(), degree));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= alg.dim()) {
                return Err(FormError::IndexOutOfRange(bad));
            }
            if *v >= vdim {
                return Err(FormError::IndexOutOfRange(*v));
            }
            let (s, set) = sort_with_sign(idx).ok_or(FormError::RepeatedIndex)?;
            let pos = alg.rumin().index.index_of(&set);
            f.coeffs[*v][pos] += c * q(s as i64);
        }
        Ok(f)
    }

    /// `e^{i_1} ^ ... ^ e^{i_k}` as a real-valued form.
    pub fn monomial(alg: &Alg, idx: &[usize]) -> Self {
        Self::from_terms(alg, idx.len(), 1, &[(idx.to_vec(), 0, q(1))]).expect("valid monomial")
    }

    pub fn algebra(&self) -> &Alg {
        &self.alg
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vdim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Vec<Q>] {
        &self.coeffs
    }

    pub fn component(&self, v: usize) -> AlgebraForm {
        AlgebraForm { alg: self.alg.clone(), degree: self.degree, coeffs: vec![self.coeffs[v].clone()] }
    }

    pub fn coefficient(&self, v: usize, idx: &[usize]) -> Q {
        match sort_with_sign(idx) {
            Some((s, set)) => &self.coeffs[v][self.alg.rumin().index.index_of(&set)] * q(s as i64),
            None => Q::zero(),
        }
    }

    /// Nonzero terms as `(sorted indices, value component, coefficient)`.
    pub fn terms(&self) -> Vec<(Vec<usize>, usize, Q)> {
        let basis = self.alg.rumin().index.basis(self.degree);
        let mut out = Vec::new();
        for (v, cs) in self.coeffs.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                if !c.is_zero() {
                    out.push((basis[i].clone(), v, c.clone()));
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|x| x.is_zero()))
    }

    fn zip(&self, other: &Self, f: impl Fn(&Q, &Q) -> Q) -> Result<Self, FormError> {
        self.compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
            .collect();
        Ok(AlgebraForm { alg: self.alg.clone(), degree: self.degree, coeffs })
    }

    fn compatible(&self, other: &Self) -> Result<(), FormError> {
        if !(Arc::ptr_eq(&self.alg, &other.alg) || *self.alg == *other.alg) {
            return Err(FormError::AlgebraMismatch);
        }
        if self.degree != other.degree {
            return Err(FormError::DegreeMismatch(self.degree, other.degree));
        }
        if self.vdim() != other.vdim() {
            return Err(FormError::ValueMismatch(self.vdim(), other.vdim()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: &Q) -> Self {
        self.map_coeffs(|c| c.iter().map(|x| x * s).collect())
    }

    pub fn map_coeffs(&self, f: impl Fn(&[Q]) -> Vec<Q>) -> Self {
        AlgebraForm { alg: self.alg.clone(), degree: self.degree, coeffs: self.coeffs.iter().map(|c| f(c)).collect() }
    }

    fn apply_matrix(&self, m: &QMatrix, degree: usize) -> Self {
        AlgebraForm { alg: self.alg.clone(), degree, coeffs: self.coeffs.iter().map(|c| m.mul_vec(c)).collect() }
    }

    /// Wedge product; one factor must be real-valued.
    pub fn wedge(&self, other: &Self) -> Result<Self, FormError> {
        if !(Arc::ptr_eq(&self.alg, &other.alg) || *self.alg == *other.alg) {
            return Err(FormError::AlgebraMismatch);
        }
        let vdim = match (self.vdim(), other.vdim()) {
            (1, m) | (m, 1) => m,
            (a, b) => return Err(FormError::ValueMismatch(a, b)),
        };
        let deg = self.degree + other.degree;
        if deg > self.alg.dim() {
            return Ok(AlgebraForm { alg: self.alg.clone(), degree: deg, coeffs: vec![Vec::new(); vdim] });
        }
        let mut out = Self::zero(&self.alg, deg, vdim);
        let index = &self.alg.rumin().index;
        for (ia, va, ca) in self.terms() {
            for (ib, vb, cb) in other.terms() {
                if let Some((s, set)) = wedge_sets(&ia, &ib) {
                    let v = if self.vdim() == 1 { vb } else { va };
                    out.coeffs[v][index.index_of(&set)] += &ca * &cb * q(s as i64);
                }
            }
        }
        Ok(out)
    }

    /// Evaluates on `k` vectors of the algebra.
    pub fn evaluate(&self, vectors: &[Vec<Q>]) -> Vec<Q> {
        assert_eq!(vectors.len(), self.degree);
        let basis = self.alg.rumin().index.basis(self.degree);
        let all: Vec<usize> = (0..self.degree).collect();
        self.coeffs
            .iter()
            .map(|cs| {
                let mut acc = Q::zero();
                for (i, c) in cs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let m = QMatrix::from_rows(
                        &basis[i].iter().map(|&r| vectors.iter().map(|v| v[r].clone()).collect()).collect::<Vec<_>>(),
                    );
                    let det = if self.degree == 0 { q(1) } else { m.submatrix(&all, &all).determinant() };
                    acc += c * det;
                }
                acc
            })
            .collect()
    }

    /// `phi ∘ self` for a linear map `phi` on the value space.
    pub fn compose_values(&self, phi: &QMatrix) -> Self {
        assert_eq!(phi.cols(), self.vdim());
        let d = self.alg.rumin().dim(self.degree);
        let mut coeffs = vec![vec![Q::zero(); d]; phi.rows()];
        for (i, row) in coeffs.iter_mut().enumerate() {
            for j in 0..phi.cols() {
                let a = &phi[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for (t, c) in self.coeffs[j].iter().enumerate() {
                    if !c.is_zero() {
                        row[t] += a * c;
                    }
                }
            }
        }
        AlgebraForm { alg: self.alg.clone(), degree: self.degree, coeffs }
    }

    /// `L^* self` for a linear map `L : src -> self.algebra()` given as a
    /// `target x source` matrix.
    pub fn pullback_linear(&self, src: &Alg, l: &QMatrix) -> Self {
        let k = self.degree;
        let src_basis = src.rumin().index.basis(k).to_vec();
        let tgt_basis = self.alg.rumin().index.basis(k);
        let all: Vec<usize> = (0..k).collect();
        let mut out = AlgebraForm::zero(src, k, self.vdim());
        for (v, cs) in self.coeffs.iter().enumerate() {
            for (ti, c) in cs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (si, sset) in src_basis.iter().enumerate() {
                    let det = if k == 0 {
                        q(1)
                    } else {
                        l.submatrix(&tgt_basis[ti], sset).submatrix(&all, &all).determinant()
                    };
                    if !det.is_zero() {
                        out.coeffs[v][si] += c * det;
                    }
                }
            }
        }
        out
    }

    pub fn d0(&self) -> Self {
        d0(self)
    }
}

/// Chevalley-Eilenberg differential; for 1-forms `d0 θ (X,Y) = -θ([X,Y])`.
pub fn d0(w: &AlgebraForm) -> AlgebraForm {
    let n = w.alg.dim();
    if w.degree >= n {
        return AlgebraForm { alg: w.alg.clone(), degree: w.degree + 1, coeffs: vec![Vec::new(); w.vdim()] };
    }
    w.apply_matrix(&w.alg.rumin().degree(w.degree).d0, w.degree + 1)
}

pub fn d0_pseudoinverse(w: &AlgebraForm) -> AlgebraForm {
    if w.degree == 0 {
        return AlgebraForm { alg: w.alg.clone(), degree: 0, coeffs: vec![Vec::new(); w.vdim()] };
    }
    w.apply_matrix(&w.alg.rumin().degree(w.degree - 1).d0_pinv, w.degree - 1)
}

/// Orthogonal pure-weight basis of `E0^k` as real-valued forms.
pub fn e0_basis(alg: &Alg, k: usize) -> Vec<AlgebraForm> {
    alg.rumin().degree(k).e0.iter().map(|b| AlgebraForm::scalar(alg, k, b.clone())).collect()
}

pub fn e0_weights(alg: &Alg, k: usize) -> Vec<usize> {
    alg.rumin().degree(k).e0_weights.clone()
}

pub fn project_e0(w: &AlgebraForm) -> AlgebraForm {
    w.apply_matrix(&w.alg.rumin().degree(w.degree).pi_e0, w.degree)
}

pub fn project_e0_perp(w: &AlgebraForm) -> AlgebraForm {
    w.sub(&project_e0(w)).expect("same shape")
}

/// Minimum weight of a nonzero monomial; `None` stands for `+∞`.
pub fn weight(w: &AlgebraForm) -> Option<usize> {
    let weights = &w.alg.rumin().degree(w.degree).weights;
    w.coeffs.iter().flat_map(|cs| cs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, _)| weights[i])).min()
}

/// Splits a form into pure-weight pieces.
pub fn weight_components(w: &AlgebraForm) -> BTreeMap<usize, AlgebraForm> {
    let weights = &w.alg.rumin().degree(w.degree).weights;
    let mut out: BTreeMap<usize, AlgebraForm> = BTreeMap::new();
    for (v, cs) in w.coeffs.iter().enumerate() {
        for (i, c) in cs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = out.entry(weights[i]).or_insert_with(|| AlgebraForm::zero(&w.alg, w.degree, w.vdim()));
            e.coeffs[v][i] = c.clone();
        }
    }
    out
}

/// Pointwise inner product of real-valued forms (summed over value
/// components for vector-valued forms with the standard value metric).
pub fn form_inner(a: &AlgebraForm, b: &AlgebraForm) -> Q {
    let g = &a.alg.rumin().degree(a.degree).gram;
    a.coeffs.iter().zip(&b.coeffs).fold(Q::zero(), |acc, (x, y)| acc + inner(x, g, y))
}

pub fn cocycle_check(rho: &AlgebraForm) -> bool {
    d0(rho).is_zero()
}

/// For a cocycle `rho`, returns `(rho_E0, mu)` with `rho = rho_E0 + d0 mu`
/// and `rho_E0 ∈ E0`.
pub fn cohomology_decompose(rho: &AlgebraForm) -> Option<(AlgebraForm, AlgebraForm)> {
    if !cocycle_check(rho) {
        return None;
    }
    Some((project_e0(rho), d0_pseudoinverse(rho)))
}

/// Largest weight occurring in `E0^2`, or `None` if `E0^2 = 0`.
pub fn max_nontrivial_e0_weight_2(alg: &StratifiedAlgebra) -> Option<usize> {
    if alg.dim() < 2 {
        return None;
    }
    alg.rumin().degree(2).e0_weights.iter().copied().max()
}

/// Hodge-type star, normalised by `a ^ *b = <a,b> e^1 ^ ... ^ e^n`
/// (it differs from the metric star by the constant `sqrt(det gram)`).
pub fn hodge_star(w: &AlgebraForm) -> AlgebraForm {
    let alg = &w.alg;
    let n = alg.dim();
    let k = w.degree;
    let r = alg.rumin();
    let g = &r.degree(k).gram;
    let basis_k = r.index.basis(k);
    let basis_c = r.index.basis(n - k);
    // *e^J = sum_I <e^J, e^I>-weighted complements: solve via the defining
    // identity on monomials: e^I ^ *b = <e^I, b> vol.
    let mut out = AlgebraForm::zero(alg, n - k, w.vdim());
    for (v, cs) in w.coeffs.iter().enumerate() {
        let gb = g.mul_vec(cs);
        for (i, set) in basis_k.iter().enumerate() {
            if gb[i].is_zero() {
                continue;
            }
            let comp: Vec<usize> = (0..n).filter(|x| !set.contains(x)).collect();
            let (s, _) = wedge_sets(set, &comp).expect("disjoint");
            let pos = basis_c.iter().position(|c| *c == comp).expect("complement present");
            out.coeffs[v][pos] += &gb[i] * q(s as i64);
        }
    }
    out
}

/// True when a form is a signed rational multiple of a pure-weight form.
pub fn is_pure_weight(w: &AlgebraForm) -> bool {
    weight_components(w).len() <= 1
}

pub fn max_abs_coeff(w: &AlgebraForm) -> Q {
    w.coeffs.iter().flatten().map(|c| c.abs()).max().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn h1() -> Alg {
        StratifiedAlgebra::heisenberg(1)
    }

    #[test]
    fn d0_of_center_dual_in_heisenberg() {
        let h = h1();
        let z = AlgebraForm::monomial(&h, &[2]);
        let expected = AlgebraForm::monomial(&h, &[0, 1]).scale(&q(-1));
        assert_eq!(d0(&z), expected);
    }

    #[test]
    fn d0_matches_structure_equation_on_one_forms() {
        // d0 θ^i = -1/2 Σ c^i_jk θ^j ^ θ^k, summed over all ordered j,k.
        for alg in [StratifiedAlgebra::filiform(5), StratifiedAlgebra::heisenberg(2)] {
            let n = alg.dim();
            for i in 0..n {
                let mut terms = Vec::new();
                for j in 0..n {
                    for k in 0..n {
                        if j != k {
                            let c = alg.structure_constant(i, j, k);
                            if !c.is_zero() {
                                terms.push((vec![j, k], 0, -c * qf(1, 2)));
                            }
                        }
                    }
                }
                let expected = AlgebraForm::from_terms(&alg, 2, 1, &terms).unwrap();
                assert_eq!(d0(&AlgebraForm::monomial(&alg, &[i])), expected);
            }
        }
    }

    #[test]
    fn d0_squares_to_zero_and_is_a_derivation() {
        let f = StratifiedAlgebra::filiform(4);
        let r = f.rumin();
        for k in 0..f.dim() - 1 {
            let prod = r.degree(k + 1).d0.mul(&r.degree(k).d0);
            assert!(prod.is_zero(), "d0^2 != 0 in degree {k}");
        }
        for a in 0..f.dim() {
            for b in 0..f.dim() {
                let ea = AlgebraForm::monomial(&f, &[a]);
                let eb = AlgebraForm::monomial(&f, &[b]);
                let lhs = d0(&ea.wedge(&eb).unwrap());
                let rhs = d0(&ea).wedge(&eb).unwrap().sub(&ea.wedge(&d0(&eb)).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn filiform_three_non_closed_form() {
        let f = StratifiedAlgebra::filiform(3);
        let rho = AlgebraForm::monomial(&f, &[1, 3]);
        assert!(!cocycle_check(&rho));
        assert_eq!(d0(&rho), AlgebraForm::from_terms(&f, 3, 1, &[(vec![1, 0, 2], 0, q(1))]).unwrap());
    }

    #[test]
    fn e0_of_heisenberg() {
        let h = h1();
        assert_eq!(e0_weights(&h, 0), vec![0]);
        assert_eq!(e0_weights(&h, 1), vec![1, 1]);
        assert_eq!(e0_weights(&h, 2), vec![3, 3]);
        assert_eq!(e0_weights(&h, 3), vec![4]);
        assert_eq!(max_nontrivial_e0_weight_2(&h), Some(3));
    }

    #[test]
    fn max_weight_bounds() {
        assert_eq!(max_nontrivial_e0_weight_2(&StratifiedAlgebra::euclidean(3)), Some(2));
        for s in 2..=5 {
            let w = max_nontrivial_e0_weight_2(&StratifiedAlgebra::filiform(s)).unwrap();
            assert_eq!(w, s + 1);
        }
    }

    #[test]
    fn decomposition_of_a_cocycle() {
        let f = StratifiedAlgebra::filiform(3);
        // X*^Z2* + Y*^Z2*: the first term is exact, the second lies in E0.
        let rho = AlgebraForm::from_terms(&f, 2, 1, &[(vec![0, 2], 0, q(1)), (vec![1, 2], 0, q(1))]).unwrap();
        let (e, mu) = cohomology_decompose(&rho).unwrap();
        assert_eq!(e, AlgebraForm::monomial(&f, &[1, 2]));
        assert_eq!(e.add(&d0(&mu)).unwrap(), rho);
        assert_eq!(mu, AlgebraForm::monomial(&f, &[3]).scale(&q(-1)));
    }

    #[test]
    fn star_maps_e0_to_e0_with_dual_weights() {
        for alg in [h1(), StratifiedAlgebra::filiform(4)] {
            let n = alg.dim();
            let qd = alg.homogeneous_dimension();
            for k in 0..=n {
                for b in e0_basis(&alg, k) {
                    let s = hodge_star(&b);
                    assert_eq!(project_e0(&s), s);
                    let w = weight(&b).unwrap();
                    assert_eq!(weight(&s), Some(qd - w));
                }
            }
        }
    }
}
