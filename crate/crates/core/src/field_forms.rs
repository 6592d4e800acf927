//! Differential forms on a group chart, written in the left-invariant
//! coframe with symbolic coefficients, and the Rumin operators acting on them.

use crate::algebra::Alg;
use crate::exterior::insert_front;
use crate::forms::AlgebraForm;
use crate::func::Func;
use crate::linalg::QMatrix;
use crate::rational::Q;
use crate::sampling::{identity_test, Identity, Sampler};
use crate::scalar::Scalar;
use num_traits::Zero;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct FieldForm {
    alg: Alg,
    degree: usize,
    /// `coeffs[v][i]` multiplies `theta^{I_i}` in value component `v`.
    coeffs: Vec<Vec<Func>>,
}

impl PartialEq for FieldForm {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.alg, &other.alg) || *self.alg == *other.alg)
            && self.degree == other.degree
            && self.coeffs == other.coeffs
    }
}

/// `X_i(f)` for the left-invariant frame field `X_i`.
pub fn frame_derivative(alg: &Alg, f: &Func, i: usize) -> Func {
    let frame = &alg.group().frame;
    let mut out = Func::zero();
    for (a, row) in frame.iter().enumerate() {
        if row[i].is_zero() {
            continue;
        }
        let p = f.diff(a);
        if !p.is_zero() {
            out = out.add(&row[i].mul(&p));
        }
    }
    out
}

/// Determinant of the submatrix on `rows x cols`, by cofactor expansion.
pub fn det_minor<S: Scalar>(m: &[Vec<S>], rows: &[usize], cols: &[usize]) -> S {
    match rows.len() {
        0 => S::unit(),
        1 => m[rows[0]][cols[0]].clone(),
        2 => m[rows[0]][cols[0]].mul(&m[rows[1]][cols[1]]).sub(&m[rows[0]][cols[1]].mul(&m[rows[1]][cols[0]])),
        _ => {
            let mut acc = S::nil();
            for (t, &c) in cols.iter().enumerate() {
                let a = &m[rows[0]][c];
                if a.is_nil() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().enumerate().filter(|(u, _)| *u != t).map(|(_, &x)| x).collect();
                let sub = a.mul(&det_minor(m, &rows[1..], &rest));
                acc = if t % 2 == 0 { acc.add(&sub) } else { acc.sub(&sub) };
            }
            acc
        }
    }
}

impl FieldForm {
    pub fn zero(alg: &Alg, degree: usize, vdim: usize) -> Self {
        let d = alg.rumin().dim(degree);
        FieldForm { alg: alg.clone(), degree, coeffs: vec![vec![Func::zero(); d]; vdim] }
    }

    pub fn from_coeffs(alg: &Alg, degree: usize, coeffs: Vec<Vec<Func>>) -> Self {
        let d = alg.rumin().dim(degree);
        assert!(coeffs.iter().all(|c| c.len() == d), "coefficient length must be C(n,k)");
        FieldForm { alg: alg.clone(), degree, coeffs }
    }

    pub fn function(alg: &Alg, f: Func) -> Self {
        FieldForm { alg: alg.clone(), degree: 0, coeffs: vec![vec![f]] }
    }

    pub fn from_algebra_form(w: &AlgebraForm) -> Self {
        FieldForm {
            alg: w.algebra().clone(),
            degree: w.degree(),
            coeffs: w.coeffs().iter().map(|cs| cs.iter().map(|c| Func::constant(c.clone())).collect()).collect(),
        }
    }

    /// The constant-coefficient form, if every coefficient is constant.
    pub fn to_algebra_form(&self) -> Option<AlgebraForm> {
        let coeffs: Option<Vec<Vec<Q>>> =
            self.coeffs.iter().map(|cs| cs.iter().map(|c| c.as_constant()).collect()).collect();
        Some(AlgebraForm::from_coeffs(&self.alg, self.degree, coeffs?))
    }

    /// Builds a form from coefficients on `dx^J` (coordinate differentials).
    pub fn from_coordinates(alg: &Alg, degree: usize, coords: Vec<Vec<Func>>) -> Self {
        let r = alg.rumin();
        let basis = r.index.basis(degree);
        let frame = &alg.group().frame;
        // dx^J = sum_I det(F[J, I]) theta^I
        let mut out = Self::zero(alg, degree, coords.len());
        for (v, cs) in coords.iter().enumerate() {
            for (j, c) in cs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (i, set) in basis.iter().enumerate() {
                    let m = det_minor(frame, &basis[j], set);
                    if !m.is_zero() {
                        out.coeffs[v][i] = out.coeffs[v][i].add(&c.mul(&m));
                    }
                }
            }
        }
        out
    }

    /// Coefficients on `dx^J`.
    pub fn to_coordinates(&self) -> Vec<Vec<Func>> {
        let r = self.alg.rumin();
        let basis = r.index.basis(self.degree);
        let coframe = &self.alg.group().coframe;
        let mut out = vec![vec![Func::zero(); basis.len()]; self.vdim()];
        for (v, cs) in self.coeffs.iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (j, set) in basis.iter().enumerate() {
                    let m = det_minor(coframe, &basis[i], set);
                    if !m.is_zero() {
                        out[v][j] = out[v][j].add(&c.mul(&m));
                    }
                }
            }
        }
        out
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

    pub fn coeffs(&self) -> &[Vec<Func>] {
        &self.coeffs
    }

    pub fn component(&self, v: usize) -> FieldForm {
        FieldForm { alg: self.alg.clone(), degree: self.degree, coeffs: vec![self.coeffs[v].clone()] }
    }

    pub fn from_components(parts: &[FieldForm]) -> FieldForm {
        let first = &parts[0];
        FieldForm {
            alg: first.alg.clone(),
            degree: first.degree,
            coeffs: parts.iter().flat_map(|p| p.coeffs.iter().cloned()).collect(),
        }
    }

    /// Coefficient of `theta^{idx}` (indices in any order) in component `v`.
    pub fn coefficient(&self, v: usize, idx: &[usize]) -> Func {
        match crate::exterior::sort_with_sign(idx) {
            Some((s, set)) => {
                let c = &self.coeffs[v][self.alg.rumin().index.index_of(&set)];
                if s < 0 {
                    c.neg()
                } else {
                    c.clone()
                }
            }
            None => Func::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|cs| cs.iter().all(Func::is_zero))
    }

    fn zip(&self, other: &Self, f: impl Fn(&Func, &Func) -> Func) -> Self {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        assert_eq!(self.vdim(), other.vdim(), "value dimension mismatch");
        FieldForm {
            alg: self.alg.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, Func::add)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, Func::sub)
    }

    pub fn neg(&self) -> Self {
        self.map_funcs(Func::neg)
    }

    pub fn scale(&self, s: &Q) -> Self {
        self.map_funcs(|f| f.scale(s))
    }

    pub fn mul_func(&self, g: &Func) -> Self {
        self.map_funcs(|f| f.mul(g))
    }

    pub fn map_funcs(&self, f: impl Fn(&Func) -> Func) -> Self {
        FieldForm {
            alg: self.alg.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|cs| cs.iter().map(&f).collect()).collect(),
        }
    }

    /// Wedge product; one factor must be real-valued.
    pub fn wedge(&self, other: &Self) -> Self {
        assert!(self.vdim() == 1 || other.vdim() == 1, "one factor must be real-valued");
        let r = self.alg.rumin();
        let deg = self.degree + other.degree;
        let vdim = self.vdim().max(other.vdim());
        let mut out = Self::zero(&self.alg, deg, vdim);
        if deg > self.alg.dim() {
            return out;
        }
        let ba = r.index.basis(self.degree);
        let bb = r.index.basis(other.degree);
        for v in 0..vdim {
            let ca = &self.coeffs[if self.vdim() == 1 { 0 } else { v }];
            let cb = &other.coeffs[if other.vdim() == 1 { 0 } else { v }];
            for (i, a) in ca.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in cb.iter().enumerate() {
                    if b.is_zero() {
                        continue;
                    }
                    if let Some((s, set)) = crate::exterior::wedge_sets(&ba[i], &bb[j]) {
                        let k = r.index.index_of(&set);
                        let t = a.mul(b);
                        out.coeffs[v][k] = if s < 0 { out.coeffs[v][k].sub(&t) } else { out.coeffs[v][k].add(&t) };
                    }
                }
            }
        }
        out
    }

    /// Applies a rational matrix to every coefficient vector.
    pub fn apply_matrix(&self, m: &QMatrix, degree: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|cs| {
                (0..m.rows())
                    .map(|r| {
                        let mut acc = Func::zero();
                        for (c, f) in cs.iter().enumerate() {
                            let a = &m[(r, c)];
                            if !a.is_zero() && !f.is_zero() {
                                acc = acc.add(&f.scale(a));
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        FieldForm { alg: self.alg.clone(), degree, coeffs }
    }

    /// Post-composes the values with a linear map `V -> W` (`W x V` matrix).
    pub fn compose_values(&self, phi: &QMatrix) -> Self {
        let d = self.alg.rumin().dim(self.degree);
        let coeffs = (0..phi.rows())
            .map(|w| {
                (0..d)
                    .map(|i| {
                        let mut acc = Func::zero();
                        for v in 0..phi.cols() {
                            if !phi[(w, v)].is_zero() {
                                acc = acc.add(&self.coeffs[v][i].scale(&phi[(w, v)]));
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        FieldForm { alg: self.alg.clone(), degree: self.degree, coeffs }
    }

    pub fn evaluate(&self, p: &[f64]) -> Vec<Vec<f64>> {
        self.coeffs.iter().map(|cs| cs.iter().map(|c| c.eval(p)).collect()).collect()
    }

    /// Exact or sampled comparison of all coefficients.
    pub fn identity(&self, other: &Self, sampler: &Sampler) -> Identity {
        assert_eq!((self.degree, self.vdim()), (other.degree, other.vdim()));
        let a: Vec<Func> = self.coeffs.iter().flatten().cloned().collect();
        let b: Vec<Func> = other.coeffs.iter().flatten().cloned().collect();
        identity_test(&a, &b, self.alg.dim(), sampler)
    }

    /// Minimum weight over structurally nonzero terms; `None` for zero.
    pub fn weight(&self) -> Option<usize> {
        let w = &self.alg.rumin().degree(self.degree).weights;
        self.coeffs.iter().flat_map(|cs| cs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, _)| w[i])).min()
    }

    /// Pointwise inner product with a left-invariant real-valued form, per value component.
    pub fn inner_with(&self, rho: &AlgebraForm) -> Vec<Func> {
        let g = &self.alg.rumin().degree(self.degree).gram;
        let grho = g.mul_vec(&rho.coeffs()[0]);
        self.coeffs
            .iter()
            .map(|cs| {
                let mut acc = Func::zero();
                for (c, x) in cs.iter().zip(&grho) {
                    if !x.is_zero() && !c.is_zero() {
                        acc = acc.add(&c.scale(x));
                    }
                }
                acc
            })
            .collect()
    }

    // ---- differentials ----

    /// Derivative part `sum_i X_i(f) theta^i ^ theta^I` of `d`.
    fn d_frame_part(&self) -> Self {
        let n = self.alg.dim();
        let r = self.alg.rumin();
        let mut out = Self::zero(&self.alg, self.degree + 1, self.vdim());
        if self.degree >= n {
            return out;
        }
        let basis = r.index.basis(self.degree);
        for (v, cs) in self.coeffs.iter().enumerate() {
            for (k, f) in cs.iter().enumerate() {
                if f.is_zero() || f.as_constant().is_some() {
                    continue;
                }
                for i in 0..n {
                    let Some((s, set)) = insert_front(i, &basis[k]) else { continue };
                    let xf = frame_derivative(&self.alg, f, i);
                    if xf.is_zero() {
                        continue;
                    }
                    let j = r.index.index_of(&set);
                    out.coeffs[v][j] = if s < 0 { out.coeffs[v][j].sub(&xf) } else { out.coeffs[v][j].add(&xf) };
                }
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> Self {
        self.d_frame_part().add(&self.d0())
    }

    /// Coefficientwise `d0`.
    pub fn d0(&self) -> Self {
        if self.degree >= self.alg.dim() {
            return Self::zero(&self.alg, self.degree + 1, self.vdim());
        }
        self.apply_matrix(&self.alg.rumin().degree(self.degree).d0.clone(), self.degree + 1)
    }

    /// Coefficientwise `d0^{-1}`; `None` in degree 0.
    pub fn d0_inv(&self) -> Option<Self> {
        if self.degree == 0 {
            return None;
        }
        Some(self.apply_matrix(&self.alg.rumin().degree(self.degree - 1).d0_pinv.clone(), self.degree - 1))
    }

    pub fn pi_e0(&self) -> Self {
        self.apply_matrix(&self.alg.rumin().degree(self.degree).pi_e0.clone(), self.degree)
    }

    pub fn pi_e0_perp(&self) -> Self {
        self.sub(&self.pi_e0())
    }

    /// `D = d0^{-1} (d - d0)`.
    pub fn big_d(&self) -> Self {
        let part = self.d_frame_part();
        part.d0_inv().expect("degree >= 1")
    }

    /// `P = sum_k (-D)^k`, a finite sum since `D` raises weight.
    pub fn big_p(&self) -> Self {
        let mut acc = self.clone();
        let mut term = self.clone();
        let bound = self.alg.homogeneous_dimension() + 2;
        for _ in 0..bound {
            term = term.big_d().neg();
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// `pi_E = I - P d0^{-1} d - d P d0^{-1}`.
    pub fn pi_e(&self) -> Self {
        let dw = self.d();
        let mut out = self.sub(&dw.d0_inv().expect("degree >= 1").big_p());
        if let Some(inv) = self.d0_inv() {
            out = out.sub(&inv.big_p().d());
        }
        out
    }

    /// Rumin differential `pi_E0 pi_E d pi_E0`.
    pub fn d_c(&self) -> Self {
        self.pi_e0().d().pi_e().pi_e0()
    }

    pub fn max_abs_at(&self, p: &[f64]) -> f64 {
        self.evaluate(p).iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Left-invariant coframe element `theta^i` as a field form.
pub fn coframe_form(alg: &Alg, i: usize) -> FieldForm {
    FieldForm::from_algebra_form(&AlgebraForm::monomial(alg, &[i]))
}

/// `sum_a c_a dx^a` as a field form.
pub fn coordinate_one_form(alg: &Alg, coeffs: Vec<Func>) -> FieldForm {
    FieldForm::from_coordinates(alg, 1, vec![coeffs])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StratifiedAlgebra;
    use crate::rational::{q, qf};
    use crate::sampling::Domain;
    use proptest::prelude::*;

    fn xs(n: usize) -> Vec<Func> {
        (0..n).map(Func::var).collect()
    }

    #[test]
    fn heisenberg_frame_derivatives() {
        let h = StratifiedAlgebra::heisenberg(1);
        let v = xs(3);
        assert_eq!(frame_derivative(&h, &v[2], 0), v[1].scale(&qf(-1, 2)));
        assert_eq!(frame_derivative(&h, &v[0].mul(&v[2]), 1), v[0].mul(&v[0]).scale(&qf(1, 2)));
        assert!(frame_derivative(&h, &Func::int(5), 0).is_zero());
    }

    #[test]
    fn potential_of_area_form() {
        let r2 = StratifiedAlgebra::euclidean(2);
        let v = xs(2);
        let alpha = coordinate_one_form(&r2, vec![v[1].scale(&qf(-1, 2)), v[0].scale(&qf(1, 2))]);
        let da = alpha.d();
        assert_eq!(da.coeffs()[0], vec![Func::one()]);
    }

    #[test]
    fn structure_equations_hold() {
        for alg in [StratifiedAlgebra::heisenberg(1), StratifiedAlgebra::filiform(4), StratifiedAlgebra::heisenberg(2)] {
            let n = alg.dim();
            let coframe = alg.group().coframe.clone();
            for i in 0..n {
                // d(theta^i) computed in coordinates must equal d0 theta^i.
                let theta = FieldForm::from_coordinates(&alg, 1, vec![coframe[i].clone()]);
                assert_eq!(theta, coframe_form(&alg, i));
                let coord_d = {
                    let cs = &coframe[i];
                    let mut two = vec![Func::zero(); alg.rumin().dim(2)];
                    for a in 0..n {
                        for b in 0..n {
                            if a == b {
                                continue;
                            }
                            // d(c_b dx^b) = sum_a d_a c_b dx^a ^ dx^b
                            let der = cs[b].diff(a);
                            if der.is_zero() {
                                continue;
                            }
                            let (s, set) = crate::exterior::sort_with_sign(&[a, b]).unwrap();
                            let k = alg.rumin().index.index_of(&set);
                            two[k] = if s < 0 { two[k].sub(&der) } else { two[k].add(&der) };
                        }
                    }
                    FieldForm::from_coordinates(&alg, 2, vec![two])
                };
                assert_eq!(coord_d, coframe_form(&alg, i).d0(), "i={i}");
            }
        }
    }

    #[test]
    fn coordinate_round_trip() {
        let f4 = StratifiedAlgebra::filiform(4);
        let v = xs(5);
        let w = FieldForm::from_coeffs(&f4, 2, vec![(0..10).map(|i| v[i % 5].mul(&v[(i + 1) % 5])).collect()]);
        assert_eq!(FieldForm::from_coordinates(&f4, 2, w.to_coordinates()), w);
    }

    #[test]
    fn left_invariant_d_is_d0() {
        let f3 = StratifiedAlgebra::filiform(3);
        let w = AlgebraForm::from_terms(&f3, 1, 1, &[(vec![2], 0, q(3)), (vec![3], 0, q(-1))]).unwrap();
        let fw = FieldForm::from_algebra_form(&w);
        assert_eq!(fw.d().to_algebra_form().unwrap(), crate::forms::d0(&w));
    }

    #[test]
    fn heisenberg_rumin_on_functions() {
        let h = StratifiedAlgebra::heisenberg(1);
        let v = xs(3);
        let f = v[0].mul(&v[2]).add(&v[1].powi(3));
        let dc = FieldForm::function(&h, f.clone()).d_c();
        let expected = FieldForm::from_coeffs(
            &h,
            1,
            vec![vec![frame_derivative(&h, &f, 0), frame_derivative(&h, &f, 1), Func::zero()]],
        );
        assert_eq!(dc, expected);
    }

    #[test]
    fn pi_e_kills_non_closed_left_invariant_one_forms() {
        for s in [2, 3, 4] {
            let f = StratifiedAlgebra::filiform(s);
            let z = FieldForm::from_algebra_form(&AlgebraForm::monomial(&f, &[s]));
            assert!(z.pi_e().is_zero(), "s={s}");
        }
    }

    fn random_poly(vars: &[Func], seeds: &[i64]) -> Func {
        let mut acc = Func::zero();
        for (t, c) in seeds.iter().enumerate() {
            let a = &vars[t % vars.len()];
            let b = &vars[(t * 3 + 1) % vars.len()];
            let m = if t % 3 == 0 { a.clone() } else { a.mul(b) };
            acc = acc.add(&m.scale(&q(*c)));
        }
        acc
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn d_squared_and_dc_squared_vanish(seeds in prop::collection::vec(-3i64..=3, 4)) {
            let h = StratifiedAlgebra::heisenberg(1);
            let v = xs(3);
            let w = FieldForm::from_coeffs(&h, 1, vec![vec![random_poly(&v, &seeds), random_poly(&v, &seeds[1..]), random_poly(&v, &seeds[2..])]]);
            prop_assert!(w.d().d().is_zero());
            prop_assert!(w.d_c().d_c().is_zero());
            let s = Sampler::new(Domain::cube(3, 1.0));
            prop_assert!(w.pi_e().pi_e0().pi_e().identity(&w.pi_e(), &s).is_equal());
        }
    }
}
