//! Rational functions in coordinates and atoms: the coefficient ring of
//! differential forms on a chart.
//!
//! A [`Func`] is `num / den` with reduced numerator. A zero numerator
//! certifies that the function vanishes identically; a nonzero numerator
//! certifies non-vanishing only when no atoms are involved (relations such as
//! `sin² + cos² = 1` are not built in), which is why identity tests fall back
//! to sampling in that case.

use crate::poly::{Atom, AtomKind, Gen, Mono, Poly};
use crate::rational::{q, to_f64, Q};
use crate::scalar::Scalar;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct Func {
    pub num: Poly,
    pub den: Poly,
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl Default for Func {
    fn default() -> Self {
        Func::zero()
    }
}

impl Func {
    pub fn zero() -> Self {
        Func { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        Func::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Func { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn int(n: i64) -> Self {
        Func::constant(q(n))
    }

    pub fn var(i: usize) -> Self {
        Func { num: Poly::var(i), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Self {
        Func { num: p, den: Poly::one() }
    }

    pub fn from_parts(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        Func { num, den }.normalize()
    }

    /// `kind(arg)` with constant folding at zero and radicand normalisation.
    pub fn atom(kind: AtomKind, arg: Func) -> Func {
        match kind {
            AtomKind::Pi => {
                return Func::from_poly(Poly::monomial(Mono::gen(Gen::Atom(Atom::new(AtomKind::Pi, Func::zero())), 1), Q::one()))
            }
            AtomKind::Sin if arg.is_zero() => return Func::zero(),
            AtomKind::Cos | AtomKind::Exp if arg.is_zero() => return Func::one(),
            AtomKind::Root(_) if arg.is_zero() => return Func::zero(),
            AtomKind::Root(1) => return arg,
            _ => {}
        }
        if let AtomKind::Root(qq) = kind {
            if let Some(c) = arg.as_constant() {
                if let Some(r) = exact_root(&c, qq) {
                    return Func::constant(r);
                }
            }
            if !arg.den.as_constant().is_some_and(|c| c.is_one()) {
                // (N/D)^(1/q) = (N D^(q-1))^(1/q) / D
                let radicand = arg.num.mul(&arg.den.pow(qq - 1));
                let w = Func::atom(kind, Func::from_poly(radicand));
                return w.div(&Func::from_poly(arg.den.clone()));
            }
        }
        let a = Atom::new(kind, arg);
        Func::from_poly(Poly::monomial(Mono::gen(Gen::Atom(a), 1), Q::one()))
    }

    pub fn sin(&self) -> Func {
        Func::atom(AtomKind::Sin, self.clone())
    }

    pub fn cos(&self) -> Func {
        Func::atom(AtomKind::Cos, self.clone())
    }

    pub fn exp(&self) -> Func {
        Func::atom(AtomKind::Exp, self.clone())
    }

    pub fn pi() -> Func {
        Func::atom(AtomKind::Pi, Func::zero())
    }

    /// `self^(p/q)` for a rational exponent.
    pub fn pow_q(&self, e: &Q) -> Func {
        if e.is_integer() {
            let n: i64 = e.numer().try_into().expect("exponent fits in i64");
            return self.powi(n);
        }
        let p: i64 = e.numer().try_into().expect("exponent fits in i64");
        let qq: u32 = e.denom().try_into().expect("root order fits in u32");
        Func::atom(AtomKind::Root(qq), self.clone()).powi(p)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Q> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    /// No atoms and a constant denominator.
    pub fn is_polynomial(&self) -> bool {
        !self.num.has_atoms() && self.den.as_constant().is_some()
    }

    pub fn has_atoms(&self) -> bool {
        self.num.has_atoms() || self.den.has_atoms()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.num.max_var().max(self.den.max_var())
    }

    fn normalize(mut self) -> Func {
        if self.num.is_zero() {
            self.den = Poly::one();
            return self;
        }
        if let Some(c) = self.den.as_constant() {
            if !c.is_one() {
                self.num = self.num.scale(&(Q::one() / c));
                self.den = Poly::one();
            }
            return self;
        }
        let lc = self.den.leading_coeff();
        if !lc.is_one() {
            let inv = Q::one() / lc;
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
        let g = self.num.content_mono().gcd(&self.den.content_mono());
        if !g.is_one() {
            self.num = self.num.div_mono(&g);
            self.den = self.den.div_mono(&g);
        }
        self
    }

    pub fn add(&self, other: &Func) -> Func {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        if self.den == other.den {
            return Func { num: self.num.add(&other.num), den: self.den.clone() }.normalize();
        }
        if let (Some((ma, ca)), Some((mb, cb))) = (self.den.single_term(), other.den.single_term()) {
            let l = ma.lcm(mb);
            let na = self.num.mul_mono(&l.div(ma), &(Q::one() / ca));
            let nb = other.num.mul_mono(&l.div(mb), &(Q::one() / cb));
            return Func { num: na.add(&nb), den: Poly::monomial(l, Q::one()) }.normalize();
        }
        Func { num: self.num.mul(&other.den).add(&other.num.mul(&self.den)), den: self.den.mul(&other.den) }.normalize()
    }

    pub fn neg(&self) -> Func {
        Func { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Func) -> Func {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Func) -> Func {
        if self.is_zero() || other.is_zero() {
            return Func::zero();
        }
        let den_one = |f: &Func| f.den.as_constant().is_some_and(|c| c.is_one());
        if den_one(self) && den_one(other) {
            return Func { num: self.num.mul(&other.num), den: Poly::one() };
        }
        Func { num: self.num.mul(&other.num), den: self.den.mul_unreduced(&other.den) }.normalize()
    }

    pub fn scale(&self, s: &Q) -> Func {
        if s.is_zero() {
            return Func::zero();
        }
        Func { num: self.num.scale(s), den: self.den.clone() }
    }

    pub fn recip(&self) -> Func {
        assert!(!self.is_zero(), "division by zero function");
        Func { num: self.den.clone().reduce(), den: self.num.clone() }.normalize()
    }

    pub fn div(&self, other: &Func) -> Func {
        self.mul(&other.recip())
    }

    pub fn powi(&self, e: i64) -> Func {
        if e == 0 {
            return Func::one();
        }
        let base = if e < 0 { self.recip() } else { self.clone() };
        let n = e.unsigned_abs() as u32;
        if base.den.as_constant().is_some_and(|c| c.is_one()) {
            return Func { num: base.num.pow(n), den: Poly::one() };
        }
        Func { num: base.num.pow(n), den: base.den.pow_unreduced(n) }.normalize()
    }

    pub fn diff(&self, v: usize) -> Func {
        let dn = self.num.diff(v);
        if self.den.as_constant().is_some() {
            return dn.scale(&(Q::one() / self.den.as_constant().unwrap()));
        }
        let dd = self.den.diff(v);
        let d = Func::from_poly(self.den.clone());
        let n = Func::from_poly(self.num.clone());
        // (n/d)' = n'/d - n d'/d^2
        dn.div(&d).sub(&n.mul(&dd).div(&d.mul(&d)))
    }

    pub fn compose(&self, subs: &[Func]) -> Func {
        let mut cache = HashMap::new();
        self.compose_cached(subs, &mut cache)
    }

    pub fn compose_cached(&self, subs: &[Func], cache: &mut HashMap<usize, Func>) -> Func {
        let n = self.num.subst(subs, cache);
        if let Some(c) = self.den.as_constant() {
            return n.scale(&(Q::one() / c));
        }
        let d = self.den.subst(subs, cache);
        n.div(&d)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut cache = HashMap::new();
        self.eval_cached(x, &mut cache)
    }

    pub fn eval_cached(&self, x: &[f64], cache: &mut HashMap<usize, f64>) -> f64 {
        let n = self.num.eval(x, cache);
        if let Some(c) = self.den.as_constant() {
            return n / to_f64(&c);
        }
        n / self.den.eval(x, cache)
    }

    /// Canonical text used for atom identity.
    pub fn key(&self) -> String {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            self.num.key()
        } else {
            format!("({})/({})", self.num.key(), self.den.key())
        }
    }

    pub fn compile(&self) -> Compiled {
        Compiled::new(self)
    }
}

impl Poly {
    /// Product without root reduction, for denominators.
    pub fn mul_unreduced(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                let e = out.terms.entry(m).or_insert_with(Q::zero);
                *e += c;
            }
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn pow_unreduced(&self, e: u32) -> Poly {
        let mut r = Poly::one();
        for _ in 0..e {
            r = r.mul_unreduced(self);
        }
        r
    }
}

fn exact_root(c: &Q, qq: u32) -> Option<Q> {
    if c.is_negative() && qq % 2 == 0 {
        return None;
    }
    let sign = if c.is_negative() { -1 } else { 1 };
    let n = c.numer().abs();
    let d = c.denom().clone();
    let rn = n.nth_root(qq);
    let rd = d.nth_root(qq);
    if num_traits::pow(rn.clone(), qq as usize) == n && num_traits::pow(rd.clone(), qq as usize) == d {
        Some(Q::new(rn * sign, rd))
    } else {
        None
    }
}

impl Scalar for Func {
    fn nil() -> Self {
        Func::zero()
    }
    fn unit() -> Self {
        Func::one()
    }
    fn from_q(q: &Q) -> Self {
        Func::constant(q.clone())
    }
    fn add(&self, o: &Self) -> Self {
        Func::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Func::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Func::mul(self, o)
    }
    fn neg(&self) -> Self {
        Func::neg(self)
    }
    fn is_nil(&self) -> bool {
        Func::is_zero(self)
    }
    fn scale(&self, q: &Q) -> Self {
        Func::scale(self, q)
    }
}

/// Floating-point evaluator for a [`Func`], built once and reused.
#[derive(Clone, Debug)]
pub struct Compiled {
    slots: Vec<Slot>,
    num: Vec<(f64, Vec<(usize, i32)>)>,
    den: Option<Vec<(f64, Vec<(usize, i32)>)>>,
}

#[derive(Clone, Debug)]
enum Slot {
    Var(usize),
    Atom(AtomKind, Box<Compiled>),
}

impl Compiled {
    fn new(f: &Func) -> Self {
        let mut slots: Vec<Slot> = Vec::new();
        let mut keys: HashMap<String, usize> = HashMap::new();
        let mut lower = |p: &Poly, slots: &mut Vec<Slot>| -> Vec<(f64, Vec<(usize, i32)>)> {
            p.terms
                .iter()
                .map(|(m, c)| {
                    let factors = m
                        .0
                        .iter()
                        .map(|(g, e)| {
                            let key = g.key();
                            let idx = *keys.entry(key).or_insert_with(|| {
                                slots.push(match g {
                                    Gen::Var(i) => Slot::Var(*i as usize),
                                    Gen::Atom(a) => Slot::Atom(a.kind, Box::new(Compiled::new(&a.arg))),
                                });
                                slots.len() - 1
                            });
                            (idx, *e as i32)
                        })
                        .collect();
                    (to_f64(c), factors)
                })
                .collect()
        };
        let num = lower(&f.num, &mut slots);
        let den = match f.den.as_constant() {
            Some(c) if c.is_one() => None,
            _ => Some(lower(&f.den, &mut slots)),
        };
        Compiled { slots, num, den }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let vals: Vec<f64> = self
            .slots
            .iter()
            .map(|s| match s {
                Slot::Var(i) => x.get(*i).copied().unwrap_or(f64::NAN),
                Slot::Atom(k, c) => k.apply(c.eval(x)),
            })
            .collect();
        let poly = |terms: &[(f64, Vec<(usize, i32)>)]| {
            terms.iter().map(|(c, fs)| fs.iter().fold(*c, |acc, (i, e)| acc * vals[*i].powi(*e))).sum::<f64>()
        };
        let n = poly(&self.num);
        match &self.den {
            None => n,
            Some(d) => n / poly(d),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn x() -> Func {
        Func::var(0)
    }
    fn y() -> Func {
        Func::var(1)
    }

    #[test]
    fn polynomial_arithmetic_is_canonical() {
        let a = x().add(&y()).powi(2);
        let b = x().mul(&x()).add(&x().mul(&y()).scale(&q(2))).add(&y().mul(&y()));
        assert_eq!(a, b);
        assert!(a.sub(&b).is_zero());
    }

    #[test]
    fn quotient_simplifies_monomial_factors() {
        let f = x().mul(&y()).div(&x());
        assert_eq!(f, y());
        let g = x().recip().add(&x().powi(-2));
        assert!((g.eval(&[2.0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn square_root_reduces() {
        let r = x().mul(&x()).add(&y().mul(&y())).pow_q(&qf(1, 2));
        let r2 = r.mul(&r);
        assert_eq!(r2, x().mul(&x()).add(&y().mul(&y())));
        // d r / dx = x / r
        let dr = r.diff(0);
        assert!(dr.sub(&x().div(&r)).is_zero());
        assert!((dr.eval(&[3.0, 4.0]) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn trig_derivatives() {
        let f = x().mul(&y()).sin();
        let dfx = f.diff(0);
        assert!(dfx.sub(&y().mul(&x().mul(&y()).cos())).is_zero());
        let g = x().exp().mul(&x().cos());
        let v = g.diff(0).eval(&[0.3]);
        assert!((v - (0.3f64.exp() * (0.3f64.cos() - 0.3f64.sin()))).abs() < 1e-14);
    }

    #[test]
    fn pythagoras_is_not_structural() {
        let s = x().sin();
        let c = x().cos();
        let f = s.mul(&s).add(&c.mul(&c)).sub(&Func::one());
        assert!(!f.is_zero());
        assert!(f.eval(&[0.7]).abs() < 1e-15);
    }

    #[test]
    fn constant_folding() {
        assert!(Func::zero().sin().is_zero());
        assert_eq!(Func::zero().cos(), Func::one());
        assert_eq!(Func::constant(qf(9, 4)).pow_q(&qf(1, 2)), Func::constant(qf(3, 2)));
    }

    #[test]
    fn composition() {
        let f = x().mul(&y()).add(&x().sin());
        let g = f.compose(&[y().scale(&q(2)), x()]);
        let v = g.eval(&[0.4, 0.9]);
        assert!((v - (1.8 * 0.4 + 1.8f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn compiled_matches_interpreted() {
        let r = x().mul(&x()).add(&y().mul(&y())).pow_q(&qf(1, 2));
        let f = x().mul(&x()).sub(&y().mul(&y())).div(&r).add(&x().mul(&y()).cos());
        let c = f.compile();
        for p in [[0.3, 0.7], [1.5, -0.2], [-2.0, 0.4]] {
            assert!((c.eval(&p) - f.eval(&p)).abs() < 1e-12);
        }
    }
}
