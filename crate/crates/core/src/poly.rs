//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Generators are coordinate variables or opaque atoms (`sin u`, `cos u`,
//! `exp u`, `u^(1/q)`). Root atoms are kept reduced: `w^q` is replaced by
//! its radicand whenever it appears in a product.

use crate::func::Func;
use crate::rational::{q, Q};
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomKind {
    Sin,
    Cos,
    Exp,
    /// `arg^(1/q)` with polynomial radicand.
    Root(u32),
    /// The constant π; its argument is ignored.
    Pi,
}

impl AtomKind {
    pub fn name(&self) -> String {
        match self {
            AtomKind::Sin => "sin".into(),
            AtomKind::Cos => "cos".into(),
            AtomKind::Exp => "exp".into(),
            AtomKind::Root(q) => format!("root{q}"),
            AtomKind::Pi => "pi".into(),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            AtomKind::Sin => x.sin(),
            AtomKind::Cos => x.cos(),
            AtomKind::Exp => x.exp(),
            AtomKind::Root(2) => x.sqrt(),
            AtomKind::Root(3) => x.cbrt(),
            AtomKind::Root(q) => {
                if x < 0.0 && q % 2 == 1 {
                    -(-x).powf(1.0 / *q as f64)
                } else {
                    x.powf(1.0 / *q as f64)
                }
            }
            AtomKind::Pi => std::f64::consts::PI,
        }
    }
}

pub struct Atom {
    pub kind: AtomKind,
    pub arg: Func,
    key: String,
}

impl Atom {
    pub fn new(kind: AtomKind, arg: Func) -> Arc<Atom> {
        let key = format!("{}[{}]", kind.name(), arg.key());
        Arc::new(Atom { kind, arg, key })
    }

    pub fn key(&self) -> &str {
        &self.key
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key)
    }
}

#[derive(Clone, Debug)]
pub enum Gen {
    Var(u32),
    Atom(Arc<Atom>),
}

impl PartialEq for Gen {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Gen {}

impl PartialOrd for Gen {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Gen {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Gen::Var(a), Gen::Var(b)) => a.cmp(b),
            (Gen::Var(_), Gen::Atom(_)) => Ordering::Less,
            (Gen::Atom(_), Gen::Var(_)) => Ordering::Greater,
            (Gen::Atom(a), Gen::Atom(b)) => {
                if Arc::ptr_eq(a, b) {
                    Ordering::Equal
                } else {
                    a.key.cmp(&b.key)
                }
            }
        }
    }
}

impl Gen {
    pub fn key(&self) -> String {
        match self {
            Gen::Var(i) => format!("x{i}"),
            Gen::Atom(a) => a.key.clone(),
        }
    }
}

/// Product of generator powers, sorted by generator, exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Mono(pub Vec<(Gen, u32)>);

impl Mono {
    pub fn one() -> Self {
        Mono(Vec::new())
    }

    pub fn gen(g: Gen, e: u32) -> Self {
        if e == 0 {
            Mono::one()
        } else {
            Mono(vec![(g, e)])
        }
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|x| x.1).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    pub fn exponent(&self, g: &Gen) -> u32 {
        self.0.iter().find(|(h, _)| h == g).map_or(0, |x| x.1)
    }

    /// `self / other`, assuming divisibility.
    pub fn div(&self, other: &Mono) -> Mono {
        let mut out = Vec::new();
        for (g, e) in &self.0 {
            let d = other.exponent(g);
            debug_assert!(d <= *e);
            if *e > d {
                out.push((g.clone(), e - d));
            }
        }
        Mono(out)
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().all(|(g, e)| other.exponent(g) >= *e)
    }

    pub fn lcm(&self, other: &Mono) -> Mono {
        let mut out: Vec<(Gen, u32)> = Vec::new();
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let ord = if i == a.len() {
                Ordering::Greater
            } else if j == b.len() {
                Ordering::Less
            } else {
                a[i].0.cmp(&b[j].0)
            };
            match ord {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1.max(b[j].1)));
                    i += 1;
                    j += 1;
                }
            }
        }
        Mono(out)
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .filter_map(|(g, e)| {
                    let d = other.exponent(g);
                    (d > 0).then(|| (g.clone(), (*e).min(d)))
                })
                .collect(),
        )
    }

    pub fn key(&self) -> String {
        self.0
            .iter()
            .map(|(g, e)| if *e == 1 { g.key() } else { format!("{}^{}", g.key(), e) })
            .collect::<Vec<_>>()
            .join("*")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    pub terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(), c);
        }
        Poly { terms }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn var(i: usize) -> Self {
        Self::monomial(Mono::gen(Gen::Var(i as u32), 1), Q::one())
    }

    pub fn monomial(m: Mono, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&Mono, &Q)> {
        (self.terms.len() == 1).then(|| self.terms.iter().next().unwrap())
    }

    pub fn has_atoms(&self) -> bool {
        self.terms.keys().any(|m| m.0.iter().any(|(g, _)| matches!(g, Gen::Atom(_))))
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter())
            .filter_map(|(g, _)| match g {
                Gen::Var(i) => Some(*i as usize),
                Gen::Atom(a) => a.arg.max_var(),
            })
            .max()
    }

    fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect() }
    }

    pub fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn mul_mono(&self, m: &Mono, s: &Q) -> Poly {
        let mut out = Poly::zero();
        for (mm, c) in &self.terms {
            out.add_term(mm.mul(m), c * s);
        }
        out.reduce()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out.reduce()
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Rewrites `w^e` with `e >= q` for root atoms `w = u^(1/q)`.
    pub fn reduce(self) -> Poly {
        let needs = self.terms.keys().any(|m| {
            m.0.iter().any(|(g, e)| matches!(g, Gen::Atom(a) if matches!(a.kind, AtomKind::Root(q) if *e >= q)))
        });
        if !needs {
            return self;
        }
        let mut out = Poly::zero();
        for (m, c) in self.terms {
            let mut kept = Vec::new();
            let mut extra = Poly::one();
            for (g, e) in m.0 {
                if let Gen::Atom(a) = &g {
                    if let AtomKind::Root(qq) = a.kind {
                        if e >= qq {
                            let radicand = &a.arg.num;
                            extra = extra.mul(&radicand.pow(e / qq));
                            if e % qq > 0 {
                                kept.push((g.clone(), e % qq));
                            }
                            continue;
                        }
                    }
                }
                kept.push((g, e));
            }
            let part = extra.mul_mono(&Mono(kept), &c);
            out = out.add(&part);
        }
        out
    }

    /// Common monomial factor of all terms.
    pub fn content_mono(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Mono::one();
        };
        let mut g = first.clone();
        for m in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn div_mono(&self, m: &Mono) -> Poly {
        Poly { terms: self.terms.iter().map(|(mm, c)| (mm.div(m), c.clone())).collect() }
    }

    pub fn leading_coeff(&self) -> Q {
        self.terms.values().next_back().cloned().unwrap_or_default()
    }

    /// Partial derivative with respect to variable `v`.
    pub fn diff(&self, v: usize) -> Func {
        let mut atom_derivs: HashMap<String, Func> = HashMap::new();
        let mut acc = Func::zero();
        let mut plain = Poly::zero();
        for (m, c) in &self.terms {
            for (idx, (g, e)) in m.0.iter().enumerate() {
                let mut rest = m.0.clone();
                if *e == 1 {
                    rest.remove(idx);
                } else {
                    rest[idx].1 -= 1;
                }
                let coeff = c * q(*e as i64);
                match g {
                    Gen::Var(i) => {
                        if *i as usize == v {
                            plain.add_term(Mono(rest), coeff);
                        }
                    }
                    Gen::Atom(a) => {
                        let d = atom_derivs.entry(a.key.clone()).or_insert_with(|| atom_derivative(a, v)).clone();
                        if d.is_zero() {
                            continue;
                        }
                        let term = Func::from_poly(Poly::monomial(Mono(rest), coeff).reduce());
                        acc = acc.add(&term.mul(&d));
                    }
                }
            }
        }
        acc.add(&Func::from_poly(plain.reduce()))
    }

    pub fn eval(&self, x: &[f64], cache: &mut HashMap<usize, f64>) -> f64 {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut t = crate::rational::to_f64(c);
            for (g, e) in &m.0 {
                let v = match g {
                    Gen::Var(i) => x.get(*i as usize).copied().unwrap_or(f64::NAN),
                    Gen::Atom(a) => {
                        let key = Arc::as_ptr(a) as usize;
                        if let Some(v) = cache.get(&key) {
                            *v
                        } else {
                            let v = a.kind.apply(a.arg.eval_cached(x, cache));
                            cache.insert(key, v);
                            v
                        }
                    }
                };
                t *= v.powi(*e as i32);
            }
            total += t;
        }
        total
    }

    /// Substitutes functions for variables (atoms are rebuilt).
    pub fn subst(&self, subs: &[Func], cache: &mut HashMap<usize, Func>) -> Func {
        let mut acc = Func::zero();
        let mut powers: HashMap<(String, u32), Func> = HashMap::new();
        for (m, c) in &self.terms {
            let mut t = Func::constant(c.clone());
            for (g, e) in &m.0 {
                let key = (g.key(), *e);
                let p = if let Some(p) = powers.get(&key) {
                    p.clone()
                } else {
                    let base = match g {
                        Gen::Var(i) => subs.get(*i as usize).cloned().unwrap_or_else(|| Func::var(*i as usize)),
                        Gen::Atom(a) => {
                            let k = Arc::as_ptr(a) as usize;
                            if let Some(f) = cache.get(&k) {
                                f.clone()
                            } else {
                                let f = Func::atom(a.kind, a.arg.compose_cached(subs, cache));
                                cache.insert(k, f.clone());
                                f
                            }
                        }
                    };
                    let p = base.powi(*e as i64);
                    powers.insert(key, p.clone());
                    p
                };
                t = t.mul(&p);
            }
            acc = acc.add(&t);
        }
        acc
    }

    pub fn key(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, c)| {
                if m.is_one() {
                    crate::rational::fmt_q(c)
                } else {
                    format!("{}*{}", crate::rational::fmt_q(c), m.key())
                }
            })
            .collect::<Vec<_>>()
            .join("+")
    }
}

fn atom_derivative(a: &Arc<Atom>, v: usize) -> Func {
    let du = a.arg.diff(v);
    if du.is_zero() {
        return Func::zero();
    }
    let inner = match a.kind {
        AtomKind::Sin => Func::atom(AtomKind::Cos, a.arg.clone()),
        AtomKind::Cos => Func::atom(AtomKind::Sin, a.arg.clone()).neg(),
        AtomKind::Exp => Func::from_poly(Poly::monomial(Mono::gen(Gen::Atom(a.clone()), 1), Q::one())),
        AtomKind::Root(qq) => {
            // d(u^(1/q)) = u' / (q w^(q-1))
            let den = Poly::monomial(Mono::gen(Gen::Atom(a.clone()), qq - 1), q(qq as i64));
            Func::from_parts(Poly::one(), den)
        }
        AtomKind::Pi => return Func::zero(),
    };
    inner.mul(&du)
}
