//! Group law and left-invariant frames in exponential coordinates.
//!
//! Points are coordinate vectors `p` with `g = exp(sum p_i e_i)`. The product
//! is the Dynkin form of the Baker-Campbell-Hausdorff series, which is a
//! finite sum because the algebra is nilpotent.

use crate::algebra::StratifiedAlgebra;
use crate::func::Func;
use crate::rational::{bernoulli_plus, factorial, q, Q};
use crate::scalar::Scalar;
use num_traits::Zero;
use std::collections::HashMap;
use std::sync::OnceLock;
use thiserror::Error;

/// Largest step for which the series is tabulated.
pub const MAX_STEP: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("step {0} exceeds the supported maximum of {MAX_STEP}")]
    StepTooLarge(usize),
    #[error("point has {found} coordinates, expected {expected}")]
    Dimension { expected: usize, found: usize },
}

/// A word in the letters `X` (bit 0) and `Y` (bit 1), read left to right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Word {
    bits: u32,
    len: u32,
}

impl Word {
    fn letter(&self, i: u32) -> u32 {
        (self.bits >> (self.len - 1 - i)) & 1
    }

    fn suffix(&self) -> Word {
        Word { bits: self.bits & ((1 << (self.len - 1)) - 1), len: self.len - 1 }
    }
}

/// Coefficients of the right-nested brackets `[w1,[w2,..,wm]]`, grouped by word.
fn dynkin_table() -> &'static Vec<(Word, Q)> {
    static TABLE: OnceLock<Vec<(Word, Q)>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::new();
        for len in 1..=MAX_STEP as u32 {
            for bits in 0..(1u32 << len) {
                let w = Word { bits, len };
                if len >= 2 && w.letter(len - 1) == w.letter(len - 2) {
                    continue;
                }
                let c = word_coefficient(&w);
                if !c.is_zero() {
                    out.push((w, c));
                }
            }
        }
        out
    })
}

/// Sum over factorisations `w = X^{r1} Y^{s1} ... X^{rn} Y^{sn}` of
/// `(-1)^{n-1} / (n |w| prod r_i! s_i!)`.
fn word_coefficient(w: &Word) -> Q {
    fn go(w: &Word, pos: u32, blocks: i64, denom: &Q, acc: &mut Q) {
        if pos == w.len {
            let sign = if blocks % 2 == 1 { 1 } else { -1 };
            *acc += q(sign) / (q(blocks) * q(w.len as i64) * denom);
            return;
        }
        let mut r = 0;
        while pos + r < w.len && w.letter(pos + r) == 0 {
            r += 1;
        }
        // A block takes X^r' Y^s' with r' = all leading Xs (blocks are maximal in X
        // only if followed by Y), so enumerate r' <= r and s' over following Ys.
        for rr in 0..=r {
            if rr < r {
                // Block ends inside the run of Xs: it must have s' = 0 and rr >= 1.
                if rr == 0 {
                    continue;
                }
                go(w, pos + rr, blocks + 1, &(denom * factorial(rr)), acc);
                continue;
            }
            let mut s = 0;
            while pos + rr + s < w.len && w.letter(pos + rr + s) == 1 {
                s += 1;
            }
            for ss in 0..=s {
                if rr + ss == 0 {
                    continue;
                }
                go(w, pos + rr + ss, blocks + 1, &(denom * factorial(rr) * factorial(ss)), acc);
            }
        }
    }
    let mut acc = Q::zero();
    go(w, 0, 0, &q(1), &mut acc);
    acc
}

fn check_point(alg: &StratifiedAlgebra, n: usize) -> Result<(), GroupError> {
    if alg.step() > MAX_STEP {
        return Err(GroupError::StepTooLarge(alg.step()));
    }
    if n != alg.dim() {
        return Err(GroupError::Dimension { expected: alg.dim(), found: n });
    }
    Ok(())
}

/// `log(exp(x) exp(y))`.
pub fn bch<S: Scalar>(alg: &StratifiedAlgebra, x: &[S], y: &[S]) -> Result<Vec<S>, GroupError> {
    check_point(alg, x.len())?;
    check_point(alg, y.len())?;
    Ok(bch_unchecked(alg, x, y))
}

pub(crate) fn bch_unchecked<S: Scalar>(alg: &StratifiedAlgebra, x: &[S], y: &[S]) -> Vec<S> {
    let step = alg.step() as u32;
    let mut out: Vec<S> = x.iter().zip(y).map(|(a, b)| a.add(b)).collect();
    if step <= 1 {
        return out;
    }
    let mut nested: HashMap<Word, Vec<S>> = HashMap::new();
    nested.insert(Word { bits: 0, len: 1 }, x.to_vec());
    nested.insert(Word { bits: 1, len: 1 }, y.to_vec());
    for len in 2..=step {
        for bits in 0..(1u32 << len) {
            let w = Word { bits, len };
            let Some(rest) = nested.get(&w.suffix()) else { continue };
            let head = if w.letter(0) == 0 { x } else { y };
            let v = alg.bracket(head, rest);
            if v.iter().all(|c| c.is_nil()) {
                continue;
            }
            nested.insert(w, v);
        }
    }
    for (w, c) in dynkin_table() {
        if w.len < 2 || w.len > step {
            continue;
        }
        if let Some(v) = nested.get(w) {
            for (o, vi) in out.iter_mut().zip(v) {
                if !vi.is_nil() {
                    *o = o.add(&vi.scale(c));
                }
            }
        }
    }
    out
}

pub fn inverse<S: Scalar>(p: &[S]) -> Vec<S> {
    p.iter().map(|c| c.neg()).collect()
}

/// Group element with exact coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPoint {
    pub coords: Vec<Q>,
}

impl GroupPoint {
    pub fn identity(alg: &StratifiedAlgebra) -> Self {
        GroupPoint { coords: vec![Q::zero(); alg.dim()] }
    }

    pub fn mul(&self, alg: &StratifiedAlgebra, other: &GroupPoint) -> Result<GroupPoint, GroupError> {
        Ok(GroupPoint { coords: bch(alg, &self.coords, &other.coords)? })
    }

    pub fn inverse(&self) -> GroupPoint {
        GroupPoint { coords: inverse(&self.coords) }
    }
}

/// `sum_k c_k (ad p)^k v`, truncated at the step.
fn ad_series<S: Scalar>(alg: &StratifiedAlgebra, p: &[S], coeffs: &[Q], v: &[S]) -> Vec<S> {
    let mut out = vec![S::nil(); v.len()];
    let mut cur = v.to_vec();
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            cur = alg.bracket(p, &cur);
            if cur.iter().all(|x| x.is_nil()) {
                break;
            }
        }
        if !c.is_zero() {
            for (o, x) in out.iter_mut().zip(&cur) {
                *o = o.add(&x.scale(c));
            }
        }
    }
    out
}

/// Coefficients of `z / (1 - e^{-z})`.
pub fn frame_coefficients(step: usize) -> Vec<Q> {
    bernoulli_plus(step).iter().enumerate().map(|(n, b)| b / factorial(n as u32)).collect()
}

/// Coefficients of `(1 - e^{-z}) / z`.
pub fn coframe_coefficients(step: usize) -> Vec<Q> {
    (0..step).map(|n| q(if n % 2 == 0 { 1 } else { -1 }) / factorial(n as u32 + 1)).collect()
}

/// Coefficients of `zeta(z) = 1/(1 - e^{-z}) - 1/z`.
pub fn zeta_coefficients(step: usize) -> Vec<Q> {
    let b = bernoulli_plus(step + 1);
    (0..step).map(|m| &b[m + 1] / factorial(m as u32 + 1)).collect()
}

pub fn zeta_apply<S: Scalar>(alg: &StratifiedAlgebra, x: &[S], v: &[S]) -> Vec<S> {
    ad_series(alg, x, &zeta_coefficients(alg.step().max(1)), v)
}

/// Column `j` is the left-invariant field `X_j` at `p` in coordinate partials.
pub fn frame_matrix<S: Scalar>(alg: &StratifiedAlgebra, p: &[S]) -> Vec<Vec<S>> {
    series_matrix(alg, p, &frame_coefficients(alg.step().max(1)))
}

/// Row `i` is the coframe form `theta^i` at `p` in coordinate differentials.
pub fn coframe_matrix<S: Scalar>(alg: &StratifiedAlgebra, p: &[S]) -> Vec<Vec<S>> {
    series_matrix(alg, p, &coframe_coefficients(alg.step().max(1)))
}

fn series_matrix<S: Scalar>(alg: &StratifiedAlgebra, p: &[S], coeffs: &[Q]) -> Vec<Vec<S>> {
    let n = alg.dim();
    let mut m = vec![vec![S::nil(); n]; n];
    for j in 0..n {
        let mut e = vec![S::nil(); n];
        e[j] = S::unit();
        let col = ad_series(alg, p, coeffs, &e);
        for i in 0..n {
            m[i][j] = col[i].clone();
        }
    }
    m
}

/// Symbolic frame and coframe, cached per algebra.
#[derive(Debug)]
pub struct GroupData {
    /// `frame[a][j]`: coefficient of `d/dx_a` in `X_j`.
    pub frame: Vec<Vec<Func>>,
    /// `coframe[i][a]`: coefficient of `dx_a` in `theta^i`.
    pub coframe: Vec<Vec<Func>>,
}

impl GroupData {
    pub fn build(alg: &StratifiedAlgebra) -> Self {
        let p: Vec<Func> = (0..alg.dim()).map(Func::var).collect();
        GroupData { frame: frame_matrix(alg, &p), coframe: coframe_matrix(alg, &p) }
    }
}
