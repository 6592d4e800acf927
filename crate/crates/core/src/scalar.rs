//! Minimal ring interface shared by exact, floating and symbolic coefficients.

use crate::rational::{to_f64, Q};
use num_traits::{One, Zero};
use std::fmt::Debug;

pub trait Scalar: Clone + Debug + Send + Sync {
    fn nil() -> Self;
    fn unit() -> Self;
    fn from_q(q: &Q) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Structural zero; for floats this is an exact comparison.
    fn is_nil(&self) -> bool;

    fn scale(&self, q: &Q) -> Self {
        self.mul(&Self::from_q(q))
    }
}

impl Scalar for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Scalar for f64 {
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn from_q(q: &Q) -> Self {
        to_f64(q)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_nil(&self) -> bool {
        *self == 0.0
    }
}

pub fn vec_add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn vec_sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn vec_scale<S: Scalar>(a: &[S], s: &S) -> Vec<S> {
    a.iter().map(|x| x.mul(s)).collect()
}

pub fn vec_scale_q<S: Scalar>(a: &[S], s: &Q) -> Vec<S> {
    a.iter().map(|x| x.scale(s)).collect()
}
