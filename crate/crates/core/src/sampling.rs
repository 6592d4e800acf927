//! Seeded sample points and the exact-or-sampled identity test.

use crate::func::{Compiled, Func};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SAMPLES: usize = 32;
pub const DEFAULT_SEED: u64 = 0x5eed_ca27;

/// Region of a chart that samples are drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// Axis-aligned box; coordinates past `lo.len()` use `[-1, 1]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Annulus in the first two coordinates, box in the rest.
    Annulus {
        inner: f64,
        outer: f64,
        #[serde(default)]
        rest: Vec<(f64, f64)>,
    },
}

impl Domain {
    pub fn cube(dim: usize, r: f64) -> Self {
        Domain::Box { lo: vec![-r; dim], hi: vec![r; dim] }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match self {
            Domain::Box { lo, hi } => p.iter().enumerate().all(|(i, x)| {
                let (a, b) = (lo.get(i).copied().unwrap_or(-1.0), hi.get(i).copied().unwrap_or(1.0));
                *x >= a && *x <= b
            }),
            Domain::Annulus { inner, outer, rest } => {
                if p.len() < 2 {
                    return false;
                }
                let r = p[0].hypot(p[1]);
                r >= *inner
                    && r <= *outer
                    && p[2..].iter().enumerate().all(|(i, x)| {
                        let (a, b) = rest.get(i).copied().unwrap_or((-1.0, 1.0));
                        *x >= a && *x <= b
                    })
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng, dim: usize) -> Vec<f64> {
        match self {
            Domain::Box { lo, hi } => (0..dim)
                .map(|i| {
                    let (a, b) = (lo.get(i).copied().unwrap_or(-1.0), hi.get(i).copied().unwrap_or(1.0));
                    a + (b - a) * rng.random::<f64>()
                })
                .collect(),
            Domain::Annulus { inner, outer, rest } => {
                let r = (inner * inner + (outer * outer - inner * inner) * rng.random::<f64>()).sqrt();
                let t = std::f64::consts::TAU * rng.random::<f64>();
                let mut p = vec![r * t.cos(), r * t.sin()];
                for i in 2..dim {
                    let (a, b) = rest.get(i - 2).copied().unwrap_or((-1.0, 1.0));
                    p.push(a + (b - a) * rng.random::<f64>());
                }
                p.truncate(dim);
                p
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub domain: Domain,
    pub count: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Sampler {
    pub fn new(domain: Domain) -> Self {
        Sampler { domain, count: DEFAULT_SAMPLES, seed: DEFAULT_SEED, tol: DEFAULT_TOL }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count).map(|_| self.domain.sample(&mut rng, dim)).collect()
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.tol * 1f64.max(a.abs()).max(b.abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Identity {
    /// `exact` distinguishes a symbolic proof from agreement at all samples.
    Equal { exact: bool, samples: usize, seed: u64 },
    NotEqual { witness: Vec<f64>, component: usize, lhs: f64, rhs: f64 },
    Unknown { reason: String },
}

impl Identity {
    pub fn is_equal(&self) -> bool {
        matches!(self, Identity::Equal { .. })
    }

    pub fn is_exact_equal(&self) -> bool {
        matches!(self, Identity::Equal { exact: true, .. })
    }
}

/// Compares two lists of functions entry by entry on `dim` coordinates.
pub fn identity_test(lhs: &[Func], rhs: &[Func], dim: usize, sampler: &Sampler) -> Identity {
    assert_eq!(lhs.len(), rhs.len());
    let diffs: Vec<Func> = lhs.iter().zip(rhs).map(|(a, b)| a.sub(b)).collect();
    if diffs.iter().all(Func::is_zero) {
        return Identity::Equal { exact: true, samples: 0, seed: sampler.seed };
    }
    let polynomial = diffs.iter().all(|d| !d.has_atoms());
    let live: Vec<usize> = (0..diffs.len()).filter(|&i| !diffs[i].is_zero()).collect();
    let cl: Vec<Compiled> = live.iter().map(|&i| lhs[i].compile()).collect();
    let cr: Vec<Compiled> = live.iter().map(|&i| rhs[i].compile()).collect();
    let mut finite = 0;
    let mut worst: Option<(f64, Vec<f64>, usize, f64, f64)> = None;
    for p in sampler.points(dim) {
        for (t, &i) in live.iter().enumerate() {
            let (a, b) = (cl[t].eval(&p), cr[t].eval(&p));
            if !a.is_finite() || !b.is_finite() {
                continue;
            }
            finite += 1;
            if !sampler.close(a, b) {
                return Identity::NotEqual { witness: p, component: i, lhs: a, rhs: b };
            }
            let gap = (a - b).abs();
            if polynomial && worst.as_ref().is_none_or(|w| gap > w.0) {
                worst = Some((gap, p.clone(), i, a, b));
            }
        }
    }
    if polynomial {
        // A nonzero polynomial: report the largest observed gap.
        if let Some((_, witness, component, lhs, rhs)) = worst {
            return Identity::NotEqual { witness, component, lhs, rhs };
        }
        return Identity::Unknown { reason: "polynomials differ but no finite sample".into() };
    }
    if finite == 0 {
        return Identity::Unknown { reason: "no finite sample".into() };
    }
    Identity::Equal { exact: false, samples: sampler.count, seed: sampler.seed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_identity_is_sampled() {
        let x = Func::var(0);
        let f = x.sin().mul(&x.sin()).add(&x.cos().mul(&x.cos()));
        let s = Sampler::new(Domain::cube(1, 3.0));
        let v = identity_test(&[f], &[Func::one()], 1, &s);
        assert_eq!(v, Identity::Equal { exact: false, samples: 32, seed: DEFAULT_SEED });
    }

    #[test]
    fn polynomial_difference_has_witness() {
        let x = Func::var(0);
        let y = Func::var(1);
        let s = Sampler::new(Domain::cube(2, 1.0));
        assert!(identity_test(&[x.mul(&y)], &[y.mul(&x)], 2, &s).is_exact_equal());
        assert!(matches!(identity_test(&[x.clone()], &[y], 2, &s), Identity::NotEqual { component: 0, .. }));
    }

    #[test]
    fn annulus_samples_stay_inside() {
        let d = Domain::Annulus { inner: 0.5, outer: 2.0, rest: vec![(-1.0, 1.0)] };
        let s = Sampler::new(d.clone()).with_count(200);
        for p in s.points(3) {
            assert!(d.contains(&p));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let s = Sampler::new(Domain::cube(3, 1.0)).with_seed(7);
        assert_eq!(s.points(3), s.points(3));
    }
}
