//! Smooth maps between groups in exponential coordinates: differentials,
//! the contact test, the Pansu differential and pullbacks of forms.

use crate::algebra::{Alg, GradedLinearMap};
use crate::field_forms::{det_minor, FieldForm};
use crate::forms::AlgebraForm;
use crate::func::{Compiled, Func};
use crate::group::{coframe_matrix, frame_matrix};
use crate::linalg::QMatrix;
use crate::rational::{to_f64, Q};
use crate::sampling::{Domain, Sampler};
use num_traits::Zero;
use serde::Serialize;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MapError {
    #[error("map has {found} components, target has dimension {expected}")]
    Arity { expected: usize, found: usize },
    #[error("component {component} uses coordinate {var} beyond the source dimension")]
    Variable { component: usize, var: usize },
    #[error("point {0:?} lies outside the declared domain")]
    OutsideDomain(Vec<f64>),
    #[error("map is not contact at {0:?}")]
    NotContactAt(Vec<f64>),
    #[error("bracket extension of the horizontal block is inconsistent in layer {layer} (residual {residual:e})")]
    Inconsistent { layer: usize, residual: f64 },
}

/// Anything that sends points of one chart to another.
pub trait PointMap: Sync {
    fn eval(&self, p: &[f64]) -> Vec<f64>;

    fn contains(&self, _p: &[f64]) -> bool {
        true
    }
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> PointMap for F {
    fn eval(&self, p: &[f64]) -> Vec<f64> {
        self(p)
    }
}

#[derive(Clone, Debug)]
pub struct GroupMap {
    pub name: String,
    source: Alg,
    target: Alg,
    components: Vec<Func>,
    pub domain: Domain,
    pub simply_connected: bool,
    pub excluded: Option<String>,
    compiled: OnceLock<Vec<Compiled>>,
    differential: OnceLock<Vec<Vec<Func>>>,
}

impl GroupMap {
    pub fn new(source: &Alg, target: &Alg, components: Vec<Func>, domain: Domain) -> Result<Self, MapError> {
        if components.len() != target.dim() {
            return Err(MapError::Arity { expected: target.dim(), found: components.len() });
        }
        for (c, f) in components.iter().enumerate() {
            if let Some(v) = f.max_var().filter(|&v| v >= source.dim()) {
                return Err(MapError::Variable { component: c, var: v });
            }
        }
        Ok(GroupMap {
            name: String::new(),
            source: source.clone(),
            target: target.clone(),
            components,
            domain,
            simply_connected: true,
            excluded: None,
            compiled: OnceLock::new(),
            differential: OnceLock::new(),
        })
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn with_topology(mut self, simply_connected: bool, excluded: Option<&str>) -> Self {
        self.simply_connected = simply_connected;
        self.excluded = excluded.map(str::to_string);
        self
    }

    pub fn identity(alg: &Alg, domain: Domain) -> Self {
        Self::new(alg, alg, (0..alg.dim()).map(Func::var).collect(), domain).expect("square")
    }

    /// The map `x -> M x` in exponential coordinates.
    pub fn linear(source: &Alg, target: &Alg, m: &QMatrix, domain: Domain) -> Result<Self, MapError> {
        let comps = (0..m.rows())
            .map(|r| {
                (0..m.cols()).fold(Func::zero(), |acc, c| {
                    if m[(r, c)].is_zero() {
                        acc
                    } else {
                        acc.add(&Func::var(c).scale(&m[(r, c)]))
                    }
                })
            })
            .collect();
        Self::new(source, target, comps, domain)
    }

    pub fn source(&self) -> &Alg {
        &self.source
    }

    pub fn target(&self) -> &Alg {
        &self.target
    }

    pub fn components(&self) -> &[Func] {
        &self.components
    }

    fn compiled(&self) -> &[Compiled] {
        self.compiled.get_or_init(|| self.components.iter().map(Func::compile).collect())
    }

    pub fn sampler(&self) -> Sampler {
        Sampler::new(self.domain.clone())
    }

    /// `(F^* theta^i)(X_j)` with `theta` the target coframe, `X` the source frame.
    pub fn differential(&self) -> &[Vec<Func>] {
        self.differential.get_or_init(|| {
            let (n, m) = (self.source.dim(), self.target.dim());
            let cof: Vec<Vec<Func>> =
                self.target.group().coframe.iter().map(|row| row.iter().map(|f| f.compose(&self.components)).collect()).collect();
            let jac: Vec<Vec<Func>> = self.components.iter().map(|f| (0..n).map(|a| f.diff(a)).collect()).collect();
            let frame = &self.source.group().frame;
            // J X_j
            let jx: Vec<Vec<Func>> = (0..m)
                .map(|b| {
                    (0..n)
                        .map(|j| {
                            let mut acc = Func::zero();
                            for a in 0..n {
                                if !jac[b][a].is_zero() && !frame[a][j].is_zero() {
                                    acc = acc.add(&jac[b][a].mul(&frame[a][j]));
                                }
                            }
                            acc
                        })
                        .collect()
                })
                .collect();
            (0..m)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut acc = Func::zero();
                            for b in 0..m {
                                if !cof[i][b].is_zero() && !jx[b][j].is_zero() {
                                    acc = acc.add(&cof[i][b].mul(&jx[b][j]));
                                }
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
    }

    /// Numeric left-trivialized differential, computed from the Jacobian by
    /// central differences (independent of the symbolic route).
    pub fn differential_numeric(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let n = self.source.dim();
        let fp = self.eval(p);
        let cof = coframe_matrix::<f64>(&self.target, &fp);
        let frame = frame_matrix::<f64>(&self.source, p);
        let mut jac = vec![vec![0.0; n]; self.target.dim()];
        for a in 0..n {
            let h = 1e-6 * (1.0 + p[a].abs());
            let (mut lo, mut hi) = (p.to_vec(), p.to_vec());
            lo[a] -= h;
            hi[a] += h;
            let (fl, fh) = (self.eval(&lo), self.eval(&hi));
            for b in 0..self.target.dim() {
                jac[b][a] = (fh[b] - fl[b]) / (2.0 * h);
            }
        }
        mat_mul(&cof, &mat_mul(&jac, &frame))
    }

    pub fn left_trivialized_differential(&self, p: &[f64]) -> Result<Vec<Vec<f64>>, MapError> {
        if !self.domain.contains(p) {
            return Err(MapError::OutsideDomain(p.to_vec()));
        }
        Ok(self.differential().iter().map(|row| row.iter().map(|f| f.eval(p)).collect()).collect())
    }

    /// Entries of the differential sending horizontal vectors to higher layers.
    fn contact_entries(&self) -> Vec<(usize, usize, Func)> {
        let d = self.differential();
        let mut out = Vec::new();
        for i in 0..self.target.dim() {
            if self.target.layer_of(i) == 1 {
                continue;
            }
            for j in self.source.horizontal() {
                out.push((i, j, d[i][j].clone()));
            }
        }
        out
    }

    pub fn is_contact(&self, sampler: &Sampler) -> ContactVerdict {
        let entries = self.contact_entries();
        if entries.iter().all(|(_, _, f)| f.is_zero()) {
            return ContactVerdict::Contact;
        }
        let live: Vec<(usize, usize, Compiled)> =
            entries.iter().filter(|(_, _, f)| !f.is_zero()).map(|(i, j, f)| (*i, *j, f.compile())).collect();
        let mut finite = false;
        for p in sampler.points(self.source.dim()) {
            for (i, j, c) in &live {
                let v = c.eval(&p);
                if !v.is_finite() {
                    continue;
                }
                finite = true;
                if v.abs() > sampler.tol {
                    return ContactVerdict::NotContact { witness: p, row: *i, col: *j, value: v };
                }
            }
        }
        if finite {
            ContactVerdict::ProbablyContact { samples: sampler.count, seed: sampler.seed }
        } else {
            ContactVerdict::ProbablyContact { samples: 0, seed: sampler.seed }
        }
    }

    /// Symbolic Pansu differential: the horizontal block extended to higher
    /// layers through brackets, `Phi[a, b] := [Phi a, Phi b]`.
    pub fn pansu_differential_symbolic(&self) -> PansuDifferential {
        let src = &self.source;
        let tgt = &self.target;
        let (n, m) = (src.dim(), tgt.dim());
        let d = self.differential();
        let mut phi = vec![vec![Func::zero(); n]; m];
        for j in src.horizontal() {
            for i in tgt.horizontal() {
                phi[i][j] = d[i][j].clone();
            }
        }
        let mut residuals: Vec<(usize, Func)> = Vec::new();
        for layer in 2..=src.step() {
            let cols = src.layer_indices(layer);
            // brackets [e_a, e_b], a horizontal, b in the previous layer
            let mut pairs = Vec::new();
            for a in src.horizontal() {
                for b in src.layer_indices(layer - 1) {
                    pairs.push((a, b));
                }
            }
            let mut bmat = QMatrix::zeros(cols.len(), pairs.len());
            for (t, &(a, b)) in pairs.iter().enumerate() {
                for (k, c) in src.bracket_basis(a, b) {
                    let r = cols.iter().position(|x| x == k).expect("graded bracket");
                    bmat[(r, t)] = c.clone();
                }
            }
            // images [Phi e_a, Phi e_b]
            let images: Vec<Vec<Func>> = pairs
                .iter()
                .map(|&(a, b)| {
                    let u: Vec<Func> = (0..m).map(|i| phi[i][a].clone()).collect();
                    let v: Vec<Func> = (0..m).map(|i| phi[i][b].clone()).collect();
                    tgt.bracket(&u, &v)
                })
                .collect();
            // right inverse of bmat (full row rank by stratification)
            let bt = bmat.transpose();
            let gram = bmat.mul(&bt);
            let Some(ginv) = gram.inverse() else {
                continue;
            };
            let rinv = bt.mul(&ginv);
            for (r, &c) in cols.iter().enumerate() {
                for i in 0..m {
                    let mut acc = Func::zero();
                    for (t, img) in images.iter().enumerate() {
                        let w = &rinv[(t, r)];
                        if !w.is_zero() && !img[i].is_zero() {
                            acc = acc.add(&img[i].scale(w));
                        }
                    }
                    phi[i][c] = acc;
                }
            }
            // consistency: Phi B = images
            for (t, img) in images.iter().enumerate() {
                for i in 0..m {
                    let mut acc = Func::zero();
                    for (r, &c) in cols.iter().enumerate() {
                        if !bmat[(r, t)].is_zero() {
                            acc = acc.add(&phi[i][c].scale(&bmat[(r, t)]));
                        }
                    }
                    let res = acc.sub(&img[i]);
                    if !res.is_zero() {
                        residuals.push((layer, res));
                    }
                }
            }
        }
        PansuDifferential { matrix: phi, residuals }
    }

    /// Pansu differential at a point as a numeric graded map.
    pub fn pansu_differential(&self, p: &[f64], tol: f64) -> Result<Vec<Vec<f64>>, MapError> {
        if !self.domain.contains(p) {
            return Err(MapError::OutsideDomain(p.to_vec()));
        }
        for (_, _, f) in self.contact_entries() {
            let v = f.eval(p);
            if v.abs() > tol {
                return Err(MapError::NotContactAt(p.to_vec()));
            }
        }
        let pd = self.pansu_differential_symbolic();
        let scale = pd.matrix.iter().flatten().map(|f| f.eval(p).abs()).fold(1.0, f64::max);
        for (layer, r) in &pd.residuals {
            let v = r.eval(p).abs();
            if v > tol * scale {
                return Err(MapError::Inconsistent { layer: *layer, residual: v });
            }
        }
        Ok(pd.matrix.iter().map(|row| row.iter().map(|f| f.eval(p)).collect()).collect())
    }

    /// Pansu pullback of a left-invariant target form.
    pub fn pansu_pullback(&self, tau: &AlgebraForm) -> FieldForm {
        let pd = self.pansu_differential_symbolic();
        let k = tau.degree();
        let rs = self.source.rumin();
        let rt = self.target.rumin();
        let src_sets = rs.index.basis(k);
        let tgt_sets = rt.index.basis(k);
        let coeffs = tau
            .coeffs()
            .iter()
            .map(|cs| {
                src_sets
                    .iter()
                    .map(|i_set| {
                        let mut acc = Func::zero();
                        for (j, c) in cs.iter().enumerate() {
                            if c.is_zero() {
                                continue;
                            }
                            let det = det_minor(&pd.matrix, &tgt_sets[j], i_set);
                            if !det.is_zero() {
                                acc = acc.add(&det.scale(c));
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        FieldForm::from_coeffs(&self.source, k, coeffs)
    }

    /// Ordinary pullback of a form on the target chart.
    pub fn pullback(&self, w: &FieldForm) -> FieldForm {
        let k = w.degree();
        let d = self.differential();
        let rs = self.source.rumin();
        let rt = self.target.rumin();
        let src_sets = rs.index.basis(k);
        let tgt_sets = rt.index.basis(k);
        let mut minors: Vec<Vec<Option<Func>>> = vec![vec![None; src_sets.len()]; tgt_sets.len()];
        let coeffs = w
            .coeffs()
            .iter()
            .map(|cs| {
                let composed: Vec<Func> = cs.iter().map(|c| if c.is_zero() { Func::zero() } else { c.compose(&self.components) }).collect();
                (0..src_sets.len())
                    .map(|i| {
                        let mut acc = Func::zero();
                        for (j, c) in composed.iter().enumerate() {
                            if c.is_zero() {
                                continue;
                            }
                            let det = minors[j][i].get_or_insert_with(|| det_minor(d, &tgt_sets[j], &src_sets[i])).clone();
                            if !det.is_zero() {
                                acc = acc.add(&c.mul(&det));
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        FieldForm::from_coeffs(&self.source, k, coeffs)
    }

    /// Composition `self ∘ first`.
    pub fn compose(&self, first: &GroupMap) -> GroupMap {
        let comps = self.components.iter().map(|f| f.compose(&first.components)).collect();
        let mut out = GroupMap::new(&first.source, &self.target, comps, first.domain.clone()).expect("dimensions chain");
        out.simply_connected = first.simply_connected;
        out.excluded = first.excluded.clone();
        out
    }

    /// Whether the map is a constant-coefficient graded homomorphism.
    pub fn as_graded_homomorphism(&self) -> Option<GradedLinearMap> {
        let n = self.source.dim();
        let mut m = QMatrix::zeros(self.target.dim(), n);
        for (i, f) in self.components.iter().enumerate() {
            for a in 0..n {
                m[(i, a)] = f.diff(a).as_constant()?;
            }
            let lin = (0..n).fold(Func::zero(), |acc, a| acc.add(&Func::var(a).scale(&m[(i, a)])));
            if !f.sub(&lin).is_zero() {
                return None;
            }
        }
        let l = GradedLinearMap::new(m);
        (l.is_graded(&self.source, &self.target) && l.homomorphism_defect(&self.source, &self.target).is_none()).then_some(l)
    }
}

impl PointMap for GroupMap {
    fn eval(&self, p: &[f64]) -> Vec<f64> {
        self.compiled().iter().map(|c| c.eval(p)).collect()
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.domain.contains(p)
    }
}

#[derive(Clone, Debug)]
pub struct PansuDifferential {
    /// `matrix[i][j]`: target component `i` of the image of `e_j`.
    pub matrix: Vec<Vec<Func>>,
    /// Nonzero entries of `Phi B - [Phi, Phi]`, by layer.
    pub residuals: Vec<(usize, Func)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ContactVerdict {
    Contact,
    NotContact { witness: Vec<f64>, row: usize, col: usize, value: f64 },
    ProbablyContact { samples: usize, seed: u64 },
}

impl ContactVerdict {
    pub fn is_contact(&self) -> bool {
        !matches!(self, ContactVerdict::NotContact { .. })
    }
}

pub(crate) fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter().map(|row| (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect()).collect()
}

/// Numeric Pansu differential by the dilation limit
/// `delta_{1/t}(f(p)^{-1} f(p delta_t v))` at small `t`.
pub fn pansu_limit(map: &GroupMap, p: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    use crate::group::{bch, inverse};
    let (src, tgt) = (map.source(), map.target());
    let dv = src.dilate(&t, v);
    let q = bch(src, p, &dv).expect("step within limit");
    let fp = map.eval(p);
    let fq = map.eval(&q);
    let diff = bch(tgt, &inverse(&fp), &fq).expect("step within limit");
    tgt.dilate(&(1.0 / t), &diff)
}

/// Rational matrix to floats.
pub fn qmatrix_f64(m: &QMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| to_f64(&m[(r, c)])).collect()).collect()
}

/// Degree-`k` winding map of the plane, `(r, t) -> (r, k t)`.
pub fn winding_components(k: u32) -> Vec<Func> {
    let (x, y) = (Func::var(0), Func::var(1));
    // (x + iy)^k / r^(k-1)
    let (mut re, mut im) = (Func::one(), Func::zero());
    for _ in 0..k {
        let nre = re.mul(&x).sub(&im.mul(&y));
        let nim = re.mul(&y).add(&im.mul(&x));
        re = nre;
        im = nim;
    }
    let r2 = x.mul(&x).add(&y.mul(&y));
    let scale = r2.pow_q(&Q::new((1 - k as i64).into(), 2.into()));
    vec![re.mul(&scale), im.mul(&scale)]
}
