//! Horizontal lifts of curves through a central extension, loop holonomy,
//! lattice-based construction of lifted maps, and two numerical checks on
//! lifted maps (a Stokes identity and the fiber homomorphism property).

use crate::algebra::Alg;
use crate::extensions::{alpha_at, CentralExtension};
use crate::field_forms::FieldForm;
use crate::func::{Compiled, Func};
use crate::group::{bch, coframe_matrix, frame_matrix, inverse, GroupError};
use crate::maps::{GroupMap, PointMap};
use crate::quadrature::{adaptive_gl4, composite_gl4, composite_gl4_nodes, Collocation};
use rayon::prelude::*;
use crate::rational::{to_f64, Q};
use crate::sampling::Sampler;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum PathError {
    #[error("curve is not horizontal at t = {t} (vertical velocity {defect:e})")]
    NotHorizontal { t: f64, defect: f64 },
    #[error("basepoint projects to {found:?}, curve starts at {expected:?}")]
    BasepointMismatch { expected: Vec<f64>, found: Vec<f64> },
    #[error("curve is not closed (gap {0:e})")]
    NotClosed(f64),
    #[error("lifted values disagree by {deviation:e} at {point:?}")]
    InconsistentHolonomy { point: Vec<f64>, deviation: f64 },
    #[error("fiber shift {shift} along {direction} at {point:?} gives {estimate:?}, expected {expected:?}")]
    FiberViolation { point: Vec<f64>, direction: usize, shift: f64, estimate: Vec<f64>, expected: Vec<f64> },
    #[error("{0}")]
    Domain(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A parametrized curve on `[0, 1]` in exponential coordinates.
pub trait Curve: Sync {
    fn point(&self, t: f64) -> Vec<f64>;

    /// Coordinate velocity.
    fn velocity(&self, t: f64) -> Vec<f64>;

    /// Velocity in the left-invariant frame.
    fn left_velocity(&self, alg: &Alg, t: f64) -> Vec<f64> {
        let p = self.point(t);
        let v = self.velocity(t);
        coframe_matrix(alg, &p).iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Parameters where the curve may fail to be smooth.
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }
}

/// Components given as functions of `t` (variable 0).
#[derive(Clone, Debug)]
pub struct SymbolicCurve {
    pub components: Vec<Func>,
    point: Vec<Compiled>,
    velocity: Vec<Compiled>,
}

impl SymbolicCurve {
    pub fn new(components: Vec<Func>) -> Self {
        let point = components.iter().map(Func::compile).collect();
        let velocity = components.iter().map(|c| c.diff(0).compile()).collect();
        SymbolicCurve { components, point, velocity }
    }
}

impl Curve for SymbolicCurve {
    fn point(&self, t: f64) -> Vec<f64> {
        self.point.iter().map(|c| c.eval(&[t])).collect()
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        self.velocity.iter().map(|c| c.eval(&[t])).collect()
    }
}

/// Concatenation of one-parameter subgroup segments through the given
/// vertices, each traversed in equal time.
#[derive(Clone, Debug)]
pub struct Polyline {
    alg: Alg,
    vertices: Vec<Vec<f64>>,
    steps: Vec<Vec<f64>>,
}

impl Polyline {
    pub fn new(alg: &Alg, vertices: Vec<Vec<f64>>) -> Result<Self, PathError> {
        if vertices.len() < 2 {
            return Err(PathError::Domain("a polyline needs at least two vertices".into()));
        }
        let mut steps = Vec::new();
        for w in vertices.windows(2) {
            steps.push(bch(alg, &inverse(&w[0]), &w[1])?);
        }
        Ok(Polyline { alg: alg.clone(), vertices, steps })
    }

    /// Vertices joined by horizontal segments given as increments.
    pub fn from_increments(alg: &Alg, start: &[f64], increments: &[Vec<f64>]) -> Result<Self, PathError> {
        let mut vertices = vec![start.to_vec()];
        for inc in increments {
            let last = vertices.last().expect("nonempty");
            vertices.push(bch(alg, last, inc)?);
        }
        Self::new(alg, vertices)
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let m = self.steps.len();
        let x = t.clamp(0.0, 1.0) * m as f64;
        let k = (x.floor() as usize).min(m - 1);
        (k, x - k as f64)
    }
}

impl Curve for Polyline {
    fn point(&self, t: f64) -> Vec<f64> {
        let (k, s) = self.locate(t);
        let step: Vec<f64> = self.steps[k].iter().map(|x| s * x).collect();
        bch(&self.alg, &self.vertices[k], &step).expect("checked at construction")
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        let (k, _) = self.locate(t);
        let m = self.steps.len() as f64;
        let frame = frame_matrix(&self.alg, &self.point(t));
        frame.iter().map(|row| row.iter().zip(&self.steps[k]).map(|(a, b)| a * b * m).sum()).collect()
    }

    fn left_velocity(&self, _alg: &Alg, t: f64) -> Vec<f64> {
        let (k, _) = self.locate(t);
        let m = self.steps.len() as f64;
        self.steps[k].iter().map(|x| x * m).collect()
    }

    fn breakpoints(&self) -> Vec<f64> {
        let m = self.steps.len();
        (0..=m).map(|k| k as f64 / m as f64).collect()
    }
}

/// Curve defined by closures.
pub struct FnCurve<P, V> {
    pub point: P,
    pub velocity: V,
}

impl<P, V> Curve for FnCurve<P, V>
where
    P: Fn(f64) -> Vec<f64> + Sync,
    V: Fn(f64) -> Vec<f64> + Sync,
{
    fn point(&self, t: f64) -> Vec<f64> {
        (self.point)(t)
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        (self.velocity)(t)
    }
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Largest non-horizontal component of the left-trivialized velocity over
/// `samples + 1` equally spaced parameters, with its location.
pub fn horizontality_defect(alg: &Alg, curve: &dyn Curve, samples: usize) -> (f64, f64) {
    let vertical: Vec<usize> = (0..alg.dim()).filter(|&i| alg.layer_of(i) > 1).collect();
    let mut worst = (0.0, 0.0);
    for k in 0..=samples {
        let t = k as f64 / samples as f64;
        let u = curve.left_velocity(alg, t);
        let d = vertical.iter().fold(0.0f64, |m, &i| m.max(u[i].abs())) / (1.0 + max_abs(&u));
        if d > worst.1 {
            worst = (t, d);
        }
    }
    worst
}

/// `sum_i alpha_{v,i}(c(0)^{-1} c(t)) u_i(t)`.
fn integrand(ext: &CentralExtension, curve: &dyn Curve, start_inv: &[f64], t: f64) -> Vec<f64> {
    let h = ext.base();
    let rel = bch(h, start_inv, &curve.point(t)).expect("checked dimensions");
    let u = curve.left_velocity(h, t);
    alpha_at(ext, &rel).iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathOptions {
    pub tol: f64,
    /// Number of output intervals.
    pub outputs: usize,
    /// Allowed vertical velocity of the input curve, relative.
    pub horizontal_tol: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions { tol: 1e-11, outputs: 64, horizontal_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiftedCurve {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// Accumulated panel differences of the adaptive quadrature.
    pub error_estimate: f64,
    pub panels: usize,
    pub min_step: f64,
    /// Largest vertical component of the lifted velocity.
    pub horizontality: f64,
}

fn check_horizontal(alg: &Alg, curve: &dyn Curve, tol: f64) -> Result<(), PathError> {
    let (t, defect) = horizontality_defect(alg, curve, 64);
    if defect > tol {
        return Err(PathError::NotHorizontal { t, defect });
    }
    Ok(())
}

/// Integrates `alpha` on `[a, b]`, splitting at the curve's breakpoints.
fn integrate(ext: &CentralExtension, curve: &dyn Curve, start_inv: &[f64], a: f64, b: f64, tol: f64) -> crate::quadrature::QuadReport {
    let mut cuts = vec![a];
    cuts.extend(curve.breakpoints().into_iter().filter(|&x| x > a && x < b));
    cuts.push(b);
    let mut total = crate::quadrature::QuadReport {
        value: vec![0.0; ext.values().dim()],
        error: 0.0,
        panels: 0,
        min_step: (b - a).abs(),
        evaluations: 0,
    };
    for w in cuts.windows(2) {
        let r = adaptive_gl4(&mut |t| integrand(ext, curve, start_inv, t), w[0], w[1], tol);
        for (o, x) in total.value.iter_mut().zip(&r.value) {
            *o += x;
        }
        total.error += r.error;
        total.panels += r.panels;
        total.min_step = total.min_step.min(r.min_step);
        total.evaluations += r.evaluations;
    }
    total
}

/// Horizontal lift of a horizontal curve in the base, starting at
/// `basepoint` in the total group.
pub fn lift_horizontal_curve(ext: &CentralExtension, curve: &dyn Curve, basepoint: &[f64], opts: &PathOptions) -> Result<LiftedCurve, PathError> {
    let h = ext.base();
    let g = ext.total();
    if basepoint.len() != g.dim() {
        return Err(GroupError::Dimension { expected: g.dim(), found: basepoint.len() }.into());
    }
    let c0 = curve.point(0.0);
    let proj = ext.project_point(basepoint);
    if max_diff(&c0, &proj) > 1e-9 * (1.0 + max_abs(&c0)) {
        return Err(PathError::BasepointMismatch { expected: c0, found: proj });
    }
    check_horizontal(h, curve, opts.horizontal_tol)?;
    let start_inv = inverse(&c0);
    let n = opts.outputs.max(1);
    let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let mut v = vec![0.0; ext.values().dim()];
    let mut out = LiftedCurve { times: times.clone(), points: vec![], error_estimate: 0.0, panels: 0, min_step: 1.0, horizontality: 0.0 };
    let vertical: Vec<usize> = (0..g.dim()).filter(|&i| g.layer_of(i) > 1).collect();
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            let r = integrate(ext, curve, &start_inv, times[k - 1], t, opts.tol);
            for (o, x) in v.iter_mut().zip(&r.value) {
                *o += x;
            }
            out.error_estimate += r.error;
            out.panels += r.panels;
            out.min_step = out.min_step.min(r.min_step);
        }
        let rel = bch(h, &start_inv, &curve.point(t))?;
        let local = ext.join_point(&rel, &v);
        // velocity of the translated lift, checked in the left-invariant frame of G
        let u = curve.left_velocity(h, t);
        let dh = mat_vec(&frame_matrix(h, &rel), &u);
        let dv = integrand(ext, curve, &start_inv, t);
        let vel = ext.join_point(&dh, &dv);
        let lv = mat_vec(&coframe_matrix(g, &local), &vel);
        let defect = vertical.iter().fold(0.0f64, |m, &i| m.max(lv[i].abs()));
        out.horizontality = out.horizontality.max(defect);
        out.points.push(bch(g, basepoint, &local)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Holonomy {
    pub value: Vec<f64>,
    pub error_estimate: f64,
    pub panels: usize,
    pub min_step: f64,
}

/// `int_c alpha` for a closed horizontal curve: the fiber displacement of
/// its horizontal lift.
pub fn loop_holonomy(ext: &CentralExtension, curve: &dyn Curve, tol: f64) -> Result<Holonomy, PathError> {
    let h = ext.base();
    let (a, b) = (curve.point(0.0), curve.point(1.0));
    if a.len() != h.dim() {
        return Err(GroupError::Dimension { expected: h.dim(), found: a.len() }.into());
    }
    let gap = max_diff(&a, &b);
    if gap > 1e-9 * (1.0 + max_abs(&a)) {
        return Err(PathError::NotClosed(gap));
    }
    check_horizontal(h, curve, 1e-8)?;
    let r = integrate(ext, curve, &inverse(&a), 0.0, 1.0, tol);
    Ok(Holonomy { value: r.value, error_estimate: r.error, panels: r.panels, min_step: r.min_step })
}

/// Fixed composite rule, for convergence studies.
pub fn holonomy_composite(ext: &CentralExtension, curve: &dyn Curve, panels: usize) -> Vec<f64> {
    let start_inv = inverse(&curve.point(0.0));
    composite_gl4(&mut |t| integrand(ext, curve, &start_inv, t), 0.0, 1.0, panels)
}

/// Values of a map between bases along lattice edges.
pub trait EdgeSource: Sync {
    fn source(&self) -> &Alg;

    fn at(&self, p: &[f64]) -> Option<Vec<f64>>;

    /// Values at `start * exp(t * step * e_gen)` for each `t` in `ts`.
    fn along(&self, start: &[f64], gen: usize, step: f64, ts: &[f64]) -> Option<Vec<Vec<f64>>>;
}

fn along_map(alg: &Alg, map: &dyn PointMap, start: &[f64], gen: usize, step: f64, ts: &[f64]) -> Option<Vec<Vec<f64>>> {
    ts.iter()
        .map(|t| {
            let mut e = vec![0.0; alg.dim()];
            e[gen] = t * step;
            let p = bch(alg, start, &e).ok()?;
            map.contains(&p).then(|| map.eval(&p))
        })
        .collect()
}

impl EdgeSource for GroupMap {
    fn source(&self) -> &Alg {
        GroupMap::source(self)
    }

    fn at(&self, p: &[f64]) -> Option<Vec<f64>> {
        self.contains(p).then(|| self.eval(p))
    }

    fn along(&self, start: &[f64], gen: usize, step: f64, ts: &[f64]) -> Option<Vec<Vec<f64>>> {
        along_map(GroupMap::source(self), self, start, gen, step, ts)
    }
}

/// Adapts a [`PointMap`] on a group chart.
pub struct PointEdges<'a> {
    pub alg: Alg,
    pub map: &'a dyn PointMap,
}

impl EdgeSource for PointEdges<'_> {
    fn source(&self) -> &Alg {
        &self.alg
    }

    fn at(&self, p: &[f64]) -> Option<Vec<f64>> {
        self.map.contains(p).then(|| self.map.eval(p))
    }

    fn along(&self, start: &[f64], gen: usize, step: f64, ts: &[f64]) -> Option<Vec<Vec<f64>>> {
        along_map(&self.alg, self.map, start, gen, step, ts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridOptions {
    pub step: f64,
    /// Maximal word length of lattice nodes.
    pub radius: usize,
    /// Degree of the collocation polynomial on each edge.
    pub degree: usize,
    /// Allowed disagreement on non-tree edges.
    pub tol: f64,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { step: 0.1, radius: 4, degree: 16, tol: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridNode {
    pub word: Vec<String>,
    pub point: Vec<f64>,
    pub value: Vec<f64>,
    pub depth: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GridReport {
    pub nodes: usize,
    pub tree_edges: usize,
    pub checked_edges: usize,
    pub max_inconsistency: f64,
    pub worst_point: Option<Vec<f64>>,
}

const KEY_SCALE: f64 = (1u64 << 20) as f64;

fn key_of(word: &[f64]) -> Vec<i64> {
    word.iter().map(|x| (x * KEY_SCALE).round() as i64).collect()
}

/// A lift `F : G1 -> G2` of `f : H1 -> H2` tabulated on the lattice
/// `base * delta_h(w)`, `w` a word of bounded length in the horizontal
/// generators of `G1`.
pub struct GridLift<'a> {
    ext1: &'a CentralExtension,
    ext2: &'a CentralExtension,
    f: &'a dyn EdgeSource,
    base: Vec<f64>,
    step: f64,
    coll: Collocation,
    nodes: HashMap<Vec<i64>, GridNode>,
    pub report: GridReport,
}

impl<'a> GridLift<'a> {
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GridNode> {
        self.nodes.values()
    }

    fn local_word(&self, p: &[f64]) -> Option<Vec<f64>> {
        let g = self.ext1.total();
        let rel = bch(g, &inverse(&self.base), p).ok()?;
        Some(g.dilate(&(1.0 / self.step), &rel))
    }

    /// Stored value at a lattice point.
    pub fn value(&self, p: &[f64]) -> Option<&[f64]> {
        let w = self.local_word(p)?;
        let node = self.nodes.get(&key_of(&w))?;
        (max_diff(&node.point, p) <= 1e-9 * (1.0 + max_abs(p))).then_some(node.value.as_slice())
    }

    /// Values along the edge from `point` in direction `sign * e_gen`, at
    /// the collocation nodes.
    fn edge(&self, point: &[f64], value: &[f64], gen: usize, step: f64) -> Result<Vec<Vec<f64>>, PathError> {
        let (h2, g2) = (self.ext2.base(), self.ext2.total());
        let ts = &self.coll.nodes;
        let base_pt = self.ext1.project_point(point);
        let cs = match self.ext1.h_index().iter().position(|&i| i == gen) {
            Some(a) => self.f.along(&base_pt, a, step, ts),
            None => self.f.at(&base_pt).map(|v| vec![v; ts.len()]),
        }
        .ok_or_else(|| PathError::Domain(format!("map undefined along the edge from {point:?}")))?;
        let c0_inv = inverse(&cs[0]);
        let rel: Vec<Vec<f64>> = cs.iter().map(|c| bch(h2, &c0_inv, c)).collect::<Result<_, _>>()?;
        let vel = self.coll.derivative(&rel);
        let integrands: Vec<Vec<f64>> = rel
            .iter()
            .zip(&vel)
            .map(|(r, d)| {
                let u = mat_vec(&coframe_matrix(h2, r), d);
                alpha_at(self.ext2, r).iter().map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum()).collect()
            })
            .collect();
        let vs = self.coll.cumulative(&integrands);
        rel.iter().zip(&vs).map(|(r, v)| Ok(bch(g2, value, &self.ext2.join_point(r, v))?)).collect()
    }
}

/// Builds the lift on a lattice around `base` by breadth-first search,
/// integrating `alpha` along tree edges and comparing the remaining edges.
pub fn construct_lift_on_grid<'a>(
    ext1: &'a CentralExtension,
    ext2: &'a CentralExtension,
    f: &'a dyn EdgeSource,
    base: &[f64],
    base_value: &[f64],
    opts: &GridOptions,
) -> Result<GridLift<'a>, PathError> {
    let g1 = ext1.total();
    if f.source().dim() != ext1.base().dim() {
        return Err(PathError::Domain("map source does not match the first base".into()));
    }
    let start = f.at(&ext1.project_point(base)).ok_or_else(|| PathError::Domain("base outside the domain".into()))?;
    let proj = ext2.project_point(base_value);
    if max_diff(&start, &proj) > 1e-9 * (1.0 + max_abs(&start)) {
        return Err(PathError::BasepointMismatch { expected: start, found: proj });
    }
    let mut grid = GridLift {
        ext1,
        ext2,
        f,
        base: base.to_vec(),
        step: opts.step,
        coll: Collocation::new(opts.degree),
        nodes: HashMap::new(),
        report: GridReport::default(),
    };
    let zero = vec![Q::zero(); g1.dim()];
    let node0 = GridNode { word: zero.iter().map(|x| x.to_string()).collect(), point: base.to_vec(), value: base_value.to_vec(), depth: 0 };
    grid.nodes.insert(key_of(&vec![0.0; g1.dim()]), node0);
    let mut queue: VecDeque<Vec<Q>> = VecDeque::from([zero]);
    let gens = g1.horizontal();
    while let Some(word) = queue.pop_front() {
        let wf: Vec<f64> = word.iter().map(to_f64).collect();
        let node = grid.nodes[&key_of(&wf)].clone();
        for &gen in &gens {
            for sign in [1i64, -1] {
                let mut e = vec![Q::zero(); g1.dim()];
                e[gen] = if sign > 0 { Q::one() } else { -Q::one() };
                let next = bch(g1, &word, &e)?;
                let nf: Vec<f64> = next.iter().map(to_f64).collect();
                let key = key_of(&nf);
                let known = grid.nodes.get(&key).map(|n| n.value.clone());
                if known.is_none() && node.depth >= opts.radius {
                    continue;
                }
                let values = grid.edge(&node.point, &node.value, gen, sign as f64 * opts.step)?;
                let predicted = values.last().expect("nonempty").clone();
                match known {
                    Some(v) => {
                        let dev = max_diff(&v, &predicted) / (1.0 + max_abs(&v));
                        grid.report.checked_edges += 1;
                        if dev > grid.report.max_inconsistency {
                            grid.report.max_inconsistency = dev;
                            grid.report.worst_point = Some(node.point.clone());
                        }
                        if dev > opts.tol {
                            return Err(PathError::InconsistentHolonomy { point: node.point.clone(), deviation: dev });
                        }
                    }
                    None => {
                        let point = bch(g1, base, &g1.dilate(&opts.step, &nf))?;
                        let new = GridNode { word: next.iter().map(|x| x.to_string()).collect(), point, value: predicted, depth: node.depth + 1 };
                        grid.nodes.insert(key, new);
                        grid.report.tree_edges += 1;
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    grid.report.nodes = grid.nodes.len();
    Ok(grid)
}

impl EdgeSource for GridLift<'_> {
    fn source(&self) -> &Alg {
        self.ext1.total()
    }

    fn at(&self, p: &[f64]) -> Option<Vec<f64>> {
        self.value(p).map(<[f64]>::to_vec)
    }

    fn along(&self, start: &[f64], gen: usize, step: f64, ts: &[f64]) -> Option<Vec<Vec<f64>>> {
        if (step.abs() - self.step).abs() > 1e-12 * self.step || ts != self.coll.nodes.as_slice() {
            return None;
        }
        let value = self.value(start)?.to_vec();
        self.edge(start, &value, gen, step).ok()
    }
}

/// Largest deviation of `a - b` (fiber difference `b^{-1} a`) from a
/// constant over common nodes, together with the number compared.
pub fn grid_difference(a: &GridLift, b: &GridLift) -> Option<(Vec<f64>, f64, usize)> {
    let g2 = a.ext2.total();
    let mut first: Option<Vec<f64>> = None;
    let mut worst = 0.0f64;
    let mut count = 0;
    for node in a.nodes() {
        let Some(other) = b.value(&node.point) else { continue };
        let diff = bch(g2, &inverse(other), &node.value).ok()?;
        count += 1;
        match &first {
            None => first = Some(diff),
            Some(f) => worst = worst.max(max_diff(f, &diff)),
        }
    }
    first.map(|f| (f, worst, count))
}

/// Map `R^2 -> H` on the closed unit disk, components in `(x, y)`.
#[derive(Clone, Debug)]
pub struct DiskMap {
    pub target: Alg,
    pub components: Vec<Func>,
    compiled: Vec<Compiled>,
    jacobian: Vec<[Compiled; 2]>,
}

impl DiskMap {
    pub fn new(target: &Alg, components: Vec<Func>) -> Result<Self, PathError> {
        if components.len() != target.dim() {
            return Err(PathError::Domain(format!("expected {} components, found {}", target.dim(), components.len())));
        }
        if components.iter().any(|c| c.max_var().is_some_and(|v| v > 1)) {
            return Err(PathError::Domain("disk map components may only use x and y".into()));
        }
        let compiled = components.iter().map(Func::compile).collect();
        let jacobian = components.iter().map(|c| [c.diff(0).compile(), c.diff(1).compile()]).collect();
        Ok(DiskMap { target: target.clone(), components, compiled, jacobian })
    }

    pub fn eval(&self, x: f64, y: f64) -> Vec<f64> {
        self.compiled.iter().map(|c| c.eval(&[x, y])).collect()
    }

    /// Left-trivialized images of `e_1, e_2`.
    fn left_jacobian(&self, x: f64, y: f64) -> (Vec<f64>, [Vec<f64>; 2]) {
        let p = self.eval(x, y);
        let cf = coframe_matrix(&self.target, &p);
        let cols: [Vec<f64>; 2] = [0, 1].map(|k| mat_vec(&cf, &self.jacobian.iter().map(|j| j[k].eval(&[x, y])).collect::<Vec<_>>()));
        (p, cols)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StokesReport {
    /// `int_D (d alpha + d0 omega)(M e1, M e2)` with `M` the horizontal
    /// block of the differential.
    pub area: Vec<f64>,
    /// `int_{boundary} alpha`.
    pub boundary: Vec<f64>,
    pub residual: f64,
}

/// Compares the area integral of `d alpha + d0 omega` against the Pansu
/// differential of `u` with the boundary integral of `alpha`.
pub fn stokes_check(u: &DiskMap, alpha: &FieldForm, omega: Option<&FieldForm>, panels: usize, tol: f64) -> Result<StokesReport, PathError> {
    let h = &u.target;
    if alpha.algebra().dim() != h.dim() || alpha.degree() != 1 {
        return Err(PathError::Domain("alpha must be a 1-form on the target".into()));
    }
    let mut kappa = alpha.d();
    if let Some(w) = omega {
        if w.degree() != 1 || w.vdim() != alpha.vdim() {
            return Err(PathError::Domain("omega must be a 1-form with the values of alpha".into()));
        }
        kappa = kappa.add(&w.d0());
    }
    let compiled: Vec<Vec<Compiled>> = kappa.coeffs().iter().map(|cs| cs.iter().map(Func::compile).collect()).collect();
    let sets = h.rumin().index.basis(2).to_vec();
    let horizontal: Vec<bool> = (0..h.dim()).map(|i| h.layer_of(i) == 1).collect();
    let vdim = alpha.vdim();
    let area_at = |x: f64, y: f64| -> Vec<f64> {
        let (p, [a, b]) = u.left_jacobian(x, y);
        let mut out = vec![0.0; vdim];
        for (k, set) in sets.iter().enumerate() {
            let (i, j) = (set[0], set[1]);
            if !(horizontal[i] && horizontal[j]) {
                continue;
            }
            let m = a[i] * b[j] - a[j] * b[i];
            if m == 0.0 {
                continue;
            }
            for v in 0..vdim {
                out[v] += compiled[v][k].eval(&p) * m;
            }
        }
        out
    };
    let tau = std::f64::consts::TAU;
    let area = composite_gl4_nodes(0.0, 1.0, panels)
        .into_par_iter()
        .map(|(r, w)| {
            let ring = composite_gl4(&mut |th| area_at(r * th.cos(), r * th.sin()), 0.0, tau, panels);
            ring.iter().map(|x| x * r * w).collect::<Vec<f64>>()
        })
        .reduce(|| vec![0.0; vdim], |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect());
    let alpha_c: Vec<Vec<Compiled>> = alpha.coeffs().iter().map(|cs| cs.iter().map(Func::compile).collect()).collect();
    let boundary = adaptive_gl4(
        &mut |th| {
            let (c, s) = (th.cos(), th.sin());
            let (p, [a, b]) = u.left_jacobian(c, s);
            let vel: Vec<f64> = a.iter().zip(&b).map(|(x, y)| -s * x + c * y).collect();
            alpha_c.iter().map(|row| row.iter().zip(&vel).map(|(f, w)| f.eval(&p) * w).sum()).collect()
        },
        0.0,
        tau,
        tol,
    )
    .value;
    let residual = max_diff(&area, &boundary);
    Ok(StokesReport { area, boundary, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberMap {
    /// `phi[w][v]`: component `w` of the image of the fiber direction `v`.
    pub phi: Vec<Vec<f64>>,
    pub samples: usize,
    pub comparisons: usize,
    pub max_deviation: f64,
}

/// Checks that `F(g exp(s v)) = F(g) exp(Phi(s v))` for fiber directions
/// `v` and a single linear `Phi : V1 -> V2`.
pub fn fiber_homomorphism_check(
    map: &dyn PointMap,
    ext1: &CentralExtension,
    ext2: &CentralExtension,
    sampler: &Sampler,
    shifts: &[f64],
) -> Result<FiberMap, PathError> {
    let (g1, g2) = (ext1.total(), ext2.total());
    let (v1, v2) = (ext1.values().dim(), ext2.values().dim());
    let mut phi: Vec<Option<Vec<f64>>> = vec![None; v1];
    let mut out = FiberMap { phi: vec![], samples: 0, comparisons: 0, max_deviation: 0.0 };
    for p in sampler.points(g1.dim()) {
        if !map.contains(&p) {
            continue;
        }
        out.samples += 1;
        let fp_inv = inverse(&map.eval(&p));
        for (dir, &t) in ext1.v_index().iter().enumerate() {
            for &s in shifts.iter().flat_map(|s| [*s, -*s].into_iter().collect::<Vec<_>>().into_iter()).collect::<Vec<_>>().iter() {
                let mut q = p.clone();
                q[t] += s;
                if !map.contains(&q) {
                    continue;
                }
                let diff = bch(g2, &fp_inv, &map.eval(&q))?;
                let hpart = ext2.project_point(&diff);
                let est: Vec<f64> = ext2.fiber_point(&diff).iter().map(|x| x / s).collect();
                let scale = 1.0 + max_abs(&est);
                if max_abs(&hpart) > sampler.tol * scale * s.abs().max(1.0) {
                    return Err(PathError::FiberViolation { point: p.clone(), direction: dir, shift: s, estimate: est, expected: vec![0.0; v2] });
                }
                out.comparisons += 1;
                match &phi[dir] {
                    None => phi[dir] = Some(est),
                    Some(e) => {
                        let dev = max_diff(e, &est);
                        out.max_deviation = out.max_deviation.max(dev);
                        if dev > sampler.tol * scale {
                            return Err(PathError::FiberViolation { point: p.clone(), direction: dir, shift: s, estimate: est, expected: e.clone() });
                        }
                    }
                }
            }
        }
    }
    let mut cols = Vec::new();
    for (dir, c) in phi.into_iter().enumerate() {
        cols.push(c.ok_or_else(|| PathError::Domain(format!("no admissible shift along fiber direction {dir}")))?);
    }
    out.phi = (0..v2).map(|w| cols.iter().map(|c| c[w]).collect()).collect();
    Ok(out)
}

/// Exponential-coordinate matrix of the homomorphism of `F^s` induced by
/// `x -> a x`, `y -> c x + d y`.
pub fn filiform_linear_lift(s: usize, a: &Q, c: &Q, d: &Q) -> crate::linalg::QMatrix {
    let n = s + 1;
    let mut m = crate::linalg::QMatrix::zeros(n, n);
    m[(0, 0)] = a.clone();
    if n > 1 {
        m[(1, 0)] = c.clone();
        m[(1, 1)] = d.clone();
    }
    let mut coef = a * d;
    for k in 2..n {
        m[(k, k)] = coef.clone();
        coef = &coef * a;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::StratifiedAlgebra;
    use crate::extensions::{filiform_extension, heisenberg_extension};
    use crate::rational::q;
    use crate::sampling::Domain;
    use std::f64::consts::PI;

    fn circle(r: f64) -> FnCurve<impl Fn(f64) -> Vec<f64> + Sync, impl Fn(f64) -> Vec<f64> + Sync> {
        FnCurve {
            point: move |t: f64| vec![r * (2.0 * PI * t).cos(), r * (2.0 * PI * t).sin()],
            velocity: move |t: f64| vec![-2.0 * PI * r * (2.0 * PI * t).sin(), 2.0 * PI * r * (2.0 * PI * t).cos()],
        }
    }

    #[test]
    fn circle_holonomy_is_area() {
        let ext = heisenberg_extension();
        for r in [0.5, 1.0, 2.0] {
            let h = loop_holonomy(&ext, &circle(r), 1e-12).unwrap();
            assert!((h.value[0] - PI * r * r).abs() < 1e-9, "{:?}", h.value);
        }
    }

    #[test]
    fn square_holonomy_is_area() {
        let ext = heisenberg_extension();
        let r2 = ext.base().clone();
        let a = 1.5;
        let sq = Polyline::from_increments(&r2, &[0.3, -0.2], &[vec![a, 0.0], vec![0.0, a], vec![-a, 0.0], vec![0.0, -a]]).unwrap();
        let h = loop_holonomy(&ext, &sq, 1e-12).unwrap();
        assert!((h.value[0] - a * a).abs() < 1e-10);
    }

    #[test]
    fn spiral_lift_matches_closed_form() {
        let ext = heisenberg_extension();
        let r = 1.3;
        let c = circle(r);
        let lifted = lift_horizontal_curve(&ext, &c, &[r, 0.0, 0.0], &PathOptions::default()).unwrap();
        for (t, p) in lifted.times.iter().zip(&lifted.points) {
            assert!((p[2] - 0.5 * r * r * 2.0 * PI * t).abs() < 1e-9);
        }
        assert!(lifted.horizontality < 1e-12);
    }

    #[test]
    fn straight_segment_stays_at_zero() {
        let ext = heisenberg_extension();
        let seg = Polyline::new(ext.base(), vec![vec![0.0, 0.0], vec![2.0, 3.0]]).unwrap();
        let lifted = lift_horizontal_curve(&ext, &seg, &[0.0, 0.0, 0.0], &PathOptions::default()).unwrap();
        assert!(lifted.points.iter().all(|p| p[2].abs() < 1e-14));
    }

    #[test]
    fn non_horizontal_curve_is_rejected() {
        let ext = filiform_extension(2);
        let bad = FnCurve { point: |t: f64| vec![t, 0.0, t], velocity: |_t: f64| vec![1.0, 0.0, 1.0] };
        let err = lift_horizontal_curve(&ext, &bad, &[0.0; 4], &PathOptions::default()).unwrap_err();
        assert!(matches!(err, PathError::NotHorizontal { .. }));
    }

    #[test]
    fn lift_in_engel_is_horizontal() {
        // base H1, lifting through X* ^ Z*
        let ext = filiform_extension(2);
        let h = ext.base().clone();
        let sq = Polyline::from_increments(&h, &[0.0; 3], &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0]]).unwrap();
        let lifted = lift_horizontal_curve(&ext, &sq, &[0.0; 4], &PathOptions::default()).unwrap();
        assert!(lifted.horizontality < 1e-9, "{}", lifted.horizontality);
    }

    #[test]
    fn grid_lift_of_linear_map_is_homomorphism() {
        let e1 = heisenberg_extension();
        let r2 = e1.base().clone();
        let m = crate::linalg::QMatrix::from_rows(&[vec![q(2), q(0)], vec![q(1), q(3)]]);
        let f = GroupMap::linear(&r2, &r2, &m, Domain::cube(2, 10.0)).unwrap();
        let opts = GridOptions { step: 0.25, radius: 3, ..GridOptions::default() };
        let grid = construct_lift_on_grid(&e1, &e1, &f, &[0.0; 3], &[0.0; 3], &opts).unwrap();
        assert!(grid.report.checked_edges > 0);
        for n in grid.nodes() {
            let p = &n.point;
            let expect = [2.0 * p[0], p[0] + 3.0 * p[1], 6.0 * p[2]];
            assert!(max_diff(&n.value, &expect) < 1e-10, "{:?} {:?}", n.value, expect);
        }
    }

    #[test]
    fn filiform_automorphism_table() {
        let m = filiform_linear_lift(4, &q(2), &q(1), &q(3));
        let f4 = StratifiedAlgebra::filiform(4);
        assert!(crate::algebra::GradedLinearMap::new(m.clone()).homomorphism_defect(&f4, &f4).is_none());
        assert_eq!(m[(4, 4)], q(24));
    }

    #[test]
    fn fiber_check_on_linear_lift() {
        let e = heisenberg_extension();
        let h1 = e.total().clone();
        let m = crate::linalg::QMatrix::from_rows(&[vec![q(2), q(0), q(0)], vec![q(1), q(3), q(0)], vec![q(0), q(0), q(6)]]);
        let f = GroupMap::linear(&h1, &h1, &m, Domain::cube(3, 2.0)).unwrap();
        let r = fiber_homomorphism_check(&f, &e, &e, &Sampler::new(Domain::cube(3, 1.0)), &[0.5, 1.0]).unwrap();
        assert!((r.phi[0][0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn stokes_on_affine_disk() {
        let e = heisenberg_extension();
        let r2 = e.base().clone();
        let u = DiskMap::new(&r2, vec![Func::var(0).scale(&q(2)), Func::var(1).scale(&q(2))]).unwrap();
        let alpha = crate::extensions::alpha_potential(&e);
        let rep = stokes_check(&u, &alpha, None, 4, 1e-12).unwrap();
        assert!((rep.area[0] - 4.0 * PI).abs() < 1e-9);
        assert!(rep.residual < 1e-9);
    }
}
