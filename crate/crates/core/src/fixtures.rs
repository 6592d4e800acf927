//! Built-in algebras, extensions and maps used by the tests, the
//! acceptance suite and the `fixtures` command.

use crate::algebra::{Alg, StratifiedAlgebra};
use crate::extensions::{filiform_extension, heisenberg_extension, CentralExtension, GradedSpace};
use crate::forms::AlgebraForm;
use crate::func::Func;
use crate::lift::canonical_tower;
use crate::linalg::QMatrix;
use crate::maps::{winding_components, GroupMap, PointMap};
use crate::path_lift::filiform_linear_lift;
use crate::rational::{q, qf, Q};
use crate::sampling::Domain;
use std::f64::consts::PI;

/// Box in the right half plane, away from the origin.
pub fn half_plane_box(extra: usize) -> Domain {
    let mut lo = vec![0.5, -1.5];
    let mut hi = vec![2.0, 1.5];
    lo.extend(std::iter::repeat_n(-1.0, extra));
    hi.extend(std::iter::repeat_n(1.0, extra));
    Domain::Box { lo, hi }
}

pub fn annulus(extra: usize) -> Domain {
    Domain::Annulus { inner: 0.5, outer: 2.0, rest: vec![(-1.0, 1.0); extra] }
}

/// `z -> z^k / |z|^{k-1}` on the plane.
pub fn winding_map(k: u32) -> GroupMap {
    let r2 = StratifiedAlgebra::euclidean(2);
    GroupMap::new(&r2, &r2, winding_components(k), half_plane_box(0))
        .expect("two components")
        .named(&format!("winding-{k}"))
        .with_topology(true, Some("origin"))
}

/// `(x, y, z) -> (w_k(x, y), k z)` on `H1`.
pub fn winding_lift(k: u32) -> GroupMap {
    let h1 = StratifiedAlgebra::heisenberg(1);
    let mut c = winding_components(k);
    c.push(Func::var(2).scale(&q(k as i64)));
    GroupMap::new(&h1, &h1, c, half_plane_box(1))
        .expect("three components")
        .named(&format!("winding-lift-{k}"))
        .with_topology(true, Some("z-axis"))
}

/// The winding lift on the full annulus cylinder, declared not simply connected.
pub fn winding_lift_annulus(k: u32) -> GroupMap {
    let mut f = winding_lift(k).with_topology(false, Some("z-axis"));
    f.domain = annulus(1);
    f.name = format!("winding-lift-{k}-annulus");
    f
}

/// `F^{s} -> F^{s}` induced by `x -> a x`, `y -> c x + d y`.
pub fn filiform_linear_map(s: usize, a: i64, c: i64, d: i64) -> GroupMap {
    let f = StratifiedAlgebra::filiform(s);
    let m = filiform_linear_lift(s, &q(a), &q(c), &q(d));
    GroupMap::linear(&f, &f, &m, Domain::cube(f.dim(), 1.0)).expect("square").named(&format!("filiform-{s}-linear"))
}

/// `F^s -> F^{s+1}` for `s = 1..=max`.
pub fn filiform_tower(max: usize) -> Vec<CentralExtension> {
    (1..=max).map(filiform_extension).collect()
}

/// `R^n` as the trivial extension of itself.
pub fn trivial_extension(alg: &Alg) -> CentralExtension {
    CentralExtension::extend(alg, GradedSpace::new(vec![], vec![]), AlgebraForm::zero(alg, 2, 0)).expect("empty cocycle")
}

/// Algebras on which the Rumin complex is exercised.
pub fn rumin_algebras() -> Vec<(String, Alg)> {
    let h1 = StratifiedAlgebra::heisenberg(1);
    vec![
        ("R3".into(), StratifiedAlgebra::euclidean(3)),
        ("H1".into(), h1.clone()),
        ("F3".into(), StratifiedAlgebra::filiform(3)),
        ("F4".into(), StratifiedAlgebra::filiform(4)),
        ("H1xR".into(), StratifiedAlgebra::direct_product(&h1, &StratifiedAlgebra::euclidean(1))),
    ]
}

/// Expected outcome of a bundled lifting problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectation {
    /// `None` when the Rumin check is refused.
    pub rumin: Option<bool>,
    pub cohomology: bool,
}

#[derive(Clone, Debug)]
pub struct LiftFixture {
    pub name: String,
    pub map: GroupMap,
    pub ext1: CentralExtension,
    pub ext2: CentralExtension,
    pub expect: Expectation,
}

fn fixture(name: &str, map: GroupMap, ext1: &CentralExtension, ext2: &CentralExtension, rumin: Option<bool>, cohomology: bool) -> LiftFixture {
    LiftFixture { name: name.into(), map: map.named(name), ext1: ext1.clone(), ext2: ext2.clone(), expect: Expectation { rumin, cohomology } }
}

/// The lifting problems checked by the consistency matrix.
pub fn lift_fixtures() -> Vec<LiftFixture> {
    let heis = heisenberg_extension();
    let r2 = heis.base().clone();
    let engel = filiform_extension(2);
    let h1 = engel.base().clone();
    let (x, y, z) = (Func::var(0), Func::var(1), Func::var(2));
    let lin = |m: &[Vec<Q>], alg: &Alg| GroupMap::linear(alg, alg, &QMatrix::from_rows(m), Domain::cube(alg.dim(), 1.0)).expect("square");
    let mut out = vec![
        fixture("winding-2-plane", winding_map(2), &heis, &heis, Some(true), true),
        fixture("winding-3-plane", winding_map(3), &heis, &heis, Some(true), true),
        fixture(
            "shear-plane",
            GroupMap::new(&r2, &r2, vec![x.scale(&q(3)).add(&y.mul(&y)), y.clone()], Domain::cube(2, 1.0)).expect("two"),
            &heis,
            &heis,
            Some(true),
            true,
        ),
        fixture("rotation-plane", lin(&[vec![qf(3, 5), qf(-4, 5)], vec![qf(4, 5), qf(3, 5)]], &r2), &heis, &heis, Some(true), true),
        fixture("fold-plane", GroupMap::new(&r2, &r2, vec![x.clone(), x.clone()], Domain::cube(2, 1.0)).expect("two"), &heis, &heis, Some(true), true),
        fixture("identity-plane", GroupMap::identity(&r2, Domain::cube(2, 1.0)), &heis, &heis, Some(true), true),
        fixture("winding-lift-2-engel", winding_lift(2), &engel, &engel, Some(false), false),
        fixture("winding-lift-3-engel", winding_lift(3), &engel, &engel, Some(false), false),
        fixture("winding-lift-2-annulus", winding_lift_annulus(2), &engel, &engel, None, false),
        fixture("identity-engel", GroupMap::identity(&h1, Domain::cube(3, 1.0)), &engel, &engel, Some(true), true),
        fixture(
            "mixed-linear-engel",
            lin(&[vec![q(1), q(1), q(0)], vec![q(0), q(1), q(0)], vec![q(0), q(0), q(1)]], &h1),
            &engel,
            &engel,
            Some(false),
            false,
        ),
        fixture(
            "engel-contact-flow",
            // (x, y + x^2, z + x^3/6) is contact on H1
            GroupMap::new(&h1, &h1, vec![x.clone(), y.add(&x.mul(&x)), z.add(&x.powi(3).scale(&qf(1, 6)))], Domain::cube(3, 1.0)).expect("three"),
            &engel,
            &engel,
            Some(true),
            true,
        ),
    ];
    for s in 2..=4 {
        let e = filiform_extension(s);
        out.push(fixture(&format!("filiform-{s}-linear"), filiform_linear_map(s, 2, 1, 3), &e, &e, Some(true), true));
    }
    let h2 = StratifiedAlgebra::heisenberg(2);
    let h2_ext = canonical_tower(&h2).expect("layer-major")[0].clone();
    let r2_triv = trivial_extension(&r2);
    out.push(fixture(
        "isotropic-plane-h2",
        GroupMap::new(&r2, h2_ext.base(), vec![x.clone(), y.clone(), y.clone(), x.clone()], Domain::cube(2, 1.0)).expect("four"),
        &r2_triv,
        &h2_ext,
        Some(true),
        true,
    ));
    out.push(fixture(
        "symplectic-plane-h2",
        GroupMap::new(&r2, h2_ext.base(), vec![x.clone(), Func::zero(), y.clone(), Func::zero()], Domain::cube(2, 1.0)).expect("four"),
        &r2_triv,
        &h2_ext,
        Some(false),
        false,
    ));
    out
}

/// The lift `F` of the radial projection on the spiral-foliated subset of
/// `H1` over the annulus `1 < r < 2`: with `(x, y, z) = (r cos t, r sin t,
/// r^2 t / 2 + s)`, `|s| < pi / 2`, `F = (cos t, sin t, t / 2)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SpiralLift;

impl SpiralLift {
    /// Spiral parameters `(r, t, s)` of a point, if it lies in the domain.
    pub fn chart(&self, p: &[f64]) -> Option<(f64, f64, f64)> {
        let r = p[0].hypot(p[1]);
        if !(r > 1.0 && r < 2.0) {
            return None;
        }
        let theta = p[1].atan2(p[0]);
        let half = 0.5 * r * r;
        let n = ((p[2] / half - theta) / (2.0 * PI)).round();
        let t = theta + 2.0 * PI * n;
        let s = p[2] - half * t;
        (s.abs() < PI / 2.0).then_some((r, t, s))
    }
}

impl PointMap for SpiralLift {
    fn eval(&self, p: &[f64]) -> Vec<f64> {
        let (_, t, _) = self.chart(p).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        vec![t.cos(), t.sin(), 0.5 * t]
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.chart(p).is_some()
    }
}

/// `x / |x|` on the annulus, the base map of [`SpiralLift`].
pub fn radial_projection(p: &[f64]) -> Vec<f64> {
    let r = p[0].hypot(p[1]);
    vec![p[0] / r, p[1] / r]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::check_lift;

    #[test]
    fn fixtures_match_expectations() {
        let all = lift_fixtures();
        assert!(all.len() >= 14);
        for f in &all {
            let v = check_lift(&f.map, &f.ext1, &f.ext2, &f.map.sampler()).unwrap_or_else(|e| panic!("{}: {e}", f.name));
            assert_eq!(v.rumin.liftable(), f.expect.rumin, "{}", f.name);
            assert_eq!(v.cohomology.holds, f.expect.cohomology, "{}", f.name);
        }
    }

    #[test]
    fn spiral_chart_round_trips() {
        let f = SpiralLift;
        for (r, t, s) in [(1.5, 0.3, 0.2), (1.2, 7.0, -1.0), (1.9, -4.0, 1.4)] {
            let p = [r * f64::cos(t), r * f64::sin(t), 0.5 * r * r * t + s];
            let (r2, t2, s2) = f.chart(&p).unwrap();
            assert!((r - r2).abs() < 1e-12 && (t - t2).abs() < 1e-12 && (s - s2).abs() < 1e-12);
            let (a, b) = (f.eval(&p), radial_projection(&p));
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }
}
