use carnot_core::extensions::{alpha_potential, filiform_extension, heisenberg_extension, normalize_cocycle};
use carnot_core::fixtures::filiform_linear_map;
use carnot_core::forms::{self, AlgebraForm};
use carnot_core::lift::{canonical_tower, check_lift_cohomology};
use carnot_core::path_lift::{holonomy_composite, lift_horizontal_curve, loop_holonomy, FnCurve, PathOptions, Polyline};
use carnot_core::rational::{q, qf};
use carnot_core::{CentralExtension, Domain, FieldForm, Func, GroupMap, Q, StratifiedAlgebra};
use proptest::prelude::*;
use std::f64::consts::PI;

fn shoelace(vs: &[Vec<f64>]) -> f64 {
    let n = vs.len();
    (0..n).map(|i| vs[i][0] * vs[(i + 1) % n][1] - vs[(i + 1) % n][0] * vs[i][1]).sum::<f64>() / 2.0
}

/// Closed polygon from `steps` and a closing edge.
fn closed_loop(start: [f64; 2], steps: &[(f64, f64)]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut incs: Vec<Vec<f64>> = steps.iter().map(|&(a, b)| vec![a, b]).collect();
    let (sx, sy) = steps.iter().fold((0.0, 0.0), |(x, y), &(a, b)| (x + a, y + b));
    incs.push(vec![-sx, -sy]);
    let mut vs = vec![start.to_vec()];
    for d in &incs[..incs.len() - 1] {
        let last = vs.last().unwrap();
        vs.push(vec![last[0] + d[0], last[1] + d[1]]);
    }
    (incs, vs)
}

fn small_poly(cs: &[i64], nvars: usize) -> Func {
    let mut f = Func::int(cs[0]);
    for (i, &c) in cs[1..].iter().enumerate() {
        let v = Func::var(i % nvars);
        let m = if i >= nvars { v.mul(&Func::var((i * 7 + 1) % nvars)) } else { v };
        f = f.add(&m.scale(&q(c)));
    }
    f
}

fn alg_form(alg: &carnot_core::Alg, k: usize, cs: &[i64]) -> AlgebraForm {
    let n = alg.rumin().dim(k);
    AlgebraForm::scalar(alg, k, (0..n).map(|i| q(cs[i % cs.len()] * ((i as i64 % 3) - 1))).collect())
}

fn steps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn polygon_holonomy_is_signed_area(st in steps(), x0 in -1.0f64..1.0, y0 in -1.0f64..1.0) {
        let ext = heisenberg_extension();
        let (incs, vs) = closed_loop([x0, y0], &st);
        let poly = Polyline::from_increments(ext.base(), &[x0, y0], &incs).unwrap();
        let h = loop_holonomy(&ext, &poly, 1e-12).unwrap().value[0];
        prop_assert!((h - shoelace(&vs)).abs() < 1e-10);
        let rev_incs: Vec<Vec<f64>> = incs.iter().rev().map(|d| vec![-d[0], -d[1]]).collect();
        let rev = Polyline::from_increments(ext.base(), &[x0, y0], &rev_incs).unwrap();
        let hr = loop_holonomy(&ext, &rev, 1e-12).unwrap().value[0];
        prop_assert!((h + hr).abs() < 1e-10);
    }

    #[test]
    fn holonomy_is_additive_over_concatenation(a in steps(), b in steps()) {
        let ext = heisenberg_extension();
        let (ia, _) = closed_loop([0.0, 0.0], &a);
        let (ib, _) = closed_loop([0.0, 0.0], &b);
        let hol = |incs: &[Vec<f64>]| loop_holonomy(&ext, &Polyline::from_increments(ext.base(), &[0.0, 0.0], incs).unwrap(), 1e-12).unwrap().value[0];
        let both: Vec<Vec<f64>> = ia.iter().chain(&ib).cloned().collect();
        prop_assert!((hol(&both) - hol(&ia) - hol(&ib)).abs() < 1e-10);
    }

    #[test]
    fn holonomy_scales_quadratically(st in steps(), lam in 0.25f64..4.0) {
        let ext = heisenberg_extension();
        let (incs, _) = closed_loop([0.0, 0.0], &st);
        let scaled: Vec<Vec<f64>> = incs.iter().map(|d| vec![lam * d[0], lam * d[1]]).collect();
        let hol = |incs: &[Vec<f64>]| loop_holonomy(&ext, &Polyline::from_increments(ext.base(), &[0.0, 0.0], incs).unwrap(), 1e-12).unwrap().value[0];
        let (h, hl) = (hol(&incs), hol(&scaled));
        prop_assert!((hl - lam * lam * h).abs() < 1e-10 * (1.0 + hl.abs()));
    }

    #[test]
    fn dilations_compose(xs in prop::collection::vec(-5i64..5, 6), a in 1i64..5, b in 1i64..5) {
        let f = StratifiedAlgebra::filiform(5);
        let x: Vec<Q> = xs.iter().map(|&v| q(v)).collect();
        let (la, lb) = (qf(a, 3), qf(b, 2));
        prop_assert_eq!(f.dilate(&la, &f.dilate(&lb, &x)), f.dilate(&(&la * &lb), &x));
    }

    #[test]
    fn d0_squares_to_zero_and_projection_is_idempotent(cs in prop::collection::vec(-3i64..4, 1..8), k in 1usize..4) {
        for alg in [StratifiedAlgebra::filiform(4), StratifiedAlgebra::heisenberg(2)] {
            let w = alg_form(&alg, k, &cs);
            prop_assert!(forms::d0(&forms::d0(&w)).is_zero());
            let p = forms::project_e0(&w);
            prop_assert_eq!(forms::project_e0(&p), p.clone());
            prop_assert!(forms::d0(&p).is_zero() || k + 1 > alg.dim());
        }
    }

    #[test]
    fn pullback_commutes_with_d(cs in prop::collection::vec(-2i64..3, 6), ws in prop::collection::vec(-2i64..3, 6)) {
        let h1 = StratifiedAlgebra::heisenberg(1);
        let comps: Vec<Func> = (0..3).map(|i| small_poly(&cs[i..i + 3], 3)).collect();
        let f = GroupMap::new(&h1, &h1, comps, Domain::cube(3, 1.0)).unwrap();
        let w = FieldForm::from_coordinates(&h1, 1, vec![(0..3).map(|i| small_poly(&ws[i..i + 3], 3)).collect()]);
        prop_assert!(f.pullback(&w.d()).sub(&f.pullback(&w).d()).is_zero());
    }

    #[test]
    fn pansu_pullback_of_homomorphism_is_pullback(a in 1i64..4, c in -2i64..3, d in 1i64..4, cs in prop::collection::vec(-2i64..3, 1..6), k in 1usize..4) {
        let f = filiform_linear_map(3, a, c, d);
        let tau = alg_form(f.target(), k, &cs);
        let lhs = f.pansu_pullback(&tau);
        let rhs = f.pullback(&FieldForm::from_algebra_form(&tau));
        prop_assert!(lhs.sub(&rhs).is_zero());
    }

    #[test]
    fn cohomology_verdict_ignores_cocycle_scale(num in 1i64..5, den in 1i64..5, a in 1i64..3, c in -1i64..2, d in 1i64..3) {
        let e = filiform_extension(3);
        let scaled = CentralExtension::extend(e.base(), e.values().clone(), e.rho().scale(&qf(num, den))).unwrap();
        let f = filiform_linear_map(3, a, c, d);
        let s = f.sampler();
        let plain = check_lift_cohomology(&f, &e, &e, &s).unwrap();
        let mixed = check_lift_cohomology(&f, &scaled, &e, &s).unwrap();
        prop_assert_eq!(plain.holds, mixed.holds);
        let phi = mixed.fit.exact_matrix.unwrap()[(0, 0)].clone();
        prop_assert_eq!(phi, plain.fit.exact_matrix.unwrap()[(0, 0)].clone() / qf(num, den));
    }

    #[test]
    fn lifted_polylines_stay_horizontal(st in steps()) {
        let ext = filiform_extension(2);
        let incs: Vec<Vec<f64>> = st.iter().enumerate().map(|(i, &(a, b))| if i % 2 == 0 { vec![a, 0.0, 0.0] } else { vec![0.0, b, 0.0] }).collect();
        let poly = Polyline::from_increments(ext.base(), &[0.1, 0.2, 0.3], &incs).unwrap();
        let lifted = lift_horizontal_curve(&ext, &poly, &[0.1, 0.2, 0.3, -0.4], &PathOptions::default()).unwrap();
        prop_assert!(lifted.horizontality < 1e-9);
        for p in &lifted.points {
            prop_assert!(p.iter().all(|x| x.is_finite()));
        }
    }
}

#[test]
fn filiform_homogeneous_dimension() {
    for s in 1..=6 {
        let f = StratifiedAlgebra::filiform(s);
        assert_eq!(f.homogeneous_dimension(), s * (s + 1) / 2 + 1);
    }
}

#[test]
fn e0_weights_are_dual_under_hodge_star() {
    for alg in [StratifiedAlgebra::heisenberg(1), StratifiedAlgebra::heisenberg(2), StratifiedAlgebra::filiform(4)] {
        let (n, big_q) = (alg.dim(), alg.homogeneous_dimension());
        for k in 0..=n {
            let mut a: Vec<usize> = forms::e0_weights(&alg, k);
            let mut b: Vec<usize> = forms::e0_weights(&alg, n - k).iter().map(|w| big_q - w).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b, "degree {k}");
            for w in forms::e0_basis(&alg, k) {
                let star = forms::hodge_star(&w);
                assert!(forms::project_e0(&star) == star, "star of E0 leaves E0 in degree {k}");
            }
        }
    }
}

#[test]
fn horizontal_one_forms_span_e0() {
    for alg in [StratifiedAlgebra::heisenberg(2), StratifiedAlgebra::filiform(5)] {
        assert_eq!(forms::e0_basis(&alg, 1).len(), alg.horizontal().len());
        assert!(forms::e0_weights(&alg, 1).iter().all(|&w| w == 1));
    }
}

#[test]
fn potential_of_tower_stages() {
    for alg in [StratifiedAlgebra::heisenberg(2), StratifiedAlgebra::filiform(4)] {
        for ext in canonical_tower(&alg).unwrap() {
            let rho = FieldForm::from_algebra_form(ext.rho());
            assert!(alpha_potential(&ext).d().sub(&rho).is_zero());
        }
    }
}

#[test]
fn normalization_differs_by_a_coboundary() {
    for ext in [heisenberg_extension(), filiform_extension(2), filiform_extension(4)] {
        let n = normalize_cocycle(&ext).unwrap();
        let lhs = ext.rho().compose_values(&n.phi).sub(n.ext.rho()).unwrap();
        assert_eq!(lhs, n.omega.d0());
    }
}

#[test]
fn composite_quadrature_converges() {
    let ext = heisenberg_extension();
    let lobe = FnCurve {
        point: |t: f64| {
            let th = 2.0 * PI * t;
            vec![th.cos() + 0.3 * (2.0 * th).cos(), 0.7 * th.sin() + 0.2 * (3.0 * th).sin()]
        },
        velocity: |t: f64| {
            let th = 2.0 * PI * t;
            vec![2.0 * PI * (-th.sin() - 0.6 * (2.0 * th).sin()), 2.0 * PI * (0.7 * th.cos() + 0.6 * (3.0 * th).cos())]
        },
    };
    let exact = loop_holonomy(&ext, &lobe, 1e-14).unwrap().value[0];
    let mut prev = f64::NAN;
    for panels in [2, 4, 8] {
        let err = (holonomy_composite(&ext, &lobe, panels)[0] - exact).abs();
        if prev.is_finite() && prev > 1e-11 {
            assert!(prev / err >= 3.0, "{panels} panels: {prev:e} -> {err:e}");
        }
        prev = err;
    }
}
