//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use carnot_core::extensions::{alpha_potential, filiform_extension, heisenberg_extension};
use carnot_core::field_forms::coframe_form;
use carnot_core::fixtures::{filiform_linear_map, lift_fixtures, rumin_algebras, winding_lift, winding_map, SpiralLift};
use carnot_core::forms::{self, AlgebraForm};
use carnot_core::group::{bch, inverse};
use carnot_core::lift::{check_lift_cohomology, check_lift_rumin, sufficiency_route, RuminOutcome};
use carnot_core::maps::PointMap;
use carnot_core::path_lift::{
    construct_lift_on_grid, filiform_linear_lift, fiber_homomorphism_check, grid_difference, loop_holonomy, stokes_check, Curve, DiskMap,
    EdgeSource, FnCurve, GridLift, GridOptions, PathError, Polyline,
};
use carnot_core::rational::{q, qf, to_f64};
use carnot_core::{Alg, CentralExtension, Domain, FieldForm, Func, Identity, Sampler, StratifiedAlgebra};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_ca27 ^ tag)
}

/// Sum of three monomials of degree at most two with small integer coefficients.
fn random_poly(r: &mut ChaCha8Rng, nvars: usize) -> Func {
    let mut f = Func::zero();
    for _ in 0..3 {
        let mut m = Func::int(r.random_range(-3..=3));
        for _ in 0..r.random_range(0..=2) {
            m = m.mul(&Func::var(r.random_range(0..nvars)));
        }
        f = f.add(&m);
    }
    f
}

fn random_form(r: &mut ChaCha8Rng, alg: &Alg, degree: usize) -> FieldForm {
    let n = alg.rumin().dim(degree);
    FieldForm::from_coeffs(alg, degree, vec![(0..n).map(|_| random_poly(r, alg.dim())).collect()])
}

/// Exact zero, or zero at the sampled points within `1e-9`.
fn vanishes(w: &FieldForm) -> bool {
    if w.is_zero() {
        return true;
    }
    let s = Sampler::new(Domain::cube(w.algebra().dim(), 1.0)).with_tol(1e-9);
    FieldForm::zero(w.algebra(), w.degree(), w.vdim()).identity(w, &s).is_equal()
}

// ---- 1 ----

fn heisenberg_fixture() -> Outcome {
    let ext = heisenberg_extension();
    ensure(ext.is_carnot(), "extension is not Carnot")?;
    let h1 = ext.total();
    let (x, y) = (Func::var(0), Func::var(1));
    // dz - (x dy - y dx)/2 in coordinates
    let want = [y.scale(&qf(1, 2)), x.scale(&qf(-1, 2)), Func::one()];
    let got = coframe_form(h1, 2).to_coordinates();
    for (i, w) in want.iter().enumerate() {
        ensure(got[0][i].sub(w).is_zero(), format!("coefficient {i} of Z* is {:?}", got[0][i].key()))?;
    }
    Ok(format!("Carnot, Z* = dz - (x dy - y dx)/2 exactly ({:?})", ext.report()))
}

// ---- 2 ----

fn potential_identity() -> Outcome {
    let mut exts = vec![("R2->H1".to_string(), heisenberg_extension())];
    for s in 2..=4 {
        exts.push((format!("F{s}->F{}", s + 1), filiform_extension(s)));
    }
    for (name, ext) in &exts {
        let alpha = alpha_potential(ext);
        let rho = FieldForm::from_algebra_form(ext.rho());
        ensure(alpha.d().sub(&rho).is_zero(), format!("{name}: d alpha - rho is not zero"))?;
    }
    let heis = &exts[0].1;
    let (x, y) = (Func::var(0), Func::var(1));
    let half = FieldForm::from_coordinates(heis.base(), 1, vec![vec![y.scale(&qf(-1, 2)), x.scale(&qf(1, 2))]]);
    let diff = alpha_potential(heis).sub(&half);
    ensure(diff.d().is_zero(), "alpha - (x dy - y dx)/2 is not closed")?;
    Ok(format!("d alpha = rho exactly on {} extensions; alpha - (x dy - y dx)/2 closed on R^2", exts.len()))
}

// ---- 3 ----

fn winding_suite() -> Outcome {
    let heis = heisenberg_extension();
    let engel = filiform_extension(2);
    let mut notes = Vec::new();
    for k in [2u32, 3] {
        let f = winding_lift(k);
        let sampler = f.sampler();
        ensure(f.is_contact(&sampler).is_contact(), format!("winding lift {k} is not contact"))?;
        let h1 = f.source().clone();
        let pulled = f.pullback(&coframe_form(&h1, 2));
        let id = pulled.identity(&coframe_form(&h1, 2).scale(&q(k as i64)), &sampler);
        ensure(id.is_equal(), format!("F*Z* != {k} Z*: {id:?}"))?;
        let exact = matches!(id, Identity::Equal { exact: true, .. });
        let base = winding_map(k);
        match check_lift_rumin(&base, &heis, &heis, &base.sampler()).map_err(|e| e.to_string())? {
            RuminOutcome::Checked { liftable: true, fit } => {
                let l = fit.matrix[0][0];
                ensure((l - k as f64).abs() <= 1e-9, format!("L = {l}, expected {k}"))?;
            }
            other => return Err(format!("winding {k} not liftable into H1: {other:?}")),
        }
        notes.push(format!("k={k}: F*Z*={k}Z* ({}), L={k}", if exact { "exact" } else { "sampled" }));
    }
    let f = winding_lift(2);
    let sampler = f.sampler();
    let rumin = check_lift_rumin(&f, &engel, &engel, &sampler).map_err(|e| e.to_string())?;
    ensure(rumin.liftable() == Some(false), "winding lift 2 reported Rumin-liftable into F3")?;
    let coh = check_lift_cohomology(&f, &engel, &engel, &sampler).map_err(|e| e.to_string())?;
    ensure(!coh.holds, "cohomology condition holds for winding lift 2")?;
    let mut points: Vec<Vec<f64>> = coh.fit.witnesses.iter().map(|w| w.point.clone()).collect();
    points.dedup();
    ensure(points.len() >= 2, format!("only {} witness points", points.len()))?;
    // F_P^* rho2 against k cos(kt) dr^dz - r^2 k cos(kt)/2 dr^dt - r k^2 sin(kt) dt^dz
    let pulled = f.pansu_pullback(engel.rho()).to_coordinates();
    let kk = 2.0;
    let mut worst = 0.0f64;
    for p in sampler.points(3).iter().take(8) {
        let (r, t) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
        let c: Vec<f64> = pulled[0].iter().map(|g| g.eval(p)).collect();
        // dx^dy, dx^dz, dy^dz in cylindrical coordinates
        let drdt = r * c[0];
        let drdz = t.cos() * c[1] + t.sin() * c[2];
        let dtdz = -r * t.sin() * c[1] + r * t.cos() * c[2];
        let want = [-0.5 * r * r * kk * (kk * t).cos(), kk * (kk * t).cos(), -r * kk * kk * (kk * t).sin()];
        worst = worst.max(max_diff(&[drdt, drdz, dtdz], &want));
    }
    ensure(worst <= 1e-9, format!("pulled cocycle deviates from the cylindrical formula by {worst:e}"))?;
    Ok(format!("{}; k=2 into F3 fails with {} witness points, formula residual {worst:.1e}", notes.join(", "), points.len()))
}

// ---- 4 ----

fn filiform_criterion() -> Outcome {
    let (a, c, d) = (2i64, 1i64, 3i64);
    let levels = 4;
    let exts: Vec<CentralExtension> = (1..=levels).map(filiform_extension).collect();
    for (i, ext) in exts.iter().enumerate() {
        let s = i + 1;
        let f = filiform_linear_map(s, a, c, d);
        let sampler = f.sampler();
        let coh = check_lift_cohomology(&f, ext, ext, &sampler).map_err(|e| e.to_string())?;
        let lambda = (0..s).fold(q(d), |acc, _| acc * q(a));
        let phi = coh.fit.exact_matrix.as_ref().map(|m| m[(0, 0)].clone());
        ensure(coh.holds && phi.as_ref() == Some(&lambda), format!("stage {s}: holds={} phi={phi:?}, expected {lambda}", coh.holds))?;
        let rumin = check_lift_rumin(&f, ext, ext, &sampler).map_err(|e| e.to_string())?;
        let route = sufficiency_route(ext, ext, Some(&rumin)).route;
        ensure(route == carnot_core::Route::MaxWeight, format!("stage {s}: route {route:?}"))?;
    }
    // iterated grid lift from R^2 up to F^5
    let top = exts.last().unwrap().total().clone();
    let mut r = rng(4);
    let b: Vec<f64> = (0..top.dim()).map(|_| r.random_range(-0.5..0.5)).collect();
    let closed = |s: usize, p: &[f64]| -> Vec<f64> {
        let m = filiform_linear_lift(s, &q(a), &q(c), &q(d));
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| to_f64(&m[(i, j)]) * p[j]).sum()).collect()
    };
    let opts = GridOptions { step: 0.2, radius: 4, degree: 16, tol: 1e-7 };
    let mut base_map = filiform_linear_map(1, a, c, d);
    base_map.domain = Domain::cube(2, 1e3);
    let mut finish = |grid: &GridLift| -> Result<f64, String> {
        let mut nodes: Vec<_> = grid.nodes().collect();
        nodes.sort_by(|x, y| x.word.cmp(&y.word));
        ensure(nodes.len() >= 100, format!("only {} nodes", nodes.len()))?;
        let picked: Vec<_> = nodes.choose_multiple(&mut r, 100).collect();
        Ok(picked.iter().map(|n| max_diff(&n.value, &closed(levels + 1, &n.point))).fold(0.0, f64::max))
    };
    let worst = iterate(&exts, &base_map, &b, &closed, &opts, &mut finish)?;
    ensure(worst <= 1e-6, format!("grid lift deviates by {worst:e}"))?;
    Ok(format!("phi = a^s d and route max-weight for s = 1..{levels}; grid lift to F{} max error {worst:.1e} at 100 nodes", levels + 1))
}

/// Lifts stage by stage, each grid serving as the map for the next.
fn iterate(
    exts: &[CentralExtension],
    src: &dyn EdgeSource,
    b: &[f64],
    closed: &dyn Fn(usize, &[f64]) -> Vec<f64>,
    opts: &GridOptions,
    finish: &mut dyn FnMut(&GridLift) -> Result<f64, String>,
) -> Result<f64, String> {
    let (ext, rest) = exts.split_first().expect("nonempty tower");
    let s = ext.base().dim() - 1;
    let bs = &b[..s + 2];
    let grid = construct_lift_on_grid(ext, ext, src, bs, &closed(s + 1, bs), opts).map_err(|e| format!("stage {s}: {e}"))?;
    if rest.is_empty() {
        finish(&grid)
    } else {
        iterate(rest, &grid, b, closed, opts, finish)
    }
}

// ---- 5 ----

fn rumin_properties() -> Outcome {
    let mut r = rng(5);
    let mut counts = (0usize, 0usize);
    for (name, alg) in rumin_algebras() {
        let n = alg.dim();
        let horizontal = alg.horizontal().len();
        let e01 = forms::e0_basis(&alg, 1);
        ensure(e01.len() == horizontal && e01.iter().all(|w| forms::weight(w) == Some(1)), format!("{name}: E0^1 is not the horizontal span"))?;
        for k in 1..n {
            for i in 0..alg.rumin().dim(k) {
                let mut c = vec![q(0); alg.rumin().dim(k)];
                c[i] = q(1);
                let w = FieldForm::from_algebra_form(&AlgebraForm::scalar(&alg, k, c));
                ensure(k + 2 > n || w.d_c().d_c().is_zero(), format!("{name}: d_c^2 != 0 on generator {i} in degree {k}"))?;
                let e0 = w.pi_e0();
                ensure(e0.pi_e().pi_e0().sub(&e0).is_zero(), format!("{name}: pi_E0 pi_E != id on E0, degree {k}"))?;
                let e = w.pi_e();
                ensure(e.pi_e0().pi_e().sub(&e).is_zero(), format!("{name}: pi_E pi_E0 != id on E, degree {k}"))?;
                ensure(e.weight().is_none_or(|x| Some(x) >= w.weight()), format!("{name}: pi_E lowers weight, degree {k}"))?;
                counts.0 += 1;
            }
        }
        for j in 0..20 {
            let k = 1 + j % (n - 1);
            let w = random_form(&mut r, &alg, k);
            ensure(k + 2 > n || vanishes(&w.d_c().d_c()), format!("{name}: d_c^2 != 0 on a random {k}-form"))?;
            let e0 = w.pi_e0();
            ensure(vanishes(&e0.pi_e().pi_e0().sub(&e0)), format!("{name}: pi_E0 pi_E != id on a random {k}-form"))?;
            let e = w.pi_e();
            ensure(vanishes(&e.pi_e0().pi_e().sub(&e)), format!("{name}: pi_E pi_E0 != id on a random {k}-form"))?;
            counts.1 += 1;
        }
    }
    Ok(format!("{} generators exact, {} random forms", counts.0, counts.1))
}

// ---- 6 ----

fn projection_identity() -> Outcome {
    let mut r = rng(6);
    for (name, ext) in [("R2->H1", heisenberg_extension()), ("F2->F3", filiform_extension(2))] {
        let h = ext.base().clone();
        let g = ext.total().clone();
        let subs: Vec<Func> = ext.h_index().iter().map(|&t| Func::var(t)).collect();
        for i in 0..10 {
            let w = random_form(&mut r, &h, 1);
            let lhs = ext.pull_to_total(&w).pi_e();
            let mut rhs = ext.pull_to_total(&w.pi_e());
            let dcw = w.d_c();
            for (j, &t) in ext.v_index().iter().enumerate() {
                let pairing = dcw.inner_with(&ext.rho().component(j))[0].compose(&subs);
                rhs = rhs.add(&coframe_form(&g, t).pi_e0_perp().mul_func(&pairing));
            }
            let res = lhs.sub(&rhs);
            ensure(res.is_zero(), format!("{name}: residual nonzero for form {i}: {:?}", res.coeffs()))?;
        }
    }
    Ok("residual exactly zero on 10 forms for R2->H1 and F2->F3".into())
}

// ---- 7 ----

fn circle(r: f64) -> impl Curve {
    FnCurve {
        point: move |t: f64| vec![r * (2.0 * PI * t).cos(), r * (2.0 * PI * t).sin()],
        velocity: move |t: f64| vec![-2.0 * PI * r * (2.0 * PI * t).sin(), 2.0 * PI * r * (2.0 * PI * t).cos()],
    }
}

fn holonomy() -> Outcome {
    let ext = heisenberg_extension();
    let r2 = ext.base().clone();
    let mut worst = 0.0f64;
    for r in [0.5, 1.0, 2.0] {
        let h = loop_holonomy(&ext, &circle(r), 1e-12).map_err(|e| e.to_string())?;
        let rel = (h.value[0] - PI * r * r).abs() / (PI * r * r);
        ensure(rel <= 1e-8, format!("circle r={r}: relative error {rel:e}"))?;
        worst = worst.max(rel);
    }
    let a = 1.3;
    let sq = Polyline::from_increments(&r2, &[0.2, -0.1], &[vec![a, 0.0], vec![0.0, a], vec![-a, 0.0], vec![0.0, -a]]).map_err(|e| e.to_string())?;
    let h = loop_holonomy(&ext, &sq, 1e-12).map_err(|e| e.to_string())?;
    ensure((h.value[0] - a * a).abs() <= 1e-8 * a * a, format!("square: {} vs {}", h.value[0], a * a))?;
    // a lopsided loop and its dilates
    let lobe = |lam: f64| FnCurve {
        point: move |t: f64| {
            let th = 2.0 * PI * t;
            vec![lam * (th.cos() + 0.3 * (2.0 * th).cos()), lam * (0.7 * th.sin() + 0.2 * (3.0 * th).sin())]
        },
        velocity: move |t: f64| {
            let th = 2.0 * PI * t;
            let w = 2.0 * PI;
            vec![lam * w * (-th.sin() - 0.6 * (2.0 * th).sin()), lam * w * (0.7 * th.cos() + 0.6 * (3.0 * th).cos())]
        },
    };
    let h1 = loop_holonomy(&ext, &lobe(1.0), 1e-12).map_err(|e| e.to_string())?.value[0];
    for lam in [0.5, 2.0, 4.0] {
        let hl = loop_holonomy(&ext, &lobe(lam), 1e-12).map_err(|e| e.to_string())?.value[0];
        let rel = (hl - lam * lam * h1).abs() / (lam * lam * h1.abs());
        ensure(rel <= 1e-8, format!("scaling by {lam}: relative error {rel:e}"))?;
    }
    Ok(format!("circles within {worst:.1e}, square {:.12}, dilation scaling ok", h.value[0]))
}

// ---- 8 ----

fn uniqueness_and_fibers() -> Outcome {
    let heis = heisenberg_extension();
    let h1 = heis.total().clone();
    let k = 2;
    let f = winding_map(k);
    let lift = winding_lift(k);
    let opts = GridOptions { step: 0.1, radius: 4, degree: 16, tol: 1e-7 };
    let b1 = vec![1.2, 0.0, 0.0];
    let b2 = bch(&h1, &bch(&h1, &b1, &[opts.step, 0.0, 0.0]).unwrap(), &[0.0, opts.step, 0.0]).unwrap();
    let mut v2 = lift.eval(&b2);
    v2[2] += 0.7;
    let g1 = construct_lift_on_grid(&heis, &heis, &f, &b1, &lift.eval(&b1), &opts).map_err(|e| e.to_string())?;
    let g2 = construct_lift_on_grid(&heis, &heis, &f, &b2, &v2, &opts).map_err(|e| e.to_string())?;
    let (shift, dev, common) = grid_difference(&g1, &g2).ok_or("grids share no node")?;
    ensure(common >= 20 && dev <= 1e-7, format!("{common} common nodes, deviation {dev:e}"))?;
    ensure(max_diff(&shift, &[0.0, 0.0, -0.7]) <= 1e-7, format!("difference {shift:?}"))?;
    let closed = g1.nodes().map(|n| max_diff(&n.value, &lift.eval(&n.point))).fold(0.0, f64::max);
    ensure(closed <= 1e-7, format!("grid lift departs from (w_k, kz) by {closed:e}"))?;
    let fiber_sampler = Sampler::new(carnot_core::fixtures::half_plane_box(1));
    for kk in [2u32, 3] {
        let fm = fiber_homomorphism_check(&winding_lift(kk), &heis, &heis, &fiber_sampler, &[0.25, 0.5]).map_err(|e| e.to_string())?;
        ensure((fm.phi[0][0] - kk as f64).abs() <= 1e-9, format!("Phi = {} for k = {kk}", fm.phi[0][0]))?;
    }
    // spiral lift over the radial projection
    let spiral = SpiralLift;
    let rr = 1.5;
    let at = |p: [f64; 3]| spiral.eval(&p);
    let (p0, ps, pw) = (at([rr, 0.0, 0.0]), at([rr, 0.0, 0.5]), at([rr, 0.0, PI * rr * rr]));
    let short = bch(&h1, &inverse(&p0), &ps).unwrap();
    let long = bch(&h1, &inverse(&p0), &pw).unwrap();
    ensure(short.iter().all(|x| x.abs() < 1e-12), format!("short shift moved F: {short:?}"))?;
    let k_long = long[2] / (PI * rr * rr);
    ensure(long[0].abs() < 1e-12 && long[1].abs() < 1e-12 && (k_long - 1.0 / (rr * rr)).abs() < 1e-12, format!("long shift: {long:?}"))?;
    let annulus = Sampler::new(Domain::Annulus { inner: 1.0, outer: 2.0, rest: vec![(-4.0, 4.0)] });
    let verdict = fiber_homomorphism_check(&spiral, &heis, &heis, &annulus, &[0.5, 3.0]);
    ensure(matches!(verdict, Err(PathError::FiberViolation { .. })), format!("spiral lift passed the fiber check: {verdict:?}"))?;
    Ok(format!(
        "{common} common nodes, deviation {dev:.1e}; Phi = k for k = 2, 3; spiral lift: shift 0.5 gives k = 0, shift pi r^2 gives k = {k_long:.4}"
    ))
}

// ---- 9 ----

fn stokes() -> Outcome {
    let mut r = rng(9);
    let (x, y) = (Func::var(0), Func::var(1));
    let heis = heisenberg_extension();
    let r2 = heis.base().clone();
    let r3 = StratifiedAlgebra::euclidean(3);
    let h1 = StratifiedAlgebra::heisenberg(1);
    let h2 = StratifiedAlgebra::heisenberg(2);
    let engel = filiform_extension(2);
    let random_alpha = |r: &mut ChaCha8Rng, alg: &Alg| random_form(r, alg, 1);
    let z_form = |r: &mut ChaCha8Rng, alg: &Alg| coframe_form(alg, alg.dim() - 1).mul_func(&random_poly(r, alg.dim()).add(&Func::one()));
    let s = |n: i64, d: i64| qf(n, d);
    let mut cases: Vec<(&str, DiskMap, FieldForm, Option<FieldForm>)> = Vec::new();
    cases.push(("constant", DiskMap::new(&r2, vec![Func::constant(s(3, 10)), Func::constant(s(-1, 5))]).unwrap(), alpha_potential(&heis), None));
    cases.push((
        "affine-plane",
        DiskMap::new(&r2, vec![x.scale(&s(17, 10)).add(&Func::constant(s(1, 5))), y.scale(&s(17, 10))]).unwrap(),
        alpha_potential(&heis),
        None,
    ));
    // rank one: gamma(x + y^2) with gamma(s) = (s, s^2, s^3/6)
    let arg = x.add(&y.mul(&y));
    let omega_h1 = z_form(&mut r, &h1);
    cases.push((
        "rank-one-h1",
        DiskMap::new(&h1, vec![arg.clone(), arg.mul(&arg), arg.powi(3).scale(&s(1, 6))]).unwrap(),
        alpha_potential(&engel),
        Some(omega_h1),
    ));
    // Legendrian graph of g = x^2 y in H2
    let omega_h2 = z_form(&mut r, &h2);
    cases.push((
        "legendrian-h2",
        DiskMap::new(&h2, vec![x.clone(), y.clone(), x.mul(&y).scale(&q(2)), x.mul(&x), x.mul(&x).mul(&y).scale(&s(1, 2))]).unwrap(),
        random_alpha(&mut r, &h2),
        Some(omega_h2),
    ));
    cases.push((
        "paraboloid-r3",
        DiskMap::new(&r3, vec![x.clone(), y.clone(), x.mul(&x).add(&y.mul(&y))]).unwrap(),
        random_alpha(&mut r, &r3),
        Some(random_alpha(&mut r, &r3)),
    ));
    let mut lines = Vec::new();
    for (name, u, alpha, omega) in &cases {
        if let Some(w) = omega {
            if w.d0().is_zero() && name.ends_with("h2") {
                return Err(format!("{name}: d0 omega vanishes"));
            }
        }
        let rep = stokes_check(u, alpha, omega.as_ref(), 8, 1e-12).map_err(|e| e.to_string())?;
        ensure(rep.residual <= 1e-7, format!("{name}: residual {:e} (area {:?}, boundary {:?})", rep.residual, rep.area, rep.boundary))?;
        lines.push(format!("{name} {:.1e}", rep.residual));
    }
    Ok(lines.join(", "))
}

// ---- 10 ----

fn consistency_matrix() -> Outcome {
    let fixtures = lift_fixtures();
    ensure(fixtures.len() >= 12, format!("only {} fixtures", fixtures.len()))?;
    let mut violations = Vec::new();
    for fx in &fixtures {
        let v = carnot_core::lift::check_lift(&fx.map, &fx.ext1, &fx.ext2, &fx.map.sampler()).map_err(|e| format!("{}: {e}", fx.name))?;
        let rumin = v.rumin.liftable();
        let holds = v.cohomology.holds;
        let route = v.sufficiency.as_ref().map(|s| s.route).unwrap_or(carnot_core::Route::None);
        if rumin == Some(true) && !holds {
            violations.push(format!("{}: rumin-liftable but cohomology fails", fx.name));
        }
        if holds && route != carnot_core::Route::None && rumin == Some(false) {
            violations.push(format!("{}: cohomology holds via {route:?} but not rumin-liftable", fx.name));
        }
    }
    ensure(violations.is_empty(), violations.join("; "))?;
    Ok(format!("{} fixtures, 0 violations", fixtures.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("heisenberg extension fixture", heisenberg_fixture),
        ("potential identity", potential_identity),
        ("winding-map suite", winding_suite),
        ("filiform criterion", filiform_criterion),
        ("rumin complex properties", rumin_properties),
        ("projection identity on extensions", projection_identity),
        ("holonomy", holonomy),
        ("uniqueness and fiber structure", uniqueness_and_fibers),
        ("stokes check", stokes),
        ("consistency matrix", consistency_matrix),
    ];
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if filter.is_some_and(|f| f != i + 1) {
            continue;
        }
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
