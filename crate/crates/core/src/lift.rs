//! Lifting criteria for a contact map between the bases of two central
//! extensions, and the verdict that records which certificate applies.

use crate::algebra::{Alg, AlgebraSpec, BracketEntry, StratifiedAlgebra};
use crate::extensions::{alpha_potential, CentralExtension, ExtensionError, GradedSpace};
use crate::field_forms::FieldForm;
use crate::forms::{self, AlgebraForm};
use crate::func::{Compiled, Func};
use crate::linalg::{projector, pseudo_inverse, QMatrix};
use crate::maps::{ContactVerdict, GroupMap};
use crate::rational::{fmt_q, to_f64, Q};
use crate::sampling::Sampler;
use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LiftError {
    #[error("map is not contact: {0:?}")]
    NotContact(ContactVerdict),
    #[error("map and extensions do not match: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

/// A point where a fitted constant map misses the data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub component: usize,
    pub index: usize,
    pub value: f64,
    pub predicted: f64,
}

/// Best constant `L` with `beta(p) = L sigma` at every point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantFit {
    pub solvable: bool,
    /// True when decided symbolically (no sampling involved).
    pub exact: bool,
    #[serde(serialize_with = "ser_opt_qmatrix")]
    pub exact_matrix: Option<QMatrix>,
    pub matrix: Vec<Vec<f64>>,
    pub residual: f64,
    pub samples: usize,
    pub witnesses: Vec<Witness>,
}

fn ser_opt_qmatrix<S: serde::Serializer>(m: &Option<QMatrix>, s: S) -> Result<S::Ok, S::Error> {
    use serde::Serialize;
    m.as_ref().map(qmatrix_strings).serialize(s)
}

pub fn qmatrix_strings(m: &QMatrix) -> Vec<Vec<String>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| fmt_q(&m[(r, c)])).collect()).collect()
}

const MAX_FIT_SAMPLES: usize = 64;

/// Fits a constant `L` (`rows x sigma.len()`) with `beta[v] = sum_u L[v][u] sigma[u]`
/// coefficientwise; `allowed[v][u] = false` pins `L[v][u] = 0`.
pub fn fit_constant_map(
    beta: &FieldForm,
    sigma: &[Vec<Q>],
    allowed: &dyn Fn(usize, usize) -> bool,
    sampler: &Sampler,
) -> ConstantFit {
    let rows = beta.vdim();
    let m1 = sigma.len();
    let d = beta.coeffs().first().map_or(0, Vec::len);
    let cols_for = |v: usize| -> Vec<usize> { (0..m1).filter(|&u| allowed(v, u)).collect() };
    let constants: Option<Vec<Vec<Q>>> =
        beta.coeffs().iter().map(|cs| cs.iter().map(Func::as_constant).collect::<Option<Vec<Q>>>()).collect();
    if let Some(b) = constants {
        let mut l = QMatrix::zeros(rows, m1);
        let mut solvable = true;
        let mut residual = 0.0f64;
        for (v, bv) in b.iter().enumerate() {
            let cols = cols_for(v);
            let s = QMatrix::from_cols(d, &cols.iter().map(|&u| sigma[u].clone()).collect::<Vec<_>>());
            let x = if cols.is_empty() {
                vec![]
            } else {
                pseudo_inverse(&s, &QMatrix::identity(cols.len()), &QMatrix::identity(d)).mul_vec(bv)
            };
            let pred = if cols.is_empty() { vec![Q::zero(); d] } else { s.mul_vec(&x) };
            for (p, t) in pred.iter().zip(bv) {
                residual = residual.max(to_f64(&(p - t)).abs());
            }
            if pred != *bv {
                solvable = false;
            }
            for (t, &u) in cols.iter().enumerate() {
                l[(v, u)] = x[t].clone();
            }
        }
        let matrix = crate::maps::qmatrix_f64(&l);
        return ConstantFit {
            solvable,
            exact: true,
            exact_matrix: solvable.then_some(l),
            matrix,
            residual,
            samples: 0,
            witnesses: vec![],
        };
    }
    let polynomial = beta.coeffs().iter().flatten().all(Func::is_polynomial);
    let compiled: Vec<Vec<Compiled>> = beta.coeffs().iter().map(|cs| cs.iter().map(Func::compile).collect()).collect();
    let dim = beta.algebra().dim();
    let sampler = sampler.clone().with_count(sampler.count.clamp(8, MAX_FIT_SAMPLES));
    let points: Vec<(Vec<f64>, Vec<Vec<f64>>)> = sampler
        .points(dim)
        .into_iter()
        .map(|p| {
            let vals = compiled.iter().map(|cs| cs.iter().map(|c| c.eval(&p)).collect::<Vec<f64>>()).collect::<Vec<_>>();
            (p, vals)
        })
        .filter(|(_, vals)| vals.iter().flatten().all(|x| x.is_finite()))
        .collect();
    let sig: Vec<Vec<f64>> = sigma.iter().map(|s| s.iter().map(to_f64).collect()).collect();
    let mut matrix = vec![vec![0.0; m1]; rows];
    let mut residual = 0.0f64;
    let mut witnesses: Vec<Witness> = Vec::new();
    for v in 0..rows {
        let cols = cols_for(v);
        let neq = points.len() * d;
        let a = DMatrix::from_fn(neq, cols.len(), |r, c| sig[cols[c]][r % d]);
        let b = DVector::from_fn(neq, |r, _| points[r / d].1[v][r % d]);
        let x = if cols.is_empty() || neq == 0 {
            DVector::zeros(cols.len())
        } else {
            a.clone().svd(true, true).solve(&b, 1e-12).unwrap_or_else(|_| DVector::zeros(cols.len()))
        };
        for (t, &u) in cols.iter().enumerate() {
            matrix[v][u] = x[t];
        }
        for r in 0..neq {
            let pred: f64 = (0..cols.len()).map(|c| a[(r, c)] * x[c]).sum();
            let val = b[r];
            let gap = (pred - val).abs();
            residual = residual.max(gap / 1f64.max(val.abs()));
            if !sampler.close(pred, val) {
                let point = &points[r / d].0;
                if witnesses.len() < 8 && !witnesses.iter().any(|w| &w.point == point) {
                    witnesses.push(Witness { point: point.clone(), component: v, index: r % d, value: val, predicted: pred });
                }
            }
        }
    }
    let mut solvable = witnesses.is_empty() && !points.is_empty();
    let mut exact = false;
    if polynomial {
        // a nonconstant polynomial is never a constant combination
        solvable = false;
        exact = true;
    }
    ConstantFit { solvable, exact, exact_matrix: None, matrix, residual, samples: points.len(), witnesses }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RuminOutcome {
    Checked {
        liftable: bool,
        /// `L : V1 -> V2`.
        fit: ConstantFit,
    },
    Refused {
        reason: String,
    },
}

impl RuminOutcome {
    pub fn liftable(&self) -> Option<bool> {
        match self {
            RuminOutcome::Checked { liftable, .. } => Some(*liftable),
            RuminOutcome::Refused { .. } => None,
        }
    }

    pub fn fit(&self) -> Option<&ConstantFit> {
        match self {
            RuminOutcome::Checked { fit, .. } => Some(fit),
            RuminOutcome::Refused { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyVerdict {
    pub holds: bool,
    /// Graded `phi : V1 -> V2`.
    pub fit: ConstantFit,
    /// `d0^{-1}(f_P^* rho2 - phi∘rho1)` when `phi` is exact.
    #[serde(skip)]
    pub omega: Option<FieldForm>,
    pub omega_samples: Vec<(Vec<f64>, Vec<Vec<f64>>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    MaxWeight,
    Lip1Connected,
    RuminDirect,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sufficiency {
    pub route: Route,
    pub applicable: Vec<Route>,
    pub weight_rho2: Option<usize>,
    pub max_e0_weight: Option<usize>,
    pub lip1_model: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftVerdict {
    pub map: String,
    pub contact: ContactVerdict,
    pub rumin: RuminOutcome,
    pub cohomology: CohomologyVerdict,
    pub sufficiency: Option<Sufficiency>,
    pub provenance: Provenance,
}

fn check_shapes(f: &GroupMap, ext1: &CentralExtension, ext2: &CentralExtension) -> Result<(), LiftError> {
    if !f.source().same_structure(ext1.base()) {
        return Err(LiftError::Mismatch("map source differs from the base of the first extension".into()));
    }
    if !f.target().same_structure(ext2.base()) {
        return Err(LiftError::Mismatch("map target differs from the base of the second extension".into()));
    }
    Ok(())
}

fn require_contact(f: &GroupMap, sampler: &Sampler) -> Result<ContactVerdict, LiftError> {
    let c = f.is_contact(sampler);
    if c.is_contact() {
        Ok(c)
    } else {
        Err(LiftError::NotContact(c))
    }
}

/// Solves `d_c f^* alpha2 = L∘pi_E0 rho1` for a constant `L`.
pub fn check_lift_rumin(
    f: &GroupMap,
    ext1: &CentralExtension,
    ext2: &CentralExtension,
    sampler: &Sampler,
) -> Result<RuminOutcome, LiftError> {
    check_shapes(f, ext1, ext2)?;
    require_contact(f, sampler)?;
    if !f.simply_connected {
        return Ok(RuminOutcome::Refused {
            reason: "domain is not declared simply connected; local lifts need not glue (see the annulus fixture)".into(),
        });
    }
    let beta = rumin_form(f, ext2);
    let sigma: Vec<Vec<Q>> =
        (0..ext1.values().dim()).map(|u| forms::project_e0(&ext1.rho().component(u)).coeffs()[0].clone()).collect();
    let fit = fit_constant_map(&beta, &sigma, &|_, _| true, sampler);
    Ok(RuminOutcome::Checked { liftable: fit.solvable, fit })
}

/// `d_c f^* alpha2` for the potential of the second extension.
pub fn rumin_form(f: &GroupMap, ext2: &CentralExtension) -> FieldForm {
    let alpha2 = alpha_potential(ext2);
    f.pullback(&alpha2).d_c()
}

/// Projection of 2-forms onto `im(d0)^perp`.
fn im_d0_perp(alg: &Alg) -> QMatrix {
    let r = alg.rumin();
    let d2 = r.dim(2);
    let d0 = &r.degree(1).d0;
    let cols: Vec<Vec<Q>> = (0..d0.cols()).map(|c| d0.col(c)).collect();
    let gram = &r.degree(2).gram;
    QMatrix::identity(d2).sub(&projector(d2, &cols, gram))
}

/// Looks for a constant graded `phi` with `f_P^* rho2 - phi∘rho1 ∈ im d0` pointwise.
pub fn check_lift_cohomology(
    f: &GroupMap,
    ext1: &CentralExtension,
    ext2: &CentralExtension,
    sampler: &Sampler,
) -> Result<CohomologyVerdict, LiftError> {
    check_shapes(f, ext1, ext2)?;
    require_contact(f, sampler)?;
    let h1 = ext1.base();
    if h1.dim() < 2 {
        return Err(LiftError::Mismatch("base of dimension below two carries no 2-forms".into()));
    }
    let pulled = f.pansu_pullback(ext2.rho());
    let proj = im_d0_perp(h1);
    let beta = pulled.apply_matrix(&proj, 2);
    let sigma: Vec<Vec<Q>> = (0..ext1.values().dim()).map(|u| proj.mul_vec(&ext1.rho().coeffs()[u])).collect();
    let (l1, l2) = (ext1.values().layers.clone(), ext2.values().layers.clone());
    let fit = fit_constant_map(&beta, &sigma, &|v, u| l2[v] == l1[u], sampler);
    let phi_rho = |phi: &dyn Fn(usize, usize) -> Q| -> FieldForm {
        let mut m = QMatrix::zeros(ext2.values().dim(), ext1.values().dim());
        for v in 0..m.rows() {
            for u in 0..m.cols() {
                m[(v, u)] = phi(v, u);
            }
        }
        FieldForm::from_algebra_form(&ext1.rho().compose_values(&m))
    };
    let omega = fit.exact_matrix.as_ref().map(|m| {
        let diff = pulled.sub(&phi_rho(&|v, u| m[(v, u)].clone()));
        diff.d0_inv().expect("degree two")
    });
    let mut omega_samples = Vec::new();
    if fit.solvable {
        let d0_pinv = crate::maps::qmatrix_f64(&h1.rumin().degree(1).d0_pinv);
        let rho1 = ext1.rho().coeffs().iter().map(|cs| cs.iter().map(to_f64).collect::<Vec<f64>>()).collect::<Vec<_>>();
        for p in sampler.points(h1.dim()).into_iter().take(3) {
            let vals = pulled.evaluate(&p);
            let w: Vec<Vec<f64>> = vals
                .iter()
                .enumerate()
                .map(|(v, cs)| {
                    let diff: Vec<f64> = cs
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c - (0..rho1.len()).map(|u| fit.matrix[v][u] * rho1[u][i]).sum::<f64>())
                        .collect();
                    d0_pinv.iter().map(|row| row.iter().zip(&diff).map(|(a, b)| a * b).sum()).collect()
                })
                .collect();
            omega_samples.push((p, w));
        }
    }
    Ok(CohomologyVerdict { holds: fit.solvable, fit, omega, omega_samples })
}

/// Which sufficiency theorem applies once the cohomology condition holds.
/// The weight criterion is preferred; all applicable routes are listed.
pub fn sufficiency_route(ext1: &CentralExtension, ext2: &CentralExtension, rumin: Option<&RuminOutcome>) -> Sufficiency {
    let h1 = ext1.base();
    let weight_rho2 = forms::weight(ext2.rho());
    let max_e0_weight = forms::max_nontrivial_e0_weight_2(h1);
    let lip1_model = h1.lip1_connected_model();
    let mut applicable = Vec::new();
    let heavy = match (weight_rho2, max_e0_weight) {
        (_, None) => true,
        (None, Some(_)) => true,
        (Some(w), Some(m)) => w >= m,
    };
    if heavy {
        applicable.push(Route::MaxWeight);
    }
    if lip1_model.is_some() {
        applicable.push(Route::Lip1Connected);
    }
    if rumin.and_then(RuminOutcome::liftable) == Some(true) {
        applicable.push(Route::RuminDirect);
    }
    let route = applicable.first().copied().unwrap_or(Route::None);
    Sufficiency { route, applicable, weight_rho2, max_e0_weight, lip1_model }
}

/// Runs all three checks.
pub fn check_lift(f: &GroupMap, ext1: &CentralExtension, ext2: &CentralExtension, sampler: &Sampler) -> Result<LiftVerdict, LiftError> {
    check_shapes(f, ext1, ext2)?;
    let contact = require_contact(f, sampler)?;
    let rumin = check_lift_rumin(f, ext1, ext2, sampler)?;
    let cohomology = check_lift_cohomology(f, ext1, ext2, sampler)?;
    let sufficiency = cohomology.holds.then(|| sufficiency_route(ext1, ext2, Some(&rumin)));
    Ok(LiftVerdict {
        map: f.name.clone(),
        contact,
        rumin,
        cohomology,
        sufficiency,
        provenance: Provenance { seed: sampler.seed, samples: sampler.count, tol: sampler.tol },
    })
}

/// The tower `R^r = G_1 <- G_2 <- ... <- G_s = G` of quotients by the top layers.
pub fn canonical_tower(alg: &Alg) -> Result<Vec<CentralExtension>, LiftError> {
    let layers = alg.layers();
    if layers.windows(2).any(|w| w[0] > w[1]) {
        return Err(LiftError::Mismatch("basis must be ordered by layer".into()));
    }
    let truncated = |top: usize| -> Result<Alg, LiftError> {
        let idx: Vec<usize> = (0..alg.dim()).filter(|&i| layers[i] <= top).collect();
        let mut brackets = Vec::new();
        for &a in &idx {
            for &b in &idx {
                if a < b {
                    let cs: Vec<(usize, Q)> = alg.bracket_basis(a, b).iter().filter(|(k, _)| layers[*k] <= top).cloned().collect();
                    if !cs.is_empty() {
                        brackets.push(BracketEntry::new(a, b, &cs));
                    }
                }
            }
        }
        let spec = AlgebraSpec {
            names: idx.iter().map(|&i| alg.names()[i].clone()).collect(),
            layers: idx.iter().map(|&i| layers[i]).collect(),
            brackets,
            gram: Some(alg.gram().submatrix(&idx, &idx)),
            family: None,
        };
        Ok(StratifiedAlgebra::new(spec).map_err(ExtensionError::from)?)
    };
    let mut out = Vec::new();
    for k in 2..=alg.step() {
        let base = match out.last() {
            Some(e) => CentralExtension::total(e).clone(),
            None => truncated(1)?,
        };
        let vidx = alg.layer_indices(k);
        let n = base.dim();
        let mut coeffs = vec![vec![Q::zero(); base.rumin().dim(2)]; vidx.len()];
        let r = base.rumin();
        for a in 0..n {
            for b in a + 1..n {
                for (t, c) in alg.bracket_basis(a, b) {
                    if let Some(v) = vidx.iter().position(|x| x == t) {
                        coeffs[v][r.index.index_of(&[a, b])] = c.clone();
                    }
                }
            }
        }
        let values = GradedSpace {
            names: vidx.iter().map(|&i| alg.names()[i].clone()).collect(),
            layers: vec![k; vidx.len()],
            gram: alg.gram().submatrix(&vidx, &vidx),
        };
        let rho = AlgebraForm::from_coeffs(&base, 2, coeffs);
        out.push(CentralExtension::extend(&base, values, rho)?);
    }
    Ok(out)
}

/// Horizontal parts of `d(x_k∘f) - f^* alpha_k` along a tower ending at the
/// target of `f`; all vanish exactly when `f` is contact.
pub fn contact_equations_residual(f: &GroupMap, tower: &[CentralExtension]) -> Result<Vec<FieldForm>, LiftError> {
    let Some(top) = tower.last() else {
        return Ok(vec![]);
    };
    let tgt = f.target();
    if top.total().dim() != tgt.dim() || top.total().layers() != tgt.layers() {
        return Err(LiftError::Mismatch("tower does not end at the map's target".into()));
    }
    let h = f.source();
    let mut idx: Vec<usize> = (0..tgt.dim()).collect();
    let mut out = Vec::new();
    for ext in tower.iter().rev() {
        let lower: Vec<usize> = ext.h_index().iter().map(|&a| idx[a]).collect();
        let fiber: Vec<usize> = ext.v_index().iter().map(|&v| idx[v]).collect();
        let comps: Vec<Func> = lower.iter().map(|&i| f.components()[i].clone()).collect();
        let fk = GroupMap::new(h, ext.base(), comps, f.domain.clone()).map_err(|e| LiftError::Mismatch(e.to_string()))?;
        let pulled = fk.pullback(&alpha_potential(ext));
        let dx: Vec<FieldForm> = fiber.iter().map(|&i| FieldForm::function(h, f.components()[i].clone()).d()).collect();
        let dx = FieldForm::from_components(&dx);
        out.push(dx.sub(&pulled).pi_e0());
        idx = lower;
    }
    out.reverse();
    Ok(out)
}
