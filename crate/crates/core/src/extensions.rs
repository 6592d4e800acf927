//! Central extensions `V -> G -> H` defined by vector-valued 2-cocycles.
//!
//! The extended algebra is `g = h ⊕ V` with `[X+A, Y+B] = [X,Y]_h + rho(X,Y)`.
//! Its basis is layer-major, and inside each layer the `h` vectors precede
//! the `V` vectors.

use crate::algebra::{Alg, AlgebraError, AlgebraSpec, BracketEntry, GradedLinearMap, StratifiedAlgebra};
use crate::field_forms::FieldForm;
use crate::forms::{self, AlgebraForm};
use crate::func::Func;
use crate::group::zeta_apply;
use crate::linalg::{orthogonalize, QMatrix};
use crate::rational::{q, Q};
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExtensionError {
    #[error("cocycle is not closed: d0 rho has a nonzero {0}-component")]
    NotClosed(usize),
    #[error("value component {v} of rho pairs basis vectors {a},{b} outside layer {expected}")]
    GradingIncompatible { v: usize, a: usize, b: usize, expected: usize },
    #[error("extended algebra is not bracket generated at layer {0}")]
    NotStratified(usize),
    #[error("L does not preserve the bracket of basis vectors {0} and {1}")]
    NotHomomorphism(usize, usize),
    #[error("no linear map mu solves phi∘rho1 - L*rho2 = d0 mu (component {0})")]
    NoSolution(usize),
    #[error("map is not graded")]
    NotGraded,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A graded inner-product space of values.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedSpace {
    pub names: Vec<String>,
    pub layers: Vec<usize>,
    pub gram: QMatrix,
}

impl GradedSpace {
    pub fn new(names: Vec<String>, layers: Vec<usize>) -> Self {
        let n = layers.len();
        GradedSpace { names, layers, gram: QMatrix::identity(n) }
    }

    /// One-dimensional space in `layer`.
    pub fn line(name: &str, layer: usize) -> Self {
        Self::new(vec![name.to_string()], vec![layer])
    }

    pub fn dim(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_indices(&self, l: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.layers[i] == l).collect()
    }
}

/// Which defining properties of a Carnot extension hold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtensionReport {
    pub closed: bool,
    pub graded: bool,
    pub stratified: bool,
    pub isometric_inclusion: bool,
    pub submetry_projection: bool,
}

#[derive(Clone, Debug)]
pub struct CentralExtension {
    base: Alg,
    values: GradedSpace,
    rho: AlgebraForm,
    total: Alg,
    h_index: Vec<usize>,
    v_index: Vec<usize>,
    report: ExtensionReport,
}

fn grading_issue(base: &Alg, values: &GradedSpace, rho: &AlgebraForm) -> Option<ExtensionError> {
    for (set, v, _) in rho.terms() {
        let expected = base.layer_of(set[0]) + base.layer_of(set[1]);
        if values.layers[v] != expected {
            return Some(ExtensionError::GradingIncompatible { v, a: set[0], b: set[1], expected });
        }
    }
    None
}

impl CentralExtension {
    /// Builds the extension; failure of bracket generation is only recorded.
    pub fn extend(base: &Alg, values: GradedSpace, rho: AlgebraForm) -> Result<Self, ExtensionError> {
        if rho.degree() != 2 || rho.vdim() != values.dim() {
            return Err(ExtensionError::Shape(format!(
                "expected a 2-form with {} value components, got degree {} with {}",
                values.dim(),
                rho.degree(),
                rho.vdim()
            )));
        }
        if let Some(v) = (0..rho.vdim()).find(|&v| !forms::cocycle_check(&rho.component(v))) {
            return Err(ExtensionError::NotClosed(v));
        }
        if let Some(e) = grading_issue(base, &values, &rho) {
            return Err(e);
        }
        if values.layers.contains(&0) || values.gram.rows() != values.dim() || !values.gram.is_positive_definite() && values.dim() > 0 {
            return Err(ExtensionError::Shape("value space needs positive layers and a positive-definite gram".into()));
        }
        let n = base.dim();
        let m = values.dim();
        let top = base.step().max(values.layers.iter().copied().max().unwrap_or(0));
        let mut h_index = vec![0; n];
        let mut v_index = vec![0; m];
        let mut names = Vec::new();
        let mut layers = Vec::new();
        for l in 1..=top {
            for i in base.layer_indices(l) {
                h_index[i] = names.len();
                names.push(base.names()[i].clone());
                layers.push(l);
            }
            for v in values.layer_indices(l) {
                v_index[v] = names.len();
                let mut name = values.names[v].clone();
                while base.names().contains(&name) || names.contains(&name) {
                    name.push('\'');
                }
                names.push(name);
                layers.push(l);
            }
        }
        let mut brackets = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let mut coeffs: Vec<(usize, Q)> = base.bracket_basis(a, b).iter().map(|(i, c)| (h_index[*i], c.clone())).collect();
                for v in 0..m {
                    let c = rho.coefficient(v, &[a, b]);
                    if !c.is_zero() {
                        coeffs.push((v_index[v], c));
                    }
                }
                if !coeffs.is_empty() {
                    brackets.push(BracketEntry::new(h_index[a], h_index[b], &coeffs));
                }
            }
        }
        let dim = n + m;
        let mut gram = QMatrix::zeros(dim, dim);
        for a in 0..n {
            for b in 0..n {
                gram[(h_index[a], h_index[b])] = base.gram()[(a, b)].clone();
            }
        }
        for a in 0..m {
            for b in 0..m {
                gram[(v_index[a], v_index[b])] = values.gram[(a, b)].clone();
            }
        }
        let total = StratifiedAlgebra::new_graded(AlgebraSpec { names, layers, brackets, gram: Some(gram), family: None })?;
        let report = ExtensionReport {
            closed: true,
            graded: true,
            stratified: total.is_stratified(),
            isometric_inclusion: true,
            submetry_projection: true,
        };
        Ok(CentralExtension { base: base.clone(), values, rho, total, h_index, v_index, report })
    }

    /// The extension as a Carnot group, or the first ungenerated layer.
    pub fn require_carnot(self) -> Result<Self, ExtensionError> {
        if self.report.stratified {
            return Ok(self);
        }
        let layer = StratifiedAlgebra::check(&self.total.spec())
            .into_iter()
            .find_map(|e| match e {
                AlgebraError::NotGenerated { layer } => Some(layer),
                _ => None,
            })
            .unwrap_or(2);
        Err(ExtensionError::NotStratified(layer))
    }

    pub fn base(&self) -> &Alg {
        &self.base
    }

    pub fn values(&self) -> &GradedSpace {
        &self.values
    }

    pub fn rho(&self) -> &AlgebraForm {
        &self.rho
    }

    pub fn total(&self) -> &Alg {
        &self.total
    }

    pub fn h_index(&self) -> &[usize] {
        &self.h_index
    }

    pub fn v_index(&self) -> &[usize] {
        &self.v_index
    }

    pub fn report(&self) -> &ExtensionReport {
        &self.report
    }

    pub fn is_carnot(&self) -> bool {
        self.report.stratified
    }

    /// Projection `g -> h` as a `dim h x dim g` matrix.
    pub fn projection(&self) -> QMatrix {
        let mut p = QMatrix::zeros(self.base.dim(), self.total.dim());
        for (a, &t) in self.h_index.iter().enumerate() {
            p[(a, t)] = q(1);
        }
        p
    }

    /// Inclusion `V -> g` as a `dim g x dim V` matrix.
    pub fn inclusion(&self) -> QMatrix {
        let mut p = QMatrix::zeros(self.total.dim(), self.values.dim());
        for (v, &t) in self.v_index.iter().enumerate() {
            p[(t, v)] = q(1);
        }
        p
    }

    /// `pi^*` of a form on the base chart.
    pub fn pull_to_total(&self, w: &FieldForm) -> FieldForm {
        let subs: Vec<Func> = self.h_index.iter().map(|&t| Func::var(t)).collect();
        let r_base = self.base.rumin();
        let r_tot = self.total.rumin();
        let mut out = FieldForm::zero(&self.total, w.degree(), w.vdim());
        let mut coeffs: Vec<Vec<Func>> = out.coeffs().to_vec();
        for (v, cs) in w.coeffs().iter().enumerate() {
            for (i, c) in cs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let set: Vec<usize> = r_base.index.basis(w.degree())[i].iter().map(|&a| self.h_index[a]).collect();
                coeffs[v][r_tot.index.index_of(&set)] = c.compose(&subs);
            }
        }
        out = FieldForm::from_coeffs(&self.total, w.degree(), coeffs);
        out
    }

    /// Coordinate projection of a total-group point to the base.
    pub fn project_point(&self, p: &[f64]) -> Vec<f64> {
        self.h_index.iter().map(|&t| p[t]).collect()
    }

    /// `V`-coordinates of a total-group point.
    pub fn fiber_point(&self, p: &[f64]) -> Vec<f64> {
        self.v_index.iter().map(|&t| p[t]).collect()
    }

    /// Assembles a total-group point from base and fiber coordinates.
    pub fn join_point(&self, h: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.total.dim()];
        for (a, &t) in self.h_index.iter().enumerate() {
            out[t] = h[a];
        }
        for (a, &t) in self.v_index.iter().enumerate() {
            out[t] = v[a];
        }
        out
    }
}

/// Evaluates a `V`-valued 2-form on two vectors of functions.
fn rho_on<S: crate::scalar::Scalar>(rho: &AlgebraForm, u: &[S], w: &[S]) -> Vec<S> {
    let mut out = vec![S::nil(); rho.vdim()];
    for (set, v, c) in rho.terms() {
        let (a, b) = (set[0], set[1]);
        let t = u[a].mul(&w[b]).sub(&u[b].mul(&w[a]));
        if !t.is_nil() {
            out[v] = out[v].add(&t.scale(&c));
        }
    }
    out
}

/// The potential `alpha` on the base with `d alpha = rho`:
/// `alpha(Y_i)(exp X) = rho(X, zeta(ad X) e_i)`.
pub fn alpha_potential(ext: &CentralExtension) -> FieldForm {
    let h = &ext.base;
    let n = h.dim();
    let x: Vec<Func> = (0..n).map(Func::var).collect();
    let mut coeffs = vec![vec![Func::zero(); n]; ext.values.dim()];
    for i in 0..n {
        let mut e = vec![Func::zero(); n];
        e[i] = Func::one();
        let z = zeta_apply(h, &x, &e);
        for (v, c) in rho_on(&ext.rho, &x, &z).into_iter().enumerate() {
            coeffs[v][i] = c;
        }
    }
    FieldForm::from_coeffs(h, 1, coeffs)
}

/// Numeric potential coefficients at a base point (for path integration).
pub fn alpha_at(ext: &CentralExtension, x: &[f64]) -> Vec<Vec<f64>> {
    let h = &ext.base;
    let n = h.dim();
    let mut out = vec![vec![0.0; n]; ext.values.dim()];
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let z = zeta_apply(h, x, &e);
        for (v, c) in rho_on(&ext.rho, x, &z).into_iter().enumerate() {
            out[v][i] = c;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct HomomorphismLift {
    /// `psi : g1 -> g2` in total-algebra bases.
    pub psi: GradedLinearMap,
    /// `mu : h1 -> V2` as a `dim V2 x dim h1` matrix (minimum norm).
    pub mu: QMatrix,
    /// Dimension of graded `theta : h1 -> V2` with `d0 theta = 0`.
    pub kernel_dim: usize,
}

/// Lifts a homomorphism `L : h1 -> h2` and a linear `phi : V1 -> V2` to
/// `psi(X + Y) = L X + mu(X) + phi(Y)`.
pub fn homomorphism_lift(
    ext1: &CentralExtension,
    ext2: &CentralExtension,
    l: &GradedLinearMap,
    phi: &QMatrix,
) -> Result<HomomorphismLift, ExtensionError> {
    let (h1, h2) = (&ext1.base, &ext2.base);
    let (m1, m2) = (ext1.values.dim(), ext2.values.dim());
    if l.matrix.rows() != h2.dim() || l.matrix.cols() != h1.dim() || phi.rows() != m2 || phi.cols() != m1 {
        return Err(ExtensionError::Shape("L or phi has the wrong size".into()));
    }
    if let Some((a, b)) = l.homomorphism_defect(h1, h2) {
        return Err(ExtensionError::NotHomomorphism(a, b));
    }
    let lhs = ext1.rho.compose_values(phi);
    let pulled = ext2.rho.pullback_linear(h1, &l.matrix);
    let target = lhs.sub(&pulled).map_err(|e| ExtensionError::Shape(e.to_string()))?;
    let mu_form = forms::d0_pseudoinverse(&target);
    for v in 0..m2 {
        if forms::d0(&mu_form.component(v)) != target.component(v) {
            return Err(ExtensionError::NoSolution(v));
        }
    }
    let n1 = h1.dim();
    let mut mu = QMatrix::zeros(m2, n1);
    for v in 0..m2 {
        for a in 0..n1 {
            mu[(v, a)] = mu_form.coeffs()[v][a].clone();
        }
    }
    let (g1, g2) = (&ext1.total, &ext2.total);
    let mut psi = QMatrix::zeros(g2.dim(), g1.dim());
    for a in 0..n1 {
        let col = ext1.h_index[a];
        for b in 0..h2.dim() {
            psi[(ext2.h_index[b], col)] = l.matrix[(b, a)].clone();
        }
        for v in 0..m2 {
            psi[(ext2.v_index[v], col)] = mu[(v, a)].clone();
        }
    }
    for u in 0..m1 {
        for v in 0..m2 {
            psi[(ext2.v_index[v], ext1.v_index[u])] = phi[(v, u)].clone();
        }
    }
    let psi = GradedLinearMap::new(psi);
    if let Some((a, b)) = psi.homomorphism_defect(g1, g2) {
        return Err(ExtensionError::NotHomomorphism(a, b));
    }
    // graded closed 1-forms h1 -> V2: per value component, closed 1-forms of
    // weight equal to that component's layer
    let d0_1 = &h1.rumin().degree(1).d0;
    let mut kernel_dim = 0;
    for v in 0..m2 {
        let layer = ext2.values.layers[v];
        let cols: Vec<usize> = (0..n1).filter(|&a| h1.layer_of(a) == layer).collect();
        if cols.is_empty() {
            continue;
        }
        let rows: Vec<usize> = (0..d0_1.rows()).collect();
        let block = d0_1.submatrix(&rows, &cols);
        kernel_dim += cols.len() - block.rank();
    }
    Ok(HomomorphismLift { psi, mu, kernel_dim })
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub ext: CentralExtension,
    /// Invertible graded `phi : V -> V`.
    pub phi: QMatrix,
    /// `V`-valued 1-form with `phi∘rho - rho~ = d0 omega`.
    pub omega: AlgebraForm,
}

/// Replaces `rho` by an equivalent cocycle whose components lie in `E0` and
/// are pairwise orthogonal.
pub fn normalize_cocycle(ext: &CentralExtension) -> Result<Normalized, ExtensionError> {
    let h = &ext.base;
    let m = ext.values.dim();
    let gram2 = &h.rumin().degree(2).gram;
    let mut a = QMatrix::zeros(m, m);
    let top = ext.values.layers.iter().copied().max().unwrap_or(0);
    for l in 1..=top {
        let idx = ext.values.layer_indices(l);
        if idx.is_empty() {
            continue;
        }
        let sig: Vec<Vec<Q>> = idx.iter().map(|&j| forms::project_e0(&ext.rho.component(j)).coeffs()[0].clone()).collect();
        let ortho = orthogonalize(&sig, gram2);
        // columns of S^T are the sigma^j
        let st = QMatrix::from_cols(sig[0].len(), &sig);
        let mut rows: Vec<Vec<Q>> = ortho.iter().map(|b| st.solve(b).expect("in span")).collect();
        rows.extend(st.nullspace());
        debug_assert_eq!(rows.len(), idx.len());
        for (r, row) in rows.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                a[(idx[r], idx[c])] = x.clone();
            }
        }
    }
    let mu = forms::d0_pseudoinverse(&ext.rho);
    let omega = mu.compose_values(&a);
    let phi_rho = ext.rho.compose_values(&a);
    let tilde = phi_rho.sub(&forms::d0(&omega)).map_err(|e| ExtensionError::Shape(e.to_string()))?;
    let new = CentralExtension::extend(&ext.base, ext.values.clone(), tilde)?;
    Ok(Normalized { ext: new, phi: a, omega })
}

/// Extension of the same base by `phi∘rho` with values in `im(phi)`, and the
/// surjection `psi(X + Y) = X + phi(Y)`.
pub fn pushforward_extension(
    ext: &CentralExtension,
    target: &GradedSpace,
    phi: &QMatrix,
) -> Result<(CentralExtension, GradedLinearMap), ExtensionError> {
    let m1 = ext.values.dim();
    if phi.cols() != m1 || phi.rows() != target.dim() {
        return Err(ExtensionError::Shape("phi has the wrong size".into()));
    }
    for w in 0..phi.rows() {
        for u in 0..m1 {
            if !phi[(w, u)].is_zero() && target.layers[w] != ext.values.layers[u] {
                return Err(ExtensionError::NotGraded);
            }
        }
    }
    // graded basis of the image
    let mut basis: Vec<Vec<Q>> = Vec::new();
    let mut layers = Vec::new();
    let top = ext.values.layers.iter().copied().max().unwrap_or(0);
    for l in 1..=top {
        let cols: Vec<Vec<Q>> = ext.values.layer_indices(l).into_iter().map(|u| phi.col(u)).collect();
        if cols.is_empty() {
            continue;
        }
        let mat = QMatrix::from_cols(phi.rows(), &cols);
        for p in mat.rref().pivots {
            basis.push(cols[p].clone());
            layers.push(l);
        }
    }
    let r = basis.len();
    let b = QMatrix::from_cols(phi.rows(), &basis);
    // coordinates of phi(e_u) in the image basis
    let mut coords = QMatrix::zeros(r, m1);
    for u in 0..m1 {
        let x = if r == 0 { vec![] } else { b.solve(&phi.col(u)).expect("column lies in the image") };
        for i in 0..r {
            coords[(i, u)] = x[i].clone();
        }
    }
    let mut gram = QMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            gram[(i, j)] = crate::linalg::inner(&basis[i], &target.gram, &basis[j]);
        }
    }
    let names = (0..r).map(|i| format!("W{}", i + 1)).collect();
    let values = GradedSpace { names, layers, gram };
    let rho = ext.rho.compose_values(&coords);
    let new = CentralExtension::extend(&ext.base, values, rho)?;
    let mut psi = QMatrix::zeros(new.total.dim(), ext.total.dim());
    for (&t1, &t2) in ext.h_index.iter().zip(&new.h_index) {
        psi[(t2, t1)] = q(1);
    }
    for u in 0..m1 {
        for i in 0..r {
            psi[(new.v_index[i], ext.v_index[u])] = coords[(i, u)].clone();
        }
    }
    Ok((new, GradedLinearMap::new(psi)))
}

/// Splits off the horizontal part `W = V^[1]` of the values.
pub fn abelian_factor_split(ext: &CentralExtension) -> Result<(CentralExtension, Vec<usize>), ExtensionError> {
    let w = ext.values.layer_indices(1);
    for &v in &w {
        if let Some((set, _, _)) = ext.rho.component(v).terms().into_iter().next() {
            return Err(ExtensionError::GradingIncompatible { v, a: set[0], b: set[1], expected: 1 });
        }
    }
    if w.is_empty() {
        return Ok((ext.clone(), w));
    }
    let keep: Vec<usize> = (0..ext.values.dim()).filter(|v| !w.contains(v)).collect();
    let values = GradedSpace {
        names: keep.iter().map(|&v| ext.values.names[v].clone()).collect(),
        layers: keep.iter().map(|&v| ext.values.layers[v]).collect(),
        gram: ext.values.gram.submatrix(&keep, &keep),
    };
    let coeffs = keep.iter().map(|&v| ext.rho.coeffs()[v].clone()).collect();
    let rho = AlgebraForm::from_coeffs(&ext.base, 2, coeffs);
    Ok((CentralExtension::extend(&ext.base, values, rho)?, w))
}

/// Extension of `R^2` by `dx ^ dy`.
pub fn heisenberg_extension() -> CentralExtension {
    let r2 = StratifiedAlgebra::euclidean(2);
    let rho = AlgebraForm::monomial(&r2, &[0, 1]);
    CentralExtension::extend(&r2, GradedSpace::line("Z", 2), rho).expect("closed and graded")
}

/// Extension of `F^s` by `X* ^ Z_s*` (for `s = 1`, by `X* ^ Y*`).
pub fn filiform_extension(s: usize) -> CentralExtension {
    let f = StratifiedAlgebra::filiform(s);
    let last = if s == 1 { 1 } else { s };
    let rho = AlgebraForm::monomial(&f, &[0, last]);
    CentralExtension::extend(&f, GradedSpace::line(&format!("Z{}", s + 1), s + 1), rho).expect("closed and graded")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    #[test]
    fn heisenberg_from_plane() {
        let e = heisenberg_extension();
        assert!(e.is_carnot());
        let t = e.total();
        assert_eq!(t.layers(), &[1, 1, 2]);
        assert_eq!(t.bracket_basis(0, 1), &[(2, q(1))]);
        let h1 = StratifiedAlgebra::heisenberg(1);
        assert_eq!(t.group().coframe, h1.group().coframe);
    }

    #[test]
    fn filiform_tower_reproduces_families() {
        for s in 1..=4 {
            let e = filiform_extension(s);
            assert!(e.is_carnot());
            let f = StratifiedAlgebra::filiform(s + 1);
            assert_eq!(e.total().layers(), f.layers());
            for a in 0..f.dim() {
                for b in 0..f.dim() {
                    assert_eq!(e.total().bracket_basis(a, b), f.bracket_basis(a, b), "s={s}");
                }
            }
        }
    }

    #[test]
    fn non_closed_cocycle_is_rejected() {
        let f3 = StratifiedAlgebra::filiform(3);
        let rho = AlgebraForm::monomial(&f3, &[1, 3]);
        let r = CentralExtension::extend(&f3, GradedSpace::line("W", 4), rho);
        assert_eq!(r.unwrap_err(), ExtensionError::NotClosed(0));
    }

    #[test]
    fn grading_is_checked() {
        let r2 = StratifiedAlgebra::euclidean(2);
        let rho = AlgebraForm::monomial(&r2, &[0, 1]);
        let r = CentralExtension::extend(&r2, GradedSpace::line("Z", 3), rho);
        assert!(matches!(r, Err(ExtensionError::GradingIncompatible { .. })));
    }

    #[test]
    fn ungenerated_values_are_flagged() {
        let r2 = StratifiedAlgebra::euclidean(2);
        let rho = AlgebraForm::from_coeffs(&r2, 2, vec![vec![q(1)], vec![q(0)]]);
        let e = CentralExtension::extend(&r2, GradedSpace::new(vec!["Z".into(), "W".into()], vec![2, 2]), rho).unwrap();
        assert!(!e.is_carnot());
        assert_eq!(e.require_carnot().unwrap_err(), ExtensionError::NotStratified(2));
    }

    #[test]
    fn potential_of_heisenberg_extension() {
        let e = heisenberg_extension();
        let a = alpha_potential(&e);
        let (x, y) = (Func::var(0), Func::var(1));
        assert_eq!(a.coeffs()[0], vec![y.scale(&qf(-1, 2)), x.scale(&qf(1, 2))]);
        assert_eq!(a.d(), FieldForm::from_algebra_form(e.rho()));
    }

    #[test]
    fn potential_closes_on_filiform_tower() {
        for s in 2..=4 {
            let e = filiform_extension(s);
            let a = alpha_potential(&e);
            assert_eq!(a.d(), FieldForm::from_algebra_form(e.rho()), "s={s}");
            assert!(a.coeffs()[0].iter().all(|c| c.is_polynomial()));
        }
    }

    #[test]
    fn scalar_homomorphism_lift() {
        let e = heisenberg_extension();
        let k = q(3);
        let l = GradedLinearMap::new(QMatrix::diagonal(&[k.clone(), k.clone()]));
        let phi = QMatrix::diagonal(&[&k * &k]);
        let lift = homomorphism_lift(&e, &e, &l, &phi).unwrap();
        assert!(lift.mu.is_zero());
        assert_eq!(lift.psi.matrix, QMatrix::diagonal(&[q(3), q(3), q(9)]));
        assert_eq!(lift.kernel_dim, 0);
        assert!(matches!(homomorphism_lift(&e, &e, &l, &QMatrix::diagonal(&[q(2)])), Err(ExtensionError::NoSolution(0))));
    }

    #[test]
    fn filiform_shear_has_no_lift() {
        let e = filiform_extension(2);
        let mut m = QMatrix::identity(3);
        m[(1, 0)] = q(1);
        let l = GradedLinearMap::new(m);
        assert!(l.homomorphism_defect(e.base(), e.base()).is_none());
        // L fixes X*^Z2* up to exact terms, so phi must be 1
        let r = homomorphism_lift(&e, &e, &l, &QMatrix::diagonal(&[q(2)]));
        assert!(matches!(r, Err(ExtensionError::NoSolution(0))));
        assert!(homomorphism_lift(&e, &e, &l, &QMatrix::diagonal(&[q(1)])).is_ok());
    }

    #[test]
    fn normalization_certificate() {
        let f3 = StratifiedAlgebra::filiform(3);
        // X*^Z2* is exact, so only Y*^Z2* survives
        let rho = AlgebraForm::from_terms(&f3, 2, 1, &[(vec![1, 2], 0, q(1)), (vec![0, 2], 0, q(1))]).unwrap();
        let e = CentralExtension::extend(&f3, GradedSpace::line("W", 3), rho.clone()).unwrap();
        let n = normalize_cocycle(&e).unwrap();
        let lhs = rho.compose_values(&n.phi).sub(n.ext.rho()).unwrap();
        assert_eq!(lhs, forms::d0(&n.omega));
        assert_eq!(forms::project_e0(n.ext.rho()), n.ext.rho().clone());
        assert_eq!(n.ext.rho().clone(), AlgebraForm::monomial(&f3, &[1, 2]));
    }

    #[test]
    fn dependent_components_are_normalized() {
        let r2 = StratifiedAlgebra::euclidean(2);
        let rho = AlgebraForm::from_coeffs(&r2, 2, vec![vec![q(1)], vec![q(2)]]);
        let e = CentralExtension::extend(&r2, GradedSpace::new(vec!["Z".into(), "W".into()], vec![2, 2]), rho.clone()).unwrap();
        let n = normalize_cocycle(&e).unwrap();
        assert!(n.phi.determinant() != q(0));
        let comps = n.ext.rho().coeffs();
        assert_eq!(comps.iter().filter(|c| c.iter().any(|x| !x.is_zero())).count(), 1);
        assert_eq!(rho.compose_values(&n.phi).sub(n.ext.rho()).unwrap(), forms::d0(&n.omega));
    }

    #[test]
    fn pushforward_by_two() {
        let e = heisenberg_extension();
        let (p, psi) = pushforward_extension(&e, e.values(), &QMatrix::diagonal(&[q(2)])).unwrap();
        assert!(p.is_carnot());
        assert_eq!(p.rho().coeffs()[0], vec![q(1)]);
        assert!(psi.homomorphism_defect(e.total(), p.total()).is_none());
        let (z, _) = pushforward_extension(&e, e.values(), &QMatrix::zeros(1, 1)).unwrap();
        assert_eq!(z.values().dim(), 0);
        assert_eq!(z.total().dim(), 2);
    }

    #[test]
    fn abelian_factor_is_split() {
        let r2 = StratifiedAlgebra::euclidean(2);
        let rho = AlgebraForm::from_coeffs(&r2, 2, vec![vec![q(0)], vec![q(1)]]);
        let e = CentralExtension::extend(&r2, GradedSpace::new(vec!["W".into(), "Z".into()], vec![1, 2]), rho).unwrap();
        assert_eq!(e.total().rank(), 3);
        let (red, w) = abelian_factor_split(&e).unwrap();
        assert_eq!(w, vec![0]);
        assert_eq!(red.total().rank(), 2);
        assert!(red.is_carnot());
    }
}
