//! Stratified nilpotent Lie algebras with exact structure constants.
//!
//! Bases are layer-major: every basis vector carries a layer index and the
//! layer indices are non-decreasing along the basis.

use crate::group::GroupData;
use crate::linalg::QMatrix;
use crate::rational::{q, q_one, Q};
use crate::rumin::RuminData;
use crate::scalar::Scalar;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

pub type Alg = Arc<StratifiedAlgebra>;

/// Families the constructors and the sufficiency whitelist know about.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Euclidean { n: usize },
    Heisenberg { n: usize },
    Filiform { s: usize },
    /// Jet space `J^k(R^n)`; recognised from this tag only.
    JetSpace { k: usize, n: usize },
    Product { factors: Vec<Family> },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Euclidean { n } => write!(f, "R^{n}"),
            Family::Heisenberg { n } => write!(f, "H_{n}"),
            Family::Filiform { s } => write!(f, "F^{s}"),
            Family::JetSpace { k, n } => write!(f, "J^{k}(R^{n})"),
            Family::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(" x "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GramIssue {
    #[error("gram matrix has the wrong shape")]
    WrongShape,
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("gram matrix couples layers {0} and {1}")]
    NotBlockDiagonal(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("algebra must have positive dimension")]
    Empty,
    #[error("expected {expected} entries in {field}, found {found}")]
    Length { field: &'static str, expected: usize, found: usize },
    #[error("layer index of basis vector {index} must be at least 1")]
    LayerZero { index: usize },
    #[error("basis is not layer-major at index {index}")]
    NotLayerMajor { index: usize },
    #[error("layer {layer} is empty")]
    EmptyLayer { layer: usize },
    #[error("duplicate basis name {0:?}")]
    DuplicateName(String),
    #[error("bracket entry {entry} references index {index} outside the basis")]
    IndexOutOfRange { entry: usize, index: usize },
    #[error("bracket entry {entry} brackets basis vector {j} with itself")]
    SelfBracket { entry: usize, j: usize },
    #[error("bracket [{j},{k}] is given twice")]
    DuplicateBracket { entry: usize, j: usize, k: usize },
    #[error("[{j},{k}] has a component along {i}, violating the grading")]
    NotGraded { entry: usize, j: usize, k: usize, i: usize },
    #[error("Jacobi identity fails on ({i},{j},{k})")]
    Jacobi { i: usize, j: usize, k: usize },
    #[error("layer {layer} is not spanned by brackets of layer 1 with layer {prev}", prev = layer - 1)]
    NotGenerated { layer: usize },
    #[error("{0}")]
    Gram(GramIssue),
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("{0}")]
    Unsupported(String),
}

impl AlgebraError {
    /// JSON pointer into the algebra document that locates the problem.
    pub fn pointer(&self) -> String {
        match self {
            AlgebraError::Empty => "/dim".into(),
            AlgebraError::Length { field, .. } => format!("/{field}"),
            AlgebraError::LayerZero { index } | AlgebraError::NotLayerMajor { index } => {
                format!("/layers/{index}")
            }
            AlgebraError::EmptyLayer { .. } => "/layers".into(),
            AlgebraError::DuplicateName(_) => "/basis".into(),
            AlgebraError::IndexOutOfRange { entry, .. }
            | AlgebraError::SelfBracket { entry, .. }
            | AlgebraError::DuplicateBracket { entry, .. }
            | AlgebraError::NotGraded { entry, .. } => format!("/brackets/{entry}"),
            AlgebraError::Jacobi { .. } | AlgebraError::NotGenerated { .. } => "/brackets".into(),
            AlgebraError::Gram(_) => "/gram".into(),
            AlgebraError::UnknownFamily(_) | AlgebraError::Unsupported(_) => "".into(),
        }
    }
}

/// One bracket `[e_j, e_k] = sum_i c_i e_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BracketEntry {
    pub j: usize,
    pub k: usize,
    pub coeffs: Vec<(usize, Q)>,
}

impl BracketEntry {
    pub fn new(j: usize, k: usize, coeffs: &[(usize, Q)]) -> Self {
        BracketEntry { j, k, coeffs: coeffs.to_vec() }
    }
}

/// Unvalidated algebra data, as read from a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraSpec {
    pub names: Vec<String>,
    pub layers: Vec<usize>,
    pub brackets: Vec<BracketEntry>,
    pub gram: Option<QMatrix>,
    pub family: Option<Family>,
}

type Sparse = Vec<(usize, Q)>;

pub struct StratifiedAlgebra {
    names: Vec<String>,
    layers: Vec<usize>,
    table: Vec<Sparse>,
    gram: QMatrix,
    stratified: bool,
    family: Option<Family>,
    rumin: OnceLock<Arc<RuminData>>,
    group: OnceLock<Arc<GroupData>>,
}

impl Clone for StratifiedAlgebra {
    fn clone(&self) -> Self {
        StratifiedAlgebra {
            names: self.names.clone(),
            layers: self.layers.clone(),
            table: self.table.clone(),
            gram: self.gram.clone(),
            stratified: self.stratified,
            family: self.family.clone(),
            rumin: OnceLock::new(),
            group: OnceLock::new(),
        }
    }
}

impl PartialEq for StratifiedAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
            && self.layers == other.layers
            && self.table == other.table
            && self.gram == other.gram
    }
}

impl StratifiedAlgebra {
    /// Equality up to basis names.
    pub fn same_structure(&self, other: &Self) -> bool {
        self.layers == other.layers && self.table == other.table && self.gram == other.gram
    }
}

impl fmt::Debug for StratifiedAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StratifiedAlgebra")
            .field("names", &self.names)
            .field("layers", &self.layers)
            .field("family", &self.family)
            .finish()
    }
}

impl StratifiedAlgebra {
    /// Builds an algebra, rejecting anything that is not stratified.
    pub fn new(spec: AlgebraSpec) -> Result<Alg, AlgebraError> {
        let alg = Self::new_graded(spec)?;
        if !alg.stratified {
            let layer = alg.first_ungenerated_layer().unwrap_or(2);
            return Err(AlgebraError::NotGenerated { layer });
        }
        Ok(alg)
    }

    /// Builds a graded nilpotent algebra; failure of bracket generation is
    /// recorded in [`StratifiedAlgebra::is_stratified`] instead of rejected.
    pub fn new_graded(spec: AlgebraSpec) -> Result<Alg, AlgebraError> {
        let issues = Self::check(&spec);
        if let Some(e) = issues.into_iter().find(|e| !matches!(e, AlgebraError::NotGenerated { .. })) {
            return Err(e);
        }
        Ok(Arc::new(Self::assemble(spec)))
    }

    /// Every problem with the data, in document order.
    pub fn check(spec: &AlgebraSpec) -> Vec<AlgebraError> {
        let mut issues = Vec::new();
        let n = spec.layers.len();
        if n == 0 {
            issues.push(AlgebraError::Empty);
            return issues;
        }
        if spec.names.len() != n {
            issues.push(AlgebraError::Length { field: "basis", expected: n, found: spec.names.len() });
            return issues;
        }
        for (i, name) in spec.names.iter().enumerate() {
            if spec.names[..i].contains(name) {
                issues.push(AlgebraError::DuplicateName(name.clone()));
            }
        }
        for (i, &l) in spec.layers.iter().enumerate() {
            if l == 0 {
                issues.push(AlgebraError::LayerZero { index: i });
            } else if i > 0 && l < spec.layers[i - 1] {
                issues.push(AlgebraError::NotLayerMajor { index: i });
            }
        }
        if !issues.is_empty() {
            return issues;
        }
        let step = *spec.layers.iter().max().unwrap();
        for layer in 1..=step {
            if !spec.layers.contains(&layer) {
                issues.push(AlgebraError::EmptyLayer { layer });
            }
        }
        let mut seen = vec![false; n * n];
        let mut structural = false;
        for (e, b) in spec.brackets.iter().enumerate() {
            for idx in [b.j, b.k].into_iter().chain(b.coeffs.iter().map(|c| c.0)) {
                if idx >= n {
                    issues.push(AlgebraError::IndexOutOfRange { entry: e, index: idx });
                    structural = true;
                }
            }
            if structural {
                continue;
            }
            if b.j == b.k {
                issues.push(AlgebraError::SelfBracket { entry: e, j: b.j });
                structural = true;
                continue;
            }
            let (lo, hi) = (b.j.min(b.k), b.j.max(b.k));
            if seen[lo * n + hi] {
                issues.push(AlgebraError::DuplicateBracket { entry: e, j: lo, k: hi });
                structural = true;
            }
            seen[lo * n + hi] = true;
            for (i, c) in &b.coeffs {
                if !c.is_zero() && spec.layers[*i] != spec.layers[b.j] + spec.layers[b.k] {
                    issues.push(AlgebraError::NotGraded { entry: e, j: b.j, k: b.k, i: *i });
                }
            }
        }
        if let Some(g) = &spec.gram {
            if let Some(issue) = gram_issue(g, &spec.layers) {
                issues.push(AlgebraError::Gram(issue));
            }
        }
        if structural || !issues.is_empty() {
            return issues;
        }
        let table = build_table(n, &spec.brackets);
        if let Some((i, j, k)) = jacobi_failure(n, &table) {
            issues.push(AlgebraError::Jacobi { i, j, k });
        }
        if let Some(layer) = ungenerated_layer(&spec.layers, &table) {
            issues.push(AlgebraError::NotGenerated { layer });
        }
        issues
    }

    fn assemble(spec: AlgebraSpec) -> Self {
        let n = spec.layers.len();
        let table = build_table(n, &spec.brackets);
        let stratified = ungenerated_layer(&spec.layers, &table).is_none();
        StratifiedAlgebra {
            names: spec.names,
            layers: spec.layers,
            table,
            gram: spec.gram.unwrap_or_else(|| QMatrix::identity(n)),
            stratified,
            family: spec.family,
            rumin: OnceLock::new(),
            group: OnceLock::new(),
        }
    }

    pub fn spec(&self) -> AlgebraSpec {
        let n = self.dim();
        let mut brackets = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                let c = &self.table[j * n + k];
                if !c.is_empty() {
                    brackets.push(BracketEntry { j, k, coeffs: c.clone() });
                }
            }
        }
        let gram = (self.gram != QMatrix::identity(n)).then(|| self.gram.clone());
        AlgebraSpec {
            names: self.names.clone(),
            layers: self.layers.clone(),
            brackets,
            gram,
            family: self.family.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.layers.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn layer_of(&self, i: usize) -> usize {
        self.layers[i]
    }

    pub fn step(&self) -> usize {
        *self.layers.iter().max().unwrap_or(&0)
    }

    pub fn rank(&self) -> usize {
        self.layer_dim(1)
    }

    pub fn layer_dim(&self, k: usize) -> usize {
        self.layers.iter().filter(|&&l| l == k).count()
    }

    /// Indices of the basis vectors in layer `k`.
    pub fn layer_indices(&self, k: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.layers[i] == k).collect()
    }

    pub fn horizontal(&self) -> Vec<usize> {
        self.layer_indices(1)
    }

    pub fn homogeneous_dimension(&self) -> usize {
        self.layers.iter().sum()
    }

    pub fn gram(&self) -> &QMatrix {
        &self.gram
    }

    pub fn is_stratified(&self) -> bool {
        self.stratified
    }

    pub fn family(&self) -> Option<&Family> {
        self.family.as_ref()
    }

    pub fn with_family(&self, family: Option<Family>) -> Alg {
        let mut a = self.clone();
        a.family = family;
        Arc::new(a)
    }

    pub fn is_abelian(&self) -> bool {
        self.table.iter().all(|c| c.is_empty())
    }

    /// Lower-case coordinate names, unique within the algebra.
    pub fn coordinate_names(&self) -> Vec<String> {
        let lower: Vec<String> = self.names.iter().map(|s| s.to_lowercase()).collect();
        let unique = lower.iter().enumerate().all(|(i, s)| {
            !lower[..i].contains(s) && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        });
        if unique {
            lower
        } else {
            (0..self.dim()).map(|i| format!("x{i}")).collect()
        }
    }

    /// `[e_j, e_k]` as a sparse vector.
    pub fn bracket_basis(&self, j: usize, k: usize) -> &[(usize, Q)] {
        &self.table[j * self.dim() + k]
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Q {
        self.bracket_basis(j, k).iter().find(|c| c.0 == i).map(|c| c.1.clone()).unwrap_or_default()
    }

    pub fn bracket<S: Scalar>(&self, u: &[S], v: &[S]) -> Vec<S> {
        let n = self.dim();
        let mut out = vec![S::nil(); n];
        for j in 0..n {
            if u[j].is_nil() {
                continue;
            }
            for k in 0..n {
                if v[k].is_nil() || j == k {
                    continue;
                }
                let entries = &self.table[j * n + k];
                if entries.is_empty() {
                    continue;
                }
                let uv = u[j].mul(&v[k]);
                for (i, c) in entries {
                    out[*i] = out[*i].add(&uv.scale(c));
                }
            }
        }
        out
    }

    /// Matrix of `ad_x` acting on column vectors.
    pub fn ad<S: Scalar>(&self, x: &[S]) -> Vec<Vec<S>> {
        let n = self.dim();
        let mut m = vec![vec![S::nil(); n]; n];
        for k in 0..n {
            let mut e = vec![S::nil(); n];
            e[k] = S::unit();
            let col = self.bracket(x, &e);
            for i in 0..n {
                m[i][k] = col[i].clone();
            }
        }
        m
    }

    /// `delta_lambda` scales layer `k` by `lambda^k`.
    pub fn dilation(&self, lambda: &Q) -> GradedLinearMap {
        let d: Vec<Q> = self.layers.iter().map(|&l| num_traits::pow(lambda.clone(), l)).collect();
        GradedLinearMap { matrix: QMatrix::diagonal(&d) }
    }

    pub fn dilate<S: Scalar>(&self, lambda: &S, x: &[S]) -> Vec<S> {
        x.iter()
            .zip(&self.layers)
            .map(|(v, &l)| {
                let mut f = S::unit();
                for _ in 0..l {
                    f = f.mul(lambda);
                }
                v.mul(&f)
            })
            .collect()
    }

    fn first_ungenerated_layer(&self) -> Option<usize> {
        ungenerated_layer(&self.layers, &self.table)
    }

    pub fn rumin(&self) -> &RuminData {
        self.rumin.get_or_init(|| Arc::new(RuminData::build(self)))
    }

    pub fn group(&self) -> &GroupData {
        self.group.get_or_init(|| Arc::new(GroupData::build(self)))
    }

    /// Name of a whitelisted Lipschitz 1-connected model this algebra is
    /// recognised as, if any.
    pub fn lip1_connected_model(&self) -> Option<String> {
        if let Some(f) = &self.family {
            if family_whitelisted(f) {
                return Some(f.to_string());
            }
        }
        if self.is_abelian() {
            return Some(format!("R^{}", self.dim()));
        }
        if self.step() == 2 && self.layer_dim(2) == 1 {
            let h = self.horizontal();
            let z = self.layer_indices(2)[0];
            let form: Vec<Vec<Q>> = h
                .iter()
                .map(|&a| h.iter().map(|&b| self.structure_constant(z, a, b)).collect())
                .collect();
            let r = QMatrix::from_rows(&form).rank();
            let n = r / 2;
            if n >= 2 {
                let m = h.len() - r;
                return Some(if m == 0 { format!("H_{n}") } else { format!("H_{n} x R^{m}") });
            }
        }
        None
    }

    pub fn euclidean(n: usize) -> Alg {
        let names = if n == 2 {
            vec!["X".into(), "Y".into()]
        } else {
            (1..=n).map(|i| format!("E{i}")).collect()
        };
        Self::assemble_known(names, vec![1; n], vec![], Family::Euclidean { n })
    }

    pub fn heisenberg(n: usize) -> Alg {
        assert!(n >= 1);
        let mut names = Vec::new();
        if n == 1 {
            names.extend(["X".to_string(), "Y".to_string(), "Z".to_string()]);
        } else {
            names.extend((1..=n).map(|i| format!("X{i}")));
            names.extend((1..=n).map(|i| format!("Y{i}")));
            names.push("Z".into());
        }
        let mut layers = vec![1; 2 * n];
        layers.push(2);
        let brackets = (0..n).map(|i| BracketEntry::new(i, n + i, &[(2 * n, q_one())])).collect();
        Self::assemble_known(names, layers, brackets, Family::Heisenberg { n })
    }

    /// Filiform `f^s`: basis `X, Y, Z2..Zs` with `[X,Y]=Z2`, `[X,Zk]=Z(k+1)`.
    pub fn filiform(s: usize) -> Alg {
        assert!(s >= 1);
        let mut names = vec!["X".to_string(), "Y".to_string()];
        let mut layers = vec![1, 1];
        for k in 2..=s {
            names.push(format!("Z{k}"));
            layers.push(k);
        }
        let mut brackets = Vec::new();
        if s >= 2 {
            brackets.push(BracketEntry::new(0, 1, &[(2, q_one())]));
        }
        for k in 2..s {
            brackets.push(BracketEntry::new(0, k, &[(k + 1, q_one())]));
        }
        let family = if s == 1 { Family::Euclidean { n: 2 } } else { Family::Filiform { s } };
        Self::assemble_known(names, layers, brackets, family)
    }

    pub fn make_standard(family: &Family) -> Result<Alg, AlgebraError> {
        match family {
            Family::Euclidean { n } if *n >= 1 => Ok(Self::euclidean(*n)),
            Family::Heisenberg { n } if *n >= 1 => Ok(Self::heisenberg(*n)),
            Family::Filiform { s } if *s >= 1 => Ok(Self::filiform(*s)),
            Family::JetSpace { .. } => Err(AlgebraError::Unsupported(
                "jet spaces are recognised by tag only; supply the algebra explicitly".into(),
            )),
            Family::Product { factors } if !factors.is_empty() => {
                let mut acc = Self::make_standard(&factors[0])?;
                for f in &factors[1..] {
                    let g = Self::make_standard(f)?;
                    acc = Self::direct_product(&acc, &g);
                }
                Ok(acc)
            }
            other => Err(AlgebraError::UnknownFamily(format!("{other:?}"))),
        }
    }

    pub fn family_from_name(name: &str) -> Result<Family, AlgebraError> {
        let lower = name.to_ascii_lowercase();
        let (head, arg) = match lower.split_once(['(', ':']) {
            Some((h, rest)) => (h.to_string(), rest.trim_end_matches(')').to_string()),
            None => (lower.clone(), String::new()),
        };
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| AlgebraError::UnknownFamily(name.into()));
        match head.as_str() {
            "euclidean" | "r" => Ok(Family::Euclidean { n: num(&arg)? }),
            "heisenberg" | "h" => Ok(Family::Heisenberg { n: num(&arg)? }),
            "filiform" | "f" => Ok(Family::Filiform { s: num(&arg)? }),
            "jet" | "jet-space" => {
                let (k, n) = arg.split_once(',').ok_or_else(|| AlgebraError::UnknownFamily(name.into()))?;
                Ok(Family::JetSpace { k: num(k)?, n: num(n)? })
            }
            _ => Err(AlgebraError::UnknownFamily(name.into())),
        }
    }

    fn assemble_known(names: Vec<String>, layers: Vec<usize>, brackets: Vec<BracketEntry>, family: Family) -> Alg {
        let spec = AlgebraSpec { names, layers, brackets, gram: None, family: Some(family) };
        debug_assert!(Self::check(&spec).is_empty());
        Arc::new(Self::assemble(spec))
    }

    /// Direct sum, merged layer by layer (first factor first within a layer).
    pub fn direct_product(a: &StratifiedAlgebra, b: &StratifiedAlgebra) -> Alg {
        let step = a.step().max(b.step());
        let mut a_map = vec![0; a.dim()];
        let mut b_map = vec![0; b.dim()];
        let mut names = Vec::new();
        let mut layers = Vec::new();
        let clash = a.names.iter().any(|n| b.names.contains(n));
        for k in 1..=step {
            for i in a.layer_indices(k) {
                a_map[i] = names.len();
                names.push(if clash { format!("{}_1", a.names[i]) } else { a.names[i].clone() });
                layers.push(k);
            }
            for i in b.layer_indices(k) {
                b_map[i] = names.len();
                names.push(if clash { format!("{}_2", b.names[i]) } else { b.names[i].clone() });
                layers.push(k);
            }
        }
        let mut brackets = Vec::new();
        for (alg, map) in [(a, &a_map), (b, &b_map)] {
            for e in alg.spec().brackets {
                brackets.push(BracketEntry {
                    j: map[e.j],
                    k: map[e.k],
                    coeffs: e.coeffs.iter().map(|(i, c)| (map[*i], c.clone())).collect(),
                });
            }
        }
        let n = names.len();
        let mut gram = QMatrix::zeros(n, n);
        for (alg, map) in [(a, &a_map), (b, &b_map)] {
            for i in 0..alg.dim() {
                for j in 0..alg.dim() {
                    gram[(map[i], map[j])] = alg.gram[(i, j)].clone();
                }
            }
        }
        let family = match (&a.family, &b.family) {
            (Some(fa), Some(fb)) => {
                let mut factors = Vec::new();
                for f in [fa, fb] {
                    match f {
                        Family::Product { factors: inner } => factors.extend(inner.iter().cloned()),
                        other => factors.push(other.clone()),
                    }
                }
                Some(Family::Product { factors })
            }
            _ => None,
        };
        let gram = (gram != QMatrix::identity(n)).then_some(gram);
        let spec = AlgebraSpec { names, layers, brackets, gram, family };
        Arc::new(Self::assemble(spec))
    }
}

fn family_whitelisted(f: &Family) -> bool {
    match f {
        Family::Euclidean { .. } => true,
        Family::Heisenberg { n } => *n >= 2,
        Family::JetSpace { n, .. } => *n >= 2,
        Family::Filiform { .. } => false,
        Family::Product { factors } => factors.iter().all(family_whitelisted),
    }
}

fn gram_issue(g: &QMatrix, layers: &[usize]) -> Option<GramIssue> {
    let n = layers.len();
    if g.rows() != n || g.cols() != n {
        return Some(GramIssue::WrongShape);
    }
    if !g.is_symmetric() {
        return Some(GramIssue::NotSymmetric);
    }
    for i in 0..n {
        for j in 0..n {
            if layers[i] != layers[j] && !g[(i, j)].is_zero() {
                return Some(GramIssue::NotBlockDiagonal(layers[i], layers[j]));
            }
        }
    }
    if !g.is_positive_definite() {
        return Some(GramIssue::NotPositiveDefinite);
    }
    None
}

fn build_table(n: usize, brackets: &[BracketEntry]) -> Vec<Sparse> {
    let mut table = vec![Vec::new(); n * n];
    for b in brackets {
        let mut c: Sparse = b.coeffs.iter().filter(|(_, v)| !v.is_zero()).cloned().collect();
        c.sort_by_key(|e| e.0);
        let neg: Sparse = c.iter().map(|(i, v)| (*i, -v.clone())).collect();
        table[b.j * n + b.k] = c;
        table[b.k * n + b.j] = neg;
    }
    table
}

fn bracket_sparse(n: usize, table: &[Sparse], u: &[Q], v: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); n];
    for j in 0..n {
        if u[j].is_zero() {
            continue;
        }
        for k in 0..n {
            if v[k].is_zero() {
                continue;
            }
            for (i, c) in &table[j * n + k] {
                out[*i] += &u[j] * &v[k] * c;
            }
        }
    }
    out
}

fn unit(n: usize, i: usize) -> Vec<Q> {
    let mut e = vec![Q::zero(); n];
    e[i] = q(1);
    e
}

fn jacobi_failure(n: usize, table: &[Sparse]) -> Option<(usize, usize, usize)> {
    let as_vec = |s: &Sparse| {
        let mut v = vec![Q::zero(); n];
        for (i, c) in s {
            v[*i] = c.clone();
        }
        v
    };
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let t1 = bracket_sparse(n, table, &unit(n, i), &as_vec(&table[j * n + k]));
                let t2 = bracket_sparse(n, table, &unit(n, j), &as_vec(&table[k * n + i]));
                let t3 = bracket_sparse(n, table, &unit(n, k), &as_vec(&table[i * n + j]));
                if (0..n).any(|m| !(&t1[m] + &t2[m] + &t3[m]).is_zero()) {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

fn ungenerated_layer(layers: &[usize], table: &[Sparse]) -> Option<usize> {
    let n = layers.len();
    let step = *layers.iter().max()?;
    for layer in 2..=step {
        let mut rows = Vec::new();
        for a in (0..n).filter(|&a| layers[a] == 1) {
            for b in (0..n).filter(|&b| layers[b] == layer - 1) {
                let mut v = vec![Q::zero(); n];
                for (i, c) in &table[a * n + b] {
                    v[*i] = c.clone();
                }
                rows.push(v);
            }
        }
        let want = layers.iter().filter(|&&l| l == layer).count();
        let rank = if rows.is_empty() { 0 } else { QMatrix::from_rows(&rows).rank() };
        if rank != want {
            return Some(layer);
        }
    }
    None
}

/// Linear map between algebras, stored as a `target x source` matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedLinearMap {
    pub matrix: QMatrix,
}

impl GradedLinearMap {
    pub fn new(matrix: QMatrix) -> Self {
        GradedLinearMap { matrix }
    }

    pub fn identity(n: usize) -> Self {
        GradedLinearMap { matrix: QMatrix::identity(n) }
    }

    pub fn apply<S: Scalar>(&self, v: &[S]) -> Vec<S> {
        (0..self.matrix.rows())
            .map(|i| {
                let mut acc = S::nil();
                for (j, x) in v.iter().enumerate() {
                    let a = &self.matrix[(i, j)];
                    if !a.is_zero() && !x.is_nil() {
                        acc = acc.add(&x.scale(a));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn compose(&self, first: &GradedLinearMap) -> GradedLinearMap {
        GradedLinearMap { matrix: self.matrix.mul(&first.matrix) }
    }

    pub fn is_graded(&self, src: &StratifiedAlgebra, tgt: &StratifiedAlgebra) -> bool {
        (0..self.matrix.rows())
            .all(|i| (0..self.matrix.cols()).all(|j| self.matrix[(i, j)].is_zero() || tgt.layers[i] == src.layers[j]))
    }

    /// First basis pair on which `L[a,b] != [La, Lb]`.
    pub fn homomorphism_defect(&self, src: &StratifiedAlgebra, tgt: &StratifiedAlgebra) -> Option<(usize, usize)> {
        let n = src.dim();
        for a in 0..n {
            for b in a + 1..n {
                let lhs = self.apply(&src.bracket(&unit(n, a), &unit(n, b)));
                let rhs = tgt.bracket(&self.matrix.col(a), &self.matrix.col(b));
                if lhs != rhs {
                    return Some((a, b));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    #[test]
    fn standard_families_are_stratified() {
        for alg in [
            StratifiedAlgebra::euclidean(3),
            StratifiedAlgebra::heisenberg(1),
            StratifiedAlgebra::heisenberg(2),
            StratifiedAlgebra::filiform(1),
            StratifiedAlgebra::filiform(4),
        ] {
            assert!(StratifiedAlgebra::check(&alg.spec()).is_empty(), "{alg:?}");
            assert!(alg.is_stratified());
        }
    }

    #[test]
    fn heisenberg_invariants() {
        let h = StratifiedAlgebra::heisenberg(1);
        assert_eq!((h.dim(), h.step(), h.rank(), h.homogeneous_dimension()), (3, 2, 2, 4));
        assert_eq!(h.bracket_basis(0, 1), &[(2, q(1))]);
        assert_eq!(h.bracket_basis(1, 0), &[(2, q(-1))]);
    }

    #[test]
    fn filiform_homogeneous_dimension() {
        for s in 2..=6 {
            let f = StratifiedAlgebra::filiform(s);
            assert_eq!(f.homogeneous_dimension(), 2 + (2..=s).sum::<usize>());
        }
    }

    #[test]
    fn jacobi_violation_is_caught() {
        let spec = AlgebraSpec {
            names: vec!["A".into(), "B".into(), "C".into(), "D".into()],
            layers: vec![1, 1, 1, 2],
            brackets: vec![
                BracketEntry::new(0, 1, &[(3, q(1))]),
                BracketEntry::new(1, 2, &[(3, q(1))]),
            ],
            gram: None,
            family: None,
        };
        assert!(StratifiedAlgebra::new(spec.clone()).is_ok());
        let bad = AlgebraSpec {
            names: vec!["A".into(), "B".into(), "C".into()],
            layers: vec![1, 1, 2],
            brackets: vec![BracketEntry::new(0, 1, &[(2, q(1))]), BracketEntry::new(0, 2, &[(1, q(1))])],
            gram: None,
            family: None,
        };
        assert!(matches!(StratifiedAlgebra::new(bad), Err(AlgebraError::NotGraded { .. })));
    }

    #[test]
    fn non_generated_layer_is_flagged() {
        let spec = AlgebraSpec {
            names: vec!["X".into(), "Y".into(), "Z".into(), "W".into()],
            layers: vec![1, 1, 2, 2],
            brackets: vec![BracketEntry::new(0, 1, &[(2, q(1))])],
            gram: None,
            family: None,
        };
        assert!(matches!(StratifiedAlgebra::new(spec.clone()), Err(AlgebraError::NotGenerated { layer: 2 })));
        assert!(!StratifiedAlgebra::new_graded(spec).unwrap().is_stratified());
    }

    #[test]
    fn gram_must_respect_layers() {
        let mut spec = StratifiedAlgebra::heisenberg(1).spec();
        let mut g = QMatrix::identity(3);
        g[(0, 2)] = qf(1, 2);
        g[(2, 0)] = qf(1, 2);
        spec.gram = Some(g);
        assert!(matches!(
            StratifiedAlgebra::new(spec),
            Err(AlgebraError::Gram(GramIssue::NotBlockDiagonal(1, 2)))
        ));
    }

    #[test]
    fn dilation_is_a_homomorphism() {
        let f = StratifiedAlgebra::filiform(4);
        let d = f.dilation(&qf(3, 2));
        assert!(d.is_graded(&f, &f));
        assert!(d.homomorphism_defect(&f, &f).is_none());
    }

    #[test]
    fn product_layers_and_whitelist() {
        let p = StratifiedAlgebra::direct_product(&StratifiedAlgebra::heisenberg(1), &StratifiedAlgebra::euclidean(1));
        assert_eq!(p.layers(), &[1, 1, 1, 2]);
        assert!(p.is_stratified());
        assert!(p.lip1_connected_model().is_none());
        assert!(StratifiedAlgebra::heisenberg(2).lip1_connected_model().is_some());
        let untagged = StratifiedAlgebra::heisenberg(3).with_family(None);
        assert_eq!(untagged.lip1_connected_model().as_deref(), Some("H_3"));
        assert!(StratifiedAlgebra::filiform(3).lip1_connected_model().is_none());
    }

    #[test]
    fn jet_space_is_not_constructed() {
        let fam = StratifiedAlgebra::family_from_name("jet(2,3)").unwrap();
        assert!(matches!(StratifiedAlgebra::make_standard(&fam), Err(AlgebraError::Unsupported(_))));
        assert!(StratifiedAlgebra::make_standard(&StratifiedAlgebra::family_from_name("filiform(3)").unwrap()).is_ok());
    }
}
