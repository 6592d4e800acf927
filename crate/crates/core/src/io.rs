//! Canonical JSON documents for algebras, forms, extensions, maps and curves.
//!
//! Keys are emitted sorted, rationals as `"p/q"` strings and expressions as
//! prefix s-expressions over the coordinate names. Errors carry a JSON
//! pointer to the offending value.

use crate::algebra::{Alg, AlgebraSpec, BracketEntry, Family, StratifiedAlgebra};
use crate::expr::{func_to_string, parse_func};
use crate::extensions::{CentralExtension, GradedSpace};
use crate::field_forms::FieldForm;
use crate::forms::AlgebraForm;
use crate::func::Func;
use crate::linalg::QMatrix;
use crate::maps::GroupMap;
use crate::path_lift::{Polyline, SymbolicCurve};
use crate::rational::{fmt_q, parse_q, Q};
use crate::sampling::Domain;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum IoError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{pointer}: {message}")]
    Invalid { pointer: String, message: String },
}

impl IoError {
    pub fn pointer(&self) -> &str {
        match self {
            IoError::Syntax { .. } => "",
            IoError::Schema { pointer, .. } | IoError::Invalid { pointer, .. } => pointer,
        }
    }

    /// `2` for unreadable input, `1` for well-formed input that fails validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Invalid { .. } => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = match self {
            IoError::Syntax { .. } => "syntax",
            IoError::Schema { .. } => "schema",
            IoError::Invalid { .. } => "invalid",
        };
        json!({"error": kind, "pointer": self.pointer(), "message": self.to_string()})
    }
}

pub fn parse_json(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Syntax { line: e.line(), column: e.column(), message: e.to_string() })
}

/// Rebuilds a value with keys inserted in sorted order.
pub fn canonicalize(v: &Value) -> Value {
    match v {
        Value::Object(m) => {
            let sorted: BTreeMap<&String, Value> = m.iter().map(|(k, x)| (k, canonicalize(x))).collect();
            let mut out = Map::new();
            for (k, x) in sorted {
                out.insert(k.clone(), x);
            }
            Value::Object(out)
        }
        Value::Array(xs) => Value::Array(xs.iter().map(canonicalize).collect()),
        other => other.clone(),
    }
}

pub fn to_canonical_string(v: &Value) -> String {
    serde_json::to_string(&canonicalize(v)).expect("values serialize")
}

pub fn to_pretty_string(v: &Value) -> String {
    serde_json::to_string_pretty(&canonicalize(v)).expect("values serialize")
}

fn escape(token: &str) -> String {
    token.replace('~', "~0").replace('/', "~1")
}

/// A borrowed value together with its JSON pointer.
pub struct Node<'a> {
    value: &'a Value,
    ptr: String,
}

impl<'a> Node<'a> {
    pub fn root(value: &'a Value) -> Self {
        Node { value, ptr: String::new() }
    }

    pub fn value(&self) -> &'a Value {
        self.value
    }

    pub fn pointer(&self) -> &str {
        &self.ptr
    }

    fn schema(&self, message: impl Into<String>) -> IoError {
        IoError::Schema { pointer: self.ptr.clone(), message: message.into() }
    }

    fn invalid(&self, message: impl Into<String>) -> IoError {
        IoError::Invalid { pointer: self.ptr.clone(), message: message.into() }
    }

    pub fn get(&self, key: &str) -> Option<Node<'a>> {
        self.value.as_object()?.get(key).filter(|v| !v.is_null()).map(|value| Node { value, ptr: format!("{}/{}", self.ptr, escape(key)) })
    }

    pub fn field(&self, key: &str) -> Result<Node<'a>, IoError> {
        if !self.value.is_object() {
            return Err(self.schema("expected an object"));
        }
        self.get(key).ok_or_else(|| self.schema(format!("missing field {key:?}")))
    }

    pub fn items(&self) -> Result<Vec<Node<'a>>, IoError> {
        let xs = self.value.as_array().ok_or_else(|| self.schema("expected an array"))?;
        Ok(xs.iter().enumerate().map(|(i, value)| Node { value, ptr: format!("{}/{i}", self.ptr) }).collect())
    }

    pub fn entries(&self) -> Result<Vec<(String, Node<'a>)>, IoError> {
        let m = self.value.as_object().ok_or_else(|| self.schema("expected an object"))?;
        Ok(m.iter().map(|(k, value)| (k.clone(), Node { value, ptr: format!("{}/{}", self.ptr, escape(k)) })).collect())
    }

    pub fn str(&self) -> Result<&'a str, IoError> {
        self.value.as_str().ok_or_else(|| self.schema("expected a string"))
    }

    pub fn usize(&self) -> Result<usize, IoError> {
        self.value.as_u64().map(|x| x as usize).ok_or_else(|| self.schema("expected a non-negative integer"))
    }

    pub fn f64(&self) -> Result<f64, IoError> {
        self.value.as_f64().ok_or_else(|| self.schema("expected a number"))
    }

    pub fn bool(&self) -> Result<bool, IoError> {
        self.value.as_bool().ok_or_else(|| self.schema("expected a boolean"))
    }

    /// A rational given as `"p/q"`, a decimal string, or an integer.
    pub fn rational(&self) -> Result<Q, IoError> {
        match self.value {
            Value::String(s) => parse_q(s).ok_or_else(|| self.schema(format!("{s:?} is not a rational"))),
            Value::Number(n) if n.is_i64() => Ok(Q::from_integer(n.as_i64().expect("checked").into())),
            _ => Err(self.schema("expected a rational string \"p/q\"")),
        }
    }

    pub fn strings(&self) -> Result<Vec<String>, IoError> {
        self.items()?.iter().map(|n| n.str().map(str::to_string)).collect()
    }

    pub fn usizes(&self) -> Result<Vec<usize>, IoError> {
        self.items()?.iter().map(Node::usize).collect()
    }

    pub fn f64s(&self) -> Result<Vec<f64>, IoError> {
        self.items()?.iter().map(Node::f64).collect()
    }

    fn matrix(&self) -> Result<QMatrix, IoError> {
        let rows: Vec<Vec<Q>> = self.items()?.iter().map(|r| r.items()?.iter().map(Node::rational).collect()).collect::<Result<_, _>>()?;
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(self.schema("rows have different lengths"));
        }
        Ok(if rows.is_empty() { QMatrix::zeros(0, 0) } else { QMatrix::from_rows(&rows) })
    }

    fn expect_kind(&self, kind: &str) -> Result<(), IoError> {
        match self.get("kind") {
            None => Ok(()),
            Some(k) if k.str()? == kind => Ok(()),
            Some(k) => Err(k.schema(format!("expected kind {kind:?}"))),
        }
    }
}

pub fn matrix_json(m: &QMatrix) -> Value {
    Value::Array((0..m.rows()).map(|r| Value::Array((0..m.cols()).map(|c| Value::String(fmt_q(&m[(r, c)]))).collect())).collect())
}

// ---------------------------------------------------------------- algebras

pub fn algebra_to_json(alg: &StratifiedAlgebra) -> Value {
    let n = alg.dim();
    let mut brackets = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            let b = alg.bracket_basis(j, k);
            if b.is_empty() {
                continue;
            }
            let coeffs: Map<String, Value> = b.iter().map(|(i, c)| (i.to_string(), Value::String(fmt_q(c)))).collect();
            brackets.push(json!({"j": j, "k": k, "coeffs": coeffs}));
        }
    }
    let mut doc = json!({
        "kind": "algebra",
        "dim": n,
        "basis": alg.names(),
        "layers": alg.layers(),
        "brackets": brackets,
        "gram": matrix_json(alg.gram()),
    });
    if let Some(f) = alg.family() {
        doc["family"] = serde_json::to_value(f).expect("family serializes");
    }
    doc
}

/// Reads either explicit data or `{"standard": {"family": ..}}`.
pub fn algebra_from_json(node: &Node) -> Result<Alg, IoError> {
    node.expect_kind("algebra")?;
    if let Some(std) = node.get("standard") {
        let fam: Family = serde_json::from_value(std.value().clone()).map_err(|e| std.schema(e.to_string()))?;
        return StratifiedAlgebra::make_standard(&fam).map_err(|e| std.invalid(e.to_string()));
    }
    let names = node.field("basis")?.strings()?;
    let layers = node.field("layers")?.usizes()?;
    if let Some(d) = node.get("dim") {
        if d.usize()? != names.len() {
            return Err(d.invalid(format!("dim is {} but the basis has {} names", d.usize()?, names.len())));
        }
    }
    let mut brackets = Vec::new();
    if let Some(bs) = node.get("brackets") {
        for b in bs.items()? {
            let j = b.field("j")?.usize()?;
            let k = b.field("k")?.usize()?;
            let mut coeffs = Vec::new();
            for (key, c) in b.field("coeffs")?.entries()? {
                let i: usize = key.parse().map_err(|_| c.schema(format!("{key:?} is not a basis index")))?;
                coeffs.push((i, c.rational()?));
            }
            coeffs.sort_by_key(|(i, _)| *i);
            brackets.push(BracketEntry { j, k, coeffs });
        }
    }
    let gram = node.get("gram").map(|g| g.matrix()).transpose()?;
    let family = match node.get("family") {
        Some(f) => Some(serde_json::from_value(f.value().clone()).map_err(|e| f.schema(e.to_string()))?),
        None => None,
    };
    let spec = AlgebraSpec { names, layers, brackets, gram, family };
    StratifiedAlgebra::new(spec).map_err(|e| IoError::Invalid { pointer: format!("{}{}", node.pointer(), e.pointer()), message: e.to_string() })
}

// ---------------------------------------------------------------- forms

pub fn algebra_form_to_json(w: &AlgebraForm, values: &[String]) -> Value {
    let terms: Vec<Value> = w.terms().into_iter().map(|(idx, v, c)| json!({"indices": idx, "v": v, "c": fmt_q(&c)})).collect();
    json!({"kind": "algebra-form", "degree": w.degree(), "values": values, "terms": terms})
}

fn value_names(node: &Node, default: usize) -> Result<Vec<String>, IoError> {
    match node.get("values") {
        Some(v) => v.strings(),
        None => Ok((0..default).map(|i| format!("v{}", i + 1)).collect()),
    }
}

type RawTerm<'a> = (Vec<usize>, usize, Node<'a>);

fn raw_terms<'a>(node: &Node<'a>, alg: &Alg, degree: usize, vdim: usize) -> Result<Vec<RawTerm<'a>>, IoError> {
    let mut out = Vec::new();
    let Some(ts) = node.get("terms") else { return Ok(out) };
    for t in ts.items()? {
        let idx_node = t.field("indices")?;
        let idx = idx_node.usizes()?;
        if idx.len() != degree {
            return Err(idx_node.invalid(format!("expected {degree} indices")));
        }
        if let Some(bad) = idx.iter().find(|&&i| i >= alg.dim()) {
            return Err(idx_node.invalid(format!("index {bad} outside the basis")));
        }
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != idx.len() {
            return Err(idx_node.invalid("repeated index"));
        }
        let v = match t.get("v") {
            Some(n) => n.usize()?,
            None => 0,
        };
        if v >= vdim {
            return Err(t.field("v")?.invalid(format!("value index {v} outside the values")));
        }
        out.push((idx, v, t.field("c")?));
    }
    Ok(out)
}

/// Reads a constant-coefficient form; `alg` overrides an embedded `"algebra"`.
pub fn algebra_form_from_json(node: &Node, alg: Option<&Alg>) -> Result<(AlgebraForm, Vec<String>), IoError> {
    node.expect_kind("algebra-form")?;
    let alg = match (alg, node.get("algebra")) {
        (Some(a), _) => a.clone(),
        (None, Some(a)) => algebra_from_json(&a)?,
        (None, None) => return Err(node.schema("missing field \"algebra\"")),
    };
    let degree = node.field("degree")?.usize()?;
    if degree > alg.dim() {
        return Err(node.field("degree")?.invalid("degree exceeds the dimension"));
    }
    let values = value_names(node, 1)?;
    let mut terms = Vec::new();
    for (idx, v, c) in raw_terms(node, &alg, degree, values.len())? {
        terms.push((idx, v, c.rational()?));
    }
    let w = AlgebraForm::from_terms(&alg, degree, values.len(), &terms).map_err(|e| node.invalid(e.to_string()))?;
    Ok((w, values))
}

/// Field forms list coefficients in the left-invariant coframe.
pub fn field_form_to_json(w: &FieldForm, values: &[String]) -> Value {
    let alg = w.algebra();
    let vars = alg.coordinate_names();
    let basis = alg.rumin().index.basis(w.degree());
    let mut terms = Vec::new();
    for (v, cs) in w.coeffs().iter().enumerate() {
        for (i, c) in cs.iter().enumerate() {
            if !c.is_zero() {
                terms.push(json!({"indices": basis[i], "v": v, "c": func_to_string(c, &vars)}));
            }
        }
    }
    json!({"kind": "field-form", "frame": "left-invariant", "degree": w.degree(), "values": values, "terms": terms, "algebra": algebra_to_json(alg)})
}

pub fn field_form_from_json(node: &Node, alg: Option<&Alg>) -> Result<(FieldForm, Vec<String>), IoError> {
    node.expect_kind("field-form")?;
    let alg = match (alg, node.get("algebra")) {
        (Some(a), _) => a.clone(),
        (None, Some(a)) => algebra_from_json(&a)?,
        (None, None) => return Err(node.schema("missing field \"algebra\"")),
    };
    let degree = node.field("degree")?.usize()?;
    if degree > alg.dim() {
        return Err(node.field("degree")?.invalid("degree exceeds the dimension"));
    }
    let values = value_names(node, 1)?;
    let vars = alg.coordinate_names();
    let mut w = FieldForm::zero(&alg, degree, values.len());
    for (idx, v, c) in raw_terms(node, &alg, degree, values.len())? {
        let f = parse_func(c.str()?, &vars).map_err(|e| c.schema(e.to_string()))?;
        let mut coeffs = vec![vec![Func::zero(); alg.rumin().dim(degree)]; values.len()];
        let (sign, set) = crate::exterior::sort_with_sign(&idx).expect("distinct indices");
        coeffs[v][alg.rumin().index.index_of(&set)] = if sign < 0 { f.neg() } else { f };
        w = w.add(&FieldForm::from_coeffs(&alg, degree, coeffs));
    }
    Ok((w, values))
}

// ---------------------------------------------------------------- extensions

pub fn extension_to_json(ext: &CentralExtension) -> Value {
    let vals = ext.values();
    json!({
        "kind": "extension",
        "base": algebra_to_json(ext.base()),
        "values": {"basis": vals.names, "layers": vals.layers, "gram": matrix_json(&vals.gram)},
        "cocycle": algebra_form_to_json(ext.rho(), &vals.names),
        "total": algebra_to_json(ext.total()),
        "report": serde_json::to_value(ext.report()).expect("report serializes"),
    })
}

pub fn extension_from_json(node: &Node) -> Result<CentralExtension, IoError> {
    node.expect_kind("extension")?;
    let base = algebra_from_json(&node.field("base")?)?;
    let vnode = node.field("values")?;
    let names = vnode.field("basis")?.strings()?;
    let layers = vnode.field("layers")?.usizes()?;
    if layers.len() != names.len() {
        return Err(vnode.field("layers")?.invalid("one layer per value basis vector"));
    }
    let mut space = GradedSpace::new(names.clone(), layers);
    if let Some(g) = vnode.get("gram") {
        let m = g.matrix()?;
        if m.rows() != names.len() || m.cols() != names.len() || !m.is_symmetric() || (m.rows() > 0 && !m.is_positive_definite()) {
            return Err(g.invalid("gram must be a symmetric positive definite square matrix"));
        }
        space.gram = m;
    }
    let cnode = node.field("cocycle")?;
    let (rho, _) = algebra_form_from_json(&cnode, Some(&base))?;
    if rho.degree() != 2 || rho.vdim() != names.len() {
        return Err(cnode.invalid("cocycle must be a 2-form with values in the given space"));
    }
    CentralExtension::extend(&base, space, rho).map_err(|e| cnode.invalid(e.to_string()))
}

// ---------------------------------------------------------------- maps

pub fn map_to_json(f: &GroupMap) -> Value {
    let vars = f.source().coordinate_names();
    json!({
        "kind": "map",
        "name": f.name,
        "source": algebra_to_json(f.source()),
        "target": algebra_to_json(f.target()),
        "components": f.components().iter().map(|c| func_to_string(c, &vars)).collect::<Vec<_>>(),
        "domain": serde_json::to_value(&f.domain).expect("domain serializes"),
        "simply_connected": f.simply_connected,
        "excluded": f.excluded,
    })
}

pub fn map_from_json(node: &Node) -> Result<GroupMap, IoError> {
    node.expect_kind("map")?;
    let source = algebra_from_json(&node.field("source")?)?;
    let target = algebra_from_json(&node.field("target")?)?;
    let vars = source.coordinate_names();
    let cnode = node.field("components")?;
    let comps: Vec<Func> =
        cnode.items()?.iter().map(|c| parse_func(c.str()?, &vars).map_err(|e| c.schema(e.to_string()))).collect::<Result<_, _>>()?;
    let domain = match node.get("domain") {
        Some(d) => serde_json::from_value::<Domain>(d.value().clone()).map_err(|e| d.schema(e.to_string()))?,
        None => Domain::cube(source.dim(), 1.0),
    };
    let mut f = GroupMap::new(&source, &target, comps, domain).map_err(|e| cnode.invalid(e.to_string()))?;
    if let Some(n) = node.get("name") {
        f.name = n.str()?.to_string();
    }
    let sc = match node.get("simply_connected") {
        Some(b) => b.bool()?,
        None => true,
    };
    let excluded = match node.get("excluded") {
        Some(e) => Some(e.str()?.to_string()),
        None => None,
    };
    Ok(f.with_topology(sc, excluded.as_deref()))
}

// ---------------------------------------------------------------- curves

pub enum CurveDoc {
    Polyline(Polyline, Vec<Vec<f64>>),
    Expression(SymbolicCurve),
}

impl CurveDoc {
    pub fn curve(&self) -> &dyn crate::path_lift::Curve {
        match self {
            CurveDoc::Polyline(p, _) => p,
            CurveDoc::Expression(c) => c,
        }
    }
}

pub fn curve_from_json(node: &Node, alg: &Alg) -> Result<CurveDoc, IoError> {
    node.expect_kind("curve")?;
    let tnode = node.field("type")?;
    match tnode.str()? {
        "polyline" => {
            let vnode = node.field("vertices")?;
            let mut vertices = Vec::new();
            for v in vnode.items()? {
                let p = v.f64s()?;
                if p.len() != alg.dim() {
                    return Err(v.invalid(format!("expected {} coordinates", alg.dim())));
                }
                vertices.push(p);
            }
            let poly = Polyline::new(alg, vertices.clone()).map_err(|e| vnode.invalid(e.to_string()))?;
            Ok(CurveDoc::Polyline(poly, vertices))
        }
        "expression" => {
            let cnode = node.field("components")?;
            let vars = vec!["t".to_string()];
            let comps: Vec<Func> =
                cnode.items()?.iter().map(|c| parse_func(c.str()?, &vars).map_err(|e| c.schema(e.to_string()))).collect::<Result<_, _>>()?;
            if comps.len() != alg.dim() {
                return Err(cnode.invalid(format!("expected {} components", alg.dim())));
            }
            Ok(CurveDoc::Expression(SymbolicCurve::new(comps)))
        }
        other => Err(tnode.schema(format!("unknown curve type {other:?}"))),
    }
}

pub fn curve_to_json(doc: &CurveDoc) -> Value {
    match doc {
        CurveDoc::Polyline(_, v) => json!({"kind": "curve", "type": "polyline", "vertices": v}),
        CurveDoc::Expression(c) => {
            let vars = vec!["t".to_string()];
            json!({"kind": "curve", "type": "expression", "components": c.components.iter().map(|f| func_to_string(f, &vars)).collect::<Vec<_>>()})
        }
    }
}

/// Loads and re-emits a document of any known kind.
pub fn revalidate(value: &Value) -> Result<Value, IoError> {
    let root = Node::root(value);
    let kind = root.field("kind")?;
    match kind.str()? {
        "algebra" => Ok(algebra_to_json(&*algebra_from_json(&root)?)),
        "algebra-form" => {
            let (w, names) = algebra_form_from_json(&root, None)?;
            let mut out = algebra_form_to_json(&w, &names);
            out["algebra"] = algebra_to_json(w.algebra());
            Ok(out)
        }
        "field-form" => {
            let (w, names) = field_form_from_json(&root, None)?;
            Ok(field_form_to_json(&w, &names))
        }
        "extension" => Ok(extension_to_json(&extension_from_json(&root)?)),
        "map" => Ok(map_to_json(&map_from_json(&root)?)),
        "curve" => {
            let anode = root.field("algebra")?;
            let alg = algebra_from_json(&anode)?;
            let mut out = curve_to_json(&curve_from_json(&root, &alg)?);
            out["algebra"] = algebra_to_json(&alg);
            Ok(out)
        }
        "bundle" => {
            let mut out = Map::new();
            for (k, v) in root.field("items")?.entries()? {
                let again = revalidate(v.value()).map_err(|e| match e {
                    IoError::Schema { pointer, message } => IoError::Schema { pointer: format!("{}{pointer}", v.pointer()), message },
                    IoError::Invalid { pointer, message } => IoError::Invalid { pointer: format!("{}{pointer}", v.pointer()), message },
                    other => other,
                })?;
                out.insert(k, again);
            }
            Ok(json!({"kind": "bundle", "items": out}))
        }
        other => Err(kind.schema(format!("unknown kind {other:?}"))),
    }
}
