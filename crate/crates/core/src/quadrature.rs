//! Gauss-Legendre quadrature (fixed order 4, composite and adaptive) and
//! Chebyshev collocation on `[0, 1]`.

use serde::Serialize;

const GL4_X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
const GL4_W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];

fn axpy(acc: &mut Vec<f64>, w: f64, v: &[f64]) {
    if acc.is_empty() {
        acc.resize(v.len(), 0.0);
    }
    for (a, x) in acc.iter_mut().zip(v) {
        *a += w * x;
    }
}

/// One Gauss-Legendre panel of order 4 for a vector-valued integrand.
pub fn gl4(f: &mut dyn FnMut(f64) -> Vec<f64>, a: f64, b: f64) -> Vec<f64> {
    let (m, r) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut acc = Vec::new();
    for (x, w) in GL4_X.iter().zip(GL4_W) {
        axpy(&mut acc, w * r, &f(m + r * x));
    }
    acc
}

/// Composite rule on `panels` equal panels.
pub fn composite_gl4(f: &mut dyn FnMut(f64) -> Vec<f64>, a: f64, b: f64, panels: usize) -> Vec<f64> {
    let h = (b - a) / panels as f64;
    let mut acc = Vec::new();
    for k in 0..panels {
        let part = gl4(f, a + k as f64 * h, a + (k + 1) as f64 * h);
        axpy(&mut acc, 1.0, &part);
    }
    acc
}

/// Nodes and weights of the composite rule.
pub fn composite_gl4_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(4 * panels);
    for k in 0..panels {
        let m = a + (k as f64 + 0.5) * h;
        for (x, w) in GL4_X.iter().zip(GL4_W) {
            out.push((m + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadReport {
    pub value: Vec<f64>,
    /// Sum of the local panel-versus-halves differences.
    pub error: f64,
    pub panels: usize,
    pub min_step: f64,
    pub evaluations: usize,
}

const MAX_DEPTH: u32 = 40;

/// Adaptive subdivision until a panel agrees with its two halves to
/// `tol` per unit length.
pub fn adaptive_gl4(f: &mut dyn FnMut(f64) -> Vec<f64>, a: f64, b: f64, tol: f64) -> QuadReport {
    let mut report = QuadReport { value: Vec::new(), error: 0.0, panels: 0, min_step: (b - a).abs(), evaluations: 0 };
    if a == b {
        return report;
    }
    let whole = gl4(f, a, b);
    report.evaluations += 4;
    recurse(f, a, b, whole, tol, 0, &mut report);
    report
}

fn recurse(f: &mut dyn FnMut(f64) -> Vec<f64>, a: f64, b: f64, whole: Vec<f64>, tol: f64, depth: u32, rep: &mut QuadReport) {
    let m = (a + b) / 2.0;
    let left = gl4(f, a, m);
    let right = gl4(f, m, b);
    rep.evaluations += 8;
    let mut halves = left.clone();
    axpy(&mut halves, 1.0, &right);
    let diff = whole.iter().zip(&halves).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if diff <= tol * (b - a).abs() || depth >= MAX_DEPTH {
        axpy(&mut rep.value, 1.0, &halves);
        rep.error += diff;
        rep.panels += 2;
        rep.min_step = rep.min_step.min((m - a).abs());
        return;
    }
    recurse(f, a, m, left, tol, depth + 1, rep);
    recurse(f, m, b, right, tol, depth + 1, rep);
}

/// Chebyshev points of the second kind on `[0, 1]` with the barycentric
/// differentiation and cumulative integration matrices.
#[derive(Clone, Debug)]
pub struct Collocation {
    pub nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `diff[i][j] = l_j'(t_i)`.
    pub diff: Vec<Vec<f64>>,
    /// `integ[i][j] = int_0^{t_i} l_j`.
    pub integ: Vec<Vec<f64>>,
}

impl Collocation {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 2);
        let n = degree;
        let nodes: Vec<f64> = (0..=n).map(|j| (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()) / 2.0).collect();
        let weights: Vec<f64> = (0..=n)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == n {
                    s / 2.0
                } else {
                    s
                }
            })
            .collect();
        let mut diff = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..=n {
            let mut sum = 0.0;
            for j in 0..=n {
                if i != j {
                    diff[i][j] = weights[j] / weights[i] / (nodes[i] - nodes[j]);
                    sum += diff[i][j];
                }
            }
            diff[i][i] = -sum;
        }
        let mut c = Collocation { nodes, weights, diff, integ: vec![] };
        let integ = (0..=n)
            .map(|i| {
                let ti = c.nodes[i];
                if ti == 0.0 {
                    return vec![0.0; n + 1];
                }
                composite_gl4(&mut |t| c.basis(t), 0.0, ti, 4 * n)
            })
            .collect();
        c.integ = integ;
        c
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// All Lagrange basis polynomials at `t`.
    pub fn basis(&self, t: f64) -> Vec<f64> {
        if let Some(j) = self.nodes.iter().position(|&x| x == t) {
            let mut e = vec![0.0; self.len()];
            e[j] = 1.0;
            return e;
        }
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(x, w)| w / (t - x)).collect();
        let total: f64 = terms.iter().sum();
        terms.iter().map(|x| x / total).collect()
    }

    /// Differentiates sampled vectors `values[j]` at the nodes.
    pub fn derivative(&self, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
        apply(&self.diff, values)
    }

    /// Cumulative integrals from `0` to each node.
    pub fn cumulative(&self, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
        apply(&self.integ, values)
    }
}

fn apply(m: &[Vec<f64>], values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let width = values.first().map_or(0, Vec::len);
    m.iter()
        .map(|row| {
            let mut acc = vec![0.0; width];
            for (w, v) in row.iter().zip(values) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += w * x;
                }
            }
            acc
        })
        .collect()
}
