//! `carnot-lift`: command-line front end for carnot-core.

use carnot_core::extensions::{filiform_extension, heisenberg_extension};
use carnot_core::fixtures::{filiform_linear_map, lift_fixtures, trivial_extension, winding_lift, winding_map};
use carnot_core::forms;
use carnot_core::io::{self, IoError, Node};
use carnot_core::lift::{check_lift, LiftError};
use carnot_core::path_lift::{lift_horizontal_curve, PathError, PathOptions, SymbolicCurve};
use carnot_core::{Alg, CentralExtension, Family, Func, GradedSpace, GroupMap, Sampler, StratifiedAlgebra};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "carnot-lift", version, about = "Rumin complexes, central extensions and contact lifts on Carnot groups")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Numeric tolerance for sampled identities and quadrature.
    #[arg(long, global = true, env = "CARNOT_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Seed of the point sampler.
    #[arg(long, global = true, env = "CARNOT_SEED", default_value_t = 0x5eed_ca27)]
    seed: u64,
    /// Number of sample points.
    #[arg(long, global = true, env = "CARNOT_SAMPLES", default_value_t = 32)]
    samples: usize,
    /// Canonical single-line JSON output.
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON output.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and re-validate documents of any kind.
    Validate {
        #[arg(long)]
        input: Vec<PathBuf>,
        paths: Vec<PathBuf>,
    },
    /// List the E0 basis of an algebra, with weights.
    RuminBasis {
        /// An algebra, or an extension whose total algebra is used.
        #[arg(long, required_unless_present = "standard")]
        input: Option<PathBuf>,
        /// `heisenberg:N`, `filiform:S` or `euclidean:N`.
        #[arg(long, conflicts_with = "input")]
        standard: Option<String>,
        /// Only this degree.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Build a central extension from a cocycle document.
    Extend {
        /// An `algebra-form` document of degree two with an embedded algebra.
        #[arg(long)]
        input: PathBuf,
        /// Layers of the value basis; defaults to the weights of the components.
        #[arg(long, value_delimiter = ',')]
        layers: Vec<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Decide liftability of a contact map through two extensions.
    CheckLift {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        ext1: PathBuf,
        #[arg(long)]
        ext2: PathBuf,
    },
    /// Pansu pullback of a left-invariant form.
    PansuPullback {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Horizontal lift of a curve in the base of an extension.
    PathLift {
        #[arg(long)]
        ext: PathBuf,
        #[arg(long)]
        curve: PathBuf,
        /// Starting point in the total group, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        basepoint: Vec<f64>,
        /// Number of output intervals.
        #[arg(long, default_value_t = 64)]
        outputs: usize,
        /// Also write the trajectory as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Materialize a built-in fixture set.
    Fixtures {
        /// `filiform-tower`, `heisenberg`, `winding`, `lift-problems` or `all`.
        name: String,
        /// Write one file per item here instead of printing a bundle.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    /// Unreadable or malformed input; exit 2.
    Input(Value),
    /// Well-formed input that fails validation; exit 1.
    Invalid(Value),
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure::Input(json!({"error": "input", "pointer": "", "message": msg.into()}))
    }

    fn invalid(msg: impl Into<String>) -> Self {
        Failure::Invalid(json!({"error": "invalid", "pointer": "", "message": msg.into()}))
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        if e.exit_code() == 1 {
            Failure::Invalid(e.to_json())
        } else {
            Failure::Input(e.to_json())
        }
    }
}

impl From<LiftError> for Failure {
    fn from(e: LiftError) -> Self {
        Failure::invalid(e.to_string())
    }
}

impl From<PathError> for Failure {
    fn from(e: PathError) -> Self {
        match e {
            PathError::Domain(_) | PathError::BasepointMismatch { .. } => Failure::input(e.to_string()),
            other => Failure::invalid(other.to_string()),
        }
    }
}

/// A report: its JSON form plus a short human summary.
struct Report {
    value: Value,
    summary: String,
}

fn read_doc(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    io::parse_json(&text).map_err(Failure::from)
}

fn with_file<T>(path: &Path, f: impl FnOnce(&Node) -> Result<T, IoError>) -> Result<T, Failure> {
    let doc = read_doc(path)?;
    f(&Node::root(&doc)).map_err(|e| {
        let mut v = e.to_json();
        v["file"] = json!(path.display().to_string());
        if e.exit_code() == 1 {
            Failure::Invalid(v)
        } else {
            Failure::Input(v)
        }
    })
}

fn provenance(g: &Global) -> Value {
    json!({"seed": g.seed, "samples": g.samples, "tol": g.tol})
}

fn sampler_for(map: &GroupMap, g: &Global) -> Sampler {
    map.sampler().with_seed(g.seed).with_count(g.samples).with_tol(g.tol)
}

fn parse_standard(s: &str) -> Result<Alg, Failure> {
    let (name, n) = s.split_once(':').ok_or_else(|| Failure::input(format!("expected FAMILY:N, found {s:?}")))?;
    let n: usize = n.parse().map_err(|_| Failure::input(format!("{n:?} is not a dimension")))?;
    let fam = match name {
        "heisenberg" => Family::Heisenberg { n },
        "filiform" => Family::Filiform { s: n },
        "euclidean" => Family::Euclidean { n },
        other => return Err(Failure::input(format!("unknown family {other:?}"))),
    };
    StratifiedAlgebra::make_standard(&fam).map_err(|e| Failure::invalid(e.to_string()))
}

// ---------------------------------------------------------------- commands

fn cmd_validate(paths: &[PathBuf]) -> (Report, Option<Failure>) {
    let mut items = Vec::new();
    let mut summary = String::new();
    let mut worst: Option<Failure> = None;
    for p in paths {
        let outcome = read_doc(p).and_then(|doc| {
            let again = io::revalidate(&doc).map_err(Failure::from)?;
            Ok(again["kind"].as_str().unwrap_or("").to_string())
        });
        match outcome {
            Ok(kind) => {
                let _ = writeln!(summary, "ok       {} ({kind})", p.display());
                items.push(json!({"path": p.display().to_string(), "valid": true, "kind": kind}));
            }
            Err(f) => {
                let detail = match &f {
                    Failure::Input(v) | Failure::Invalid(v) => v.clone(),
                };
                let _ = writeln!(summary, "invalid  {}: {} [{}]", p.display(), detail["message"].as_str().unwrap_or(""), detail["pointer"].as_str().unwrap_or(""));
                items.push(json!({"path": p.display().to_string(), "valid": false, "error": detail}));
                worst = match (worst, f) {
                    (Some(Failure::Input(v)), _) => Some(Failure::Input(v)),
                    (_, f) => Some(f),
                };
            }
        }
    }
    (Report { value: json!({"kind": "validation", "items": items}), summary }, worst)
}

fn cmd_rumin_basis(alg: &Alg, degree: Option<usize>) -> Result<Report, Failure> {
    let n = alg.dim();
    let degrees: Vec<usize> = match degree {
        Some(k) if k > n => return Err(Failure::invalid(format!("degree {k} exceeds the dimension {n}"))),
        Some(k) => vec![k],
        None => (0..=n).collect(),
    };
    let names = alg.names();
    let mut out = Vec::new();
    let mut summary = format!("homogeneous dimension {}\n", alg.homogeneous_dimension());
    for k in degrees {
        let basis = forms::e0_basis(alg, k);
        let weights = forms::e0_weights(alg, k);
        let _ = writeln!(summary, "degree {k}: dim E0 = {}, weights {:?}", basis.len(), weights);
        for (w, wt) in basis.iter().zip(&weights) {
            let terms: Vec<String> = w
                .terms()
                .iter()
                .map(|(idx, _, c)| {
                    let wedge = idx.iter().map(|&i| format!("{}*", names[i])).collect::<Vec<_>>().join("^");
                    format!("{} {wedge}", carnot_core::rational::fmt_q(c)).trim_end().to_string()
                })
                .collect();
            let _ = writeln!(summary, "  [{wt}] {}", if terms.is_empty() { "1".into() } else { terms.join(" + ") });
        }
        out.push(json!({
            "degree": k,
            "weights": weights,
            "forms": basis.iter().map(|w| io::algebra_form_to_json(w, &["r".to_string()])).collect::<Vec<_>>(),
        }));
    }
    Ok(Report { value: json!({"kind": "rumin-basis", "algebra": io::algebra_to_json(alg), "degrees": out}), summary })
}

fn cmd_extend(input: &Path, layers: &[usize]) -> Result<(CentralExtension, Report), Failure> {
    let (rho, names) = with_file(input, |n| io::algebra_form_from_json(n, None))?;
    if rho.degree() != 2 {
        return Err(Failure::invalid("the cocycle must be a 2-form"));
    }
    let layers: Vec<usize> = if layers.is_empty() {
        (0..rho.vdim())
            .map(|v| forms::weight(&rho.component(v)).ok_or_else(|| Failure::invalid(format!("component {v} of the cocycle vanishes"))))
            .collect::<Result<_, _>>()?
    } else {
        layers.to_vec()
    };
    if layers.len() != names.len() {
        return Err(Failure::input(format!("{} layers for {} value components", layers.len(), names.len())));
    }
    let ext = CentralExtension::extend(rho.algebra(), GradedSpace::new(names, layers), rho.clone()).map_err(|e| Failure::invalid(e.to_string()))?;
    let r = ext.report();
    let summary = format!(
        "extension of dimension {} (closed {}, graded {}, stratified {}, isometric {}, submetry {}); Carnot: {}",
        ext.total().dim(),
        r.closed,
        r.graded,
        r.stratified,
        r.isometric_inclusion,
        r.submetry_projection,
        ext.is_carnot()
    );
    let value = io::extension_to_json(&ext);
    Ok((ext, Report { value, summary }))
}

fn cmd_check_lift(map: &Path, ext1: &Path, ext2: &Path, g: &Global) -> Result<Report, Failure> {
    let f = with_file(map, io::map_from_json)?;
    let e1 = with_file(ext1, io::extension_from_json)?;
    let e2 = with_file(ext2, io::extension_from_json)?;
    let v = check_lift(&f, &e1, &e2, &sampler_for(&f, g))?;
    let mut value = serde_json::to_value(&v).expect("verdict serializes");
    let l = v.rumin.fit().map(|fit| fit.exact_matrix.as_ref().map(|m| json!(carnot_core::lift::qmatrix_strings(m))).unwrap_or_else(|| json!(fit.matrix)));
    let phi = v.cohomology.fit.exact_matrix.as_ref().map(|m| json!(carnot_core::lift::qmatrix_strings(m))).unwrap_or_else(|| json!(v.cohomology.fit.matrix));
    value["certificates"] = json!({"L": l, "phi": phi, "omega_samples": v.cohomology.omega_samples});
    value["kind"] = json!("lift-verdict");
    let route = v.sufficiency.as_ref().map(|s| format!("{:?}", s.route)).unwrap_or_else(|| "none".into());
    let rumin = match v.rumin.liftable() {
        Some(true) => "liftable".to_string(),
        Some(false) => "not liftable".to_string(),
        None => "refused".to_string(),
    };
    let summary = format!(
        "{}: rumin {rumin}; cohomology {}; route {route}",
        if v.map.is_empty() { "map" } else { &v.map },
        if v.cohomology.holds { "holds" } else { "fails" }
    );
    Ok(Report { value, summary })
}

fn cmd_pansu_pullback(map: &Path, form: &Path, g: &Global) -> Result<Report, Failure> {
    let f = with_file(map, io::map_from_json)?;
    let (tau, names) = with_file(form, |n| io::algebra_form_from_json(n, Some(f.target())))?;
    let contact = f.is_contact(&sampler_for(&f, g));
    if !contact.is_contact() {
        return Err(Failure::invalid(format!("map is not contact: {contact:?}")));
    }
    let out = f.pansu_pullback(&tau);
    let mut value = io::field_form_to_json(&out, &names);
    value["provenance"] = provenance(g);
    let summary = format!("degree {} form with {} nonzero coefficients", out.degree(), value["terms"].as_array().map_or(0, Vec::len));
    Ok(Report { value, summary })
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_path_lift(ext: &Path, curve: &Path, basepoint: &[f64], outputs: usize, csv: Option<&Path>, g: &Global) -> Result<Report, Failure> {
    let e = with_file(ext, io::extension_from_json)?;
    let doc = with_file(curve, |n| io::curve_from_json(n, e.base()))?;
    let base: Vec<f64> = if basepoint.is_empty() {
        let start = doc.curve().point(0.0);
        e.join_point(&start, &vec![0.0; e.values().dim()])
    } else {
        basepoint.to_vec()
    };
    if base.len() != e.total().dim() {
        return Err(Failure::input(format!("basepoint needs {} coordinates", e.total().dim())));
    }
    let opts = PathOptions { tol: g.tol, outputs, ..PathOptions::default() };
    let lifted = lift_horizontal_curve(&e, doc.curve(), &base, &opts)?;
    if let Some(path) = csv {
        let mut text = String::from("t");
        for n in e.total().coordinate_names() {
            text.push(',');
            text.push_str(&n);
        }
        text.push('\n');
        for (t, p) in lifted.times.iter().zip(&lifted.points) {
            text.push_str(&fmt17(*t));
            for x in p {
                text.push(',');
                text.push_str(&fmt17(*x));
            }
            text.push('\n');
        }
        std::fs::write(path, text).map_err(|err| Failure::input(format!("{}: {err}", path.display())))?;
    }
    let end = lifted.points.last().cloned().unwrap_or_default();
    let summary = format!(
        "{} points, end {:?}, error estimate {:.2e}, horizontality {:.2e}",
        lifted.points.len(),
        end,
        lifted.error_estimate,
        lifted.horizontality
    );
    let mut value = serde_json::to_value(&lifted).expect("trajectory serializes");
    value["kind"] = json!("trajectory");
    value["coordinates"] = json!(e.total().coordinate_names());
    value["provenance"] = json!({"tol": g.tol, "outputs": outputs});
    Ok(Report { value, summary })
}

// ---------------------------------------------------------------- fixtures

fn circle_curve(r: i64) -> Value {
    let t = Func::var(0);
    let arg = t.mul(&Func::pi()).scale(&carnot_core::rational::q(2));
    let c = SymbolicCurve::new(vec![arg.cos().scale(&carnot_core::rational::q(r)), arg.sin().scale(&carnot_core::rational::q(r))]);
    io::curve_to_json(&io::CurveDoc::Expression(c))
}

fn fixture_set(name: &str) -> Result<Vec<(String, Value)>, Failure> {
    let mut out: Vec<(String, Value)> = Vec::new();
    let tower = |out: &mut Vec<(String, Value)>| {
        for s in 1..=5 {
            out.push((format!("algebra-f{s}"), io::algebra_to_json(&StratifiedAlgebra::filiform(s))));
        }
        for s in 1..=4 {
            out.push((format!("extension-f{s}-f{}", s + 1), io::extension_to_json(&filiform_extension(s))));
            out.push((format!("map-filiform-{s}-linear"), io::map_to_json(&filiform_linear_map(s, 2, 1, 3))));
        }
    };
    let heis = |out: &mut Vec<(String, Value)>| {
        out.push(("algebra-h1".into(), io::algebra_to_json(&StratifiedAlgebra::heisenberg(1))));
        out.push(("algebra-h2".into(), io::algebra_to_json(&StratifiedAlgebra::heisenberg(2))));
        out.push(("extension-r2-h1".into(), io::extension_to_json(&heisenberg_extension())));
        out.push(("extension-h1-f3".into(), io::extension_to_json(&filiform_extension(2))));
        out.push(("extension-r2-trivial".into(), io::extension_to_json(&trivial_extension(&StratifiedAlgebra::euclidean(2)))));
        for r in [1, 2] {
            let mut c = circle_curve(r);
            c["algebra"] = io::algebra_to_json(&StratifiedAlgebra::euclidean(2));
            out.push((format!("curve-circle-{r}"), c));
        }
    };
    let winding = |out: &mut Vec<(String, Value)>| {
        for k in [2, 3] {
            out.push((format!("map-winding-{k}"), io::map_to_json(&winding_map(k))));
            out.push((format!("map-winding-lift-{k}"), io::map_to_json(&winding_lift(k))));
        }
    };
    let problems = |out: &mut Vec<(String, Value)>| {
        for fx in lift_fixtures() {
            let items = json!({
                "map": io::map_to_json(&fx.map),
                "ext1": io::extension_to_json(&fx.ext1),
                "ext2": io::extension_to_json(&fx.ext2),
            });
            out.push((
                format!("problem-{}", fx.name),
                json!({"kind": "bundle", "items": items, "expect": {"rumin": fx.expect.rumin, "cohomology": fx.expect.cohomology}}),
            ));
        }
    };
    match name {
        "filiform-tower" => {
            tower(&mut out);
            winding(&mut out);
        }
        "heisenberg" => heis(&mut out),
        "winding" => winding(&mut out),
        "lift-problems" => problems(&mut out),
        "all" => {
            tower(&mut out);
            heis(&mut out);
            winding(&mut out);
            problems(&mut out);
        }
        other => return Err(Failure::input(format!("unknown fixture set {other:?}; try filiform-tower, heisenberg, winding, lift-problems or all"))),
    }
    Ok(out)
}

fn cmd_fixtures(name: &str, out_dir: Option<&Path>) -> Result<Report, Failure> {
    let items = fixture_set(name)?;
    let mut summary = String::new();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
        for (n, v) in &items {
            let path = dir.join(format!("{n}.json"));
            std::fs::write(&path, io::to_pretty_string(v) + "\n").map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            let _ = writeln!(summary, "wrote {}", path.display());
        }
    } else {
        for (n, v) in &items {
            let _ = writeln!(summary, "{n} ({})", v["kind"].as_str().unwrap_or(""));
        }
    }
    let map: serde_json::Map<String, Value> = items.into_iter().collect();
    Ok(Report { value: json!({"kind": "bundle", "items": map}), summary })
}

// ---------------------------------------------------------------- main

fn write_output(path: Option<&Path>, value: &Value) -> Result<(), Failure> {
    if let Some(p) = path {
        std::fs::write(p, io::to_canonical_string(value) + "\n").map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn emit(g: &Global, r: &Report) {
    if g.json {
        println!("{}", io::to_canonical_string(&r.value));
    } else if g.pretty {
        println!("{}", io::to_pretty_string(&r.value));
    } else {
        print!("{}", r.summary);
        if !r.summary.ends_with('\n') {
            println!();
        }
    }
}

fn emit_failure(g: &Global, f: &Failure) -> ExitCode {
    let (v, code) = match f {
        Failure::Input(v) => (v, 2),
        Failure::Invalid(v) => (v, 1),
    };
    if g.json || g.pretty {
        println!("{}", if g.pretty { io::to_pretty_string(v) } else { io::to_canonical_string(v) });
    }
    let ptr = v["pointer"].as_str().filter(|s| !s.is_empty()).map(|s| format!(" at {s}")).unwrap_or_default();
    eprintln!("error{ptr}: {}", v["message"].as_str().unwrap_or("unknown"));
    ExitCode::from(code)
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let g = &cli.global;
    if !(g.tol > 0.0) || g.samples == 0 {
        return Err(Failure::input("tolerance and sample count must be positive"));
    }
    match &cli.command {
        Command::Validate { .. } => unreachable!("handled in main"),
        Command::RuminBasis { input, standard, degree } => {
            let alg = match (input, standard) {
                (Some(p), _) => with_file(p, |n| match n.get("kind").and_then(|k| k.str().ok()) {
                    Some("extension") => Ok(io::extension_from_json(n)?.total().clone()),
                    _ => io::algebra_from_json(n),
                })?,
                (None, Some(s)) => parse_standard(s)?,
                (None, None) => return Err(Failure::input("--input or --standard is required")),
            };
            cmd_rumin_basis(&alg, *degree)
        }
        Command::Extend { input, layers, output } => {
            let (_, r) = cmd_extend(input, layers)?;
            write_output(output.as_deref(), &r.value)?;
            Ok(r)
        }
        Command::CheckLift { map, ext1, ext2 } => cmd_check_lift(map, ext1, ext2, g),
        Command::PansuPullback { map, form, output } => {
            let r = cmd_pansu_pullback(map, form, g)?;
            write_output(output.as_deref(), &r.value)?;
            Ok(r)
        }
        Command::PathLift { ext, curve, basepoint, outputs, csv } => cmd_path_lift(ext, curve, basepoint, *outputs, csv.as_deref(), g),
        Command::Fixtures { name, out_dir } => cmd_fixtures(name, out_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    if let Command::Validate { input, paths } = &cli.command {
        let all: Vec<PathBuf> = input.iter().chain(paths).cloned().collect();
        if all.is_empty() {
            return emit_failure(g, &Failure::input("no documents given"));
        }
        let (report, failure) = cmd_validate(&all);
        emit(g, &report);
        return match failure {
            None => ExitCode::SUCCESS,
            Some(Failure::Input(_)) => ExitCode::from(2),
            Some(Failure::Invalid(_)) => ExitCode::from(1),
        };
    }
    match run(&cli) {
        Ok(r) => {
            emit(g, &r);
            ExitCode::SUCCESS
        }
        Err(f) => emit_failure(g, &f),
    }
}
