use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use mlsys::catalog::{self, CatalogError, ReplicateOptions};
use mlsys::diffgeo::{DiffForm, VectorField};
use mlsys::liealgebra::{close_and_extract, is_unimodular, solve_symmetries, VGLieAlgebra};
use mlsys::multisymplectic::{
    check_multisymplectic, default_ansatz, dual_coframe, hamiltonian_form, invariant_volume, minimal_lie_hamilton_algebra,
    MsError, MultisymplecticForm,
};
use mlsys::numeric::{drift, integrate, sample_generic, verify_superposition, Method, NumericSystem, Trajectory};
use mlsys::prolong_invariants::{check_independence, constant_of_motion_check, verify_evolution_invariant, ChainOrder};
use mlsys::symexpr::render;
use mlsys::system::{ContractionCheck, LieSystemDef, TensorSource};

#[derive(Parser)]
#[command(name = "mlsys", version, about = "Symbolic-numeric toolkit for multisymplectic Lie systems")]
struct Cli {
    /// System definition file or catalog id.
    #[arg(short, long, global = true)]
    system: Option<String>,
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Directory searched for `<id>.json` before the built-in catalog.
    #[arg(long, env = "MLSYS_CATALOG_DIR", global = true, hide_env_values = true)]
    catalog_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lie bracket of two named fields (basis fields or symmetries).
    Bracket { a: String, b: String },
    /// Close the fields under brackets and print the structure constants.
    StructureConstants {
        #[arg(long, default_value_t = 16)]
        max_dim: usize,
    },
    /// Coframe dual to the basis fields, or to the symmetries.
    Coframe {
        #[arg(long)]
        symmetries: bool,
    },
    /// Polynomial Lie symmetries of bounded degree.
    Symmetries {
        #[arg(long, default_value_t = 2)]
        degree: u16,
    },
    /// Closedness, 1-nondegeneracy and invariance of a named form.
    CheckMultisymplectic {
        #[arg(long)]
        form: String,
    },
    /// The invariant volume form of a unimodular, locally automorphic system.
    InvariantVolume,
    /// Hamiltonian forms and the Lie-Hamilton structure constants.
    HamiltonianForms {
        #[arg(long)]
        form: String,
    },
    /// Realize a Casimir's coproduct on the m-fold product and test invariance.
    CasimirInvariant {
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Casimir name; defaults to the first one listed.
        #[arg(long)]
        casimir: Option<String>,
        #[arg(long)]
        form: Option<String>,
        /// Print the realized tensor.
        #[arg(long)]
        tensor: bool,
    },
    /// Contract realized Casimirs with prolonged symmetries.
    Constants {
        /// Number of copies of the manifold.
        #[arg(long)]
        m: usize,
        /// JSON file listing the contraction chains.
        #[arg(long)]
        chains: PathBuf,
        /// Form to realize with; defaults to the system's Hamiltonian or volume form.
        #[arg(long)]
        form: Option<String>,
    },
    /// Integrate the t-dependent system and write a CSV trajectory.
    Integrate {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x0: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Rk4)]
        method: MethodArg,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
        /// Parameter values, in chart order.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Symbolic and numeric verification of the system's constants of motion.
    Verify {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Re-derive every expected result stored with a system.
    Replicate {
        /// Catalog id or file; defaults to --system.
        id: Option<String>,
        #[arg(long)]
        no_numeric: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Rk4,
    Dopri5,
}

enum Failure {
    Input(String),
    Math(String, Option<Value>),
    Numeric(String, Option<Value>),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Math(..) => 3,
            Failure::Numeric(..) => 4,
        }
    }
}

type Res<T> = Result<T, Failure>;

fn input<E: ToString>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn math<E: ToString>(e: E) -> Failure {
    Failure::Math(e.to_string(), None)
}

/// Text and JSON renderings of one result.
struct Output {
    text: String,
    json: Value,
}

fn resolve(spec: &str, dir: Option<&Path>) -> Res<LieSystemDef> {
    let path = Path::new(spec);
    let from_file = |p: &Path| -> Res<LieSystemDef> {
        let text = std::fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
        LieSystemDef::from_json(&text).map_err(|e| input(format!("{}: {e}", p.display())))
    };
    if path.is_file() {
        return from_file(path);
    }
    if let Some(dir) = dir {
        let p = dir.join(format!("{spec}.json"));
        if p.is_file() {
            return from_file(&p);
        }
    }
    catalog::load(spec).map_err(|e| match e {
        CatalogError::SelfCheck { .. } => math(e),
        _ => input(e),
    })
}

fn algebra(def: &LieSystemDef) -> Res<VGLieAlgebra> {
    VGLieAlgebra::new(def.fields.clone()).map_err(math)
}

fn named_field<'a>(def: &'a LieSystemDef, name: &str) -> Res<&'a VectorField> {
    if let Ok(f) = def.field(name) {
        return Ok(f);
    }
    def.symmetry_names
        .iter()
        .position(|n| n == name)
        .map(|i| &def.symmetries[i])
        .ok_or_else(|| input(format!("unknown field `{name}`")))
}

fn field_json(f: &VectorField) -> Value {
    Value::from(f.coeffs().iter().map(|c| render(c, f.chart())).collect::<Vec<_>>())
}

fn form_json(w: &DiffForm) -> Value {
    let terms: Vec<Value> = w
        .terms()
        .iter()
        .map(|(idx, c)| json!({"coords": idx.iter().map(|&i| w.chart().var_name(i)).collect::<Vec<_>>(), "coeff": render(c, w.chart())}))
        .collect();
    json!({"degree": w.degree(), "terms": terms})
}

fn sc_json(entries: &[mlsys::liealgebra::ScEntry]) -> Value {
    serde_json::to_value(entries).expect("serializable")
}

fn sc_lines(entries: &[mlsys::liealgebra::ScEntry]) -> String {
    if entries.is_empty() {
        return "abelian\n".into();
    }
    entries.iter().map(|e| format!("[{},{}] -> {} * e{}\n", e.alpha, e.beta, e.value, e.gamma)).collect()
}

fn theta_for(def: &LieSystemDef, name: Option<&str>) -> Res<MultisymplecticForm> {
    match name {
        Some(n) => check_multisymplectic(def.form(n).map_err(input)?).map_err(math),
        None => catalog::system_theta(def).ok_or_else(|| input("no multisymplectic form given; pass --form")),
    }
}

fn cmd_bracket(def: &LieSystemDef, a: &str, b: &str) -> Res<Output> {
    let br = named_field(def, a)?.bracket(named_field(def, b)?).map_err(math)?;
    Ok(Output { text: format!("[{a}, {b}] = {}\n", br.render()), json: json!({"a": a, "b": b, "bracket": field_json(&br), "zero": br.is_zero()}) })
}

fn cmd_structure_constants(def: &LieSystemDef, max_dim: usize) -> Res<Output> {
    let alg = close_and_extract(&def.fields, max_dim).map_err(math)?;
    let added: Vec<String> = alg.basis()[def.fields.len().min(alg.dim())..].iter().map(VectorField::render).collect();
    let entries = alg.sc().entries();
    let uni = is_unimodular(alg.sc());
    let traces: Vec<String> = uni.traces.iter().map(ToString::to_string).collect();
    let mut text = format!("dimension {}\n", alg.dim());
    for (k, f) in added.iter().enumerate() {
        text += &format!("added e{} = {f}\n", def.fields.len() + k + 1);
    }
    text += &sc_lines(&entries);
    text += "antisymmetry: ok\njacobi: ok\n";
    text += &format!("unimodular: {} (traces {})\n", uni.unimodular, traces.join(", "));
    Ok(Output {
        text,
        json: json!({
            "dimension": alg.dim(),
            "added": added,
            "structure_constants": sc_json(&entries),
            "antisymmetric": true,
            "jacobi": true,
            "unimodular": uni.unimodular,
            "traces": traces,
        }),
    })
}

fn cmd_coframe(def: &LieSystemDef, symmetries: bool) -> Res<Output> {
    let (fields, names) = if symmetries { (&def.symmetries, &def.symmetry_names) } else { (&def.fields, &def.field_names) };
    if fields.is_empty() {
        return Err(input("no symmetries listed"));
    }
    let eta = dual_coframe(fields).map_err(math)?;
    let text = eta.iter().enumerate().map(|(a, w)| format!("eta{} = {}   (dual to {})\n", a + 1, w.render(), names[a])).collect();
    Ok(Output { text, json: json!({"coframe": eta.iter().map(form_json).collect::<Vec<_>>()}) })
}

fn cmd_symmetries(def: &LieSystemDef, degree: u16) -> Res<Output> {
    let alg = algebra(def)?;
    let sym = solve_symmetries(&alg, degree).map_err(math)?;
    let text = if sym.is_empty() {
        format!("no polynomial symmetries of degree <= {degree}\n")
    } else {
        sym.iter().enumerate().map(|(i, y)| format!("Y{} = {}\n", i + 1, y.render())).collect()
    };
    Ok(Output { text, json: json!({"degree": degree, "symmetries": sym.iter().map(field_json).collect::<Vec<_>>()}) })
}

fn cmd_check_ms(def: &LieSystemDef, form: &str) -> Res<Output> {
    let w = def.form(form).map_err(input)?;
    let alg = algebra(def)?;
    let failures: Vec<String> = alg
        .basis()
        .iter()
        .zip(&def.field_names)
        .filter(|(x, _)| w.lie_derivative(x).map(|l| !l.is_zero()).unwrap_or(true))
        .map(|(_, n)| n.clone())
        .collect();
    match check_multisymplectic(w) {
        Ok(ms) => {
            let locus = ms.degeneracy_locus().map(|d| render(d, ms.chart()));
            let v = json!({"form": form, "degree": ms.degree(), "closed": true, "rank": ms.rank(), "degeneracy_locus": locus, "not_invariant_under": failures});
            let mut text = format!("{form}: closed, degree {}, generic rank {}\n", ms.degree(), ms.rank());
            if let Some(l) = &locus {
                text += &format!("nondegenerate where {l} is finite and nonzero\n");
            }
            if failures.is_empty() {
                text += "invariant under every basis field\n";
                Ok(Output { text, json: v })
            } else {
                Err(Failure::Math(format!("{form} is not invariant under {}", failures.join(", ")), Some(v)))
            }
        }
        Err(e) => Err(Failure::Math(format!("{form}: {e}"), Some(json!({"form": form, "error": e.to_string()})))),
    }
}

fn cmd_invariant_volume(def: &LieSystemDef) -> Res<Output> {
    let alg = algebra(def)?;
    match invariant_volume(&alg) {
        Ok(v) => Ok(Output { text: format!("{}\n", v.form().render()), json: json!({"volume": form_json(v.form())}) }),
        Err(MsError::NotUnimodular { traces }) => Err(Failure::Math(
            format!("not unimodular: Tr(ad) = ({})", traces.join(", ")),
            Some(json!({"unimodular": false, "traces": traces})),
        )),
        Err(e) => Err(math(e)),
    }
}

fn cmd_hamiltonian_forms(def: &LieSystemDef, form: &str) -> Res<Output> {
    let alg = algebra(def)?;
    let theta = theta_for(def, Some(form))?;
    let ansatz = default_ansatz(&alg, theta.degree()).map_err(math)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    for (x, name) in alg.basis().iter().zip(&def.field_names) {
        let d = theta.contract(x).map_err(math)?;
        let p = hamiltonian_form(x, &theta, &ansatz).map_err(math)?;
        text += &format!("{name}: i_X Theta = {}\n{}  theta = {}\n", d.render(), " ".repeat(name.len()), p.render());
        rows.push(json!({"field": name, "contraction": form_json(&d), "primitive": form_json(&p)}));
    }
    let lh = minimal_lie_hamilton_algebra(&alg, &theta).map_err(math)?;
    let entries = lh.sc.entries();
    text += "Lie-Hamilton structure constants:\n";
    text += &sc_lines(&entries);
    Ok(Output { text, json: json!({"form": form, "hamiltonian": rows, "lie_hamilton_sc": sc_json(&entries)}) })
}

fn casimir_name(def: &LieSystemDef, name: Option<String>) -> Res<String> {
    match name {
        Some(n) => Ok(n),
        None => def.casimirs.keys().next().cloned().ok_or_else(|| input("system lists no casimirs")),
    }
}

fn cmd_casimir_invariant(def: &LieSystemDef, m: usize, casimir: Option<String>, form: Option<String>, show: bool) -> Res<Output> {
    if m == 0 {
        return Err(input("--m must be at least 1"));
    }
    let alg = algebra(def)?;
    let theta = theta_for(def, form.as_deref())?;
    let name = casimir_name(def, casimir)?;
    let (real, el) = catalog::realization_for(def, &alg, &theta, &name).map_err(math)?;
    let t = real.realize(&catalog::split(&el, m).map_err(math)?).map_err(math)?;
    let rep = verify_evolution_invariant(&t, &alg).map_err(math)?;
    let mut v = rep.to_json(show);
    v["casimir"] = name.clone().into();
    v["m"] = m.into();
    v["rank"] = t.rank().into();
    v["components"] = t.terms().len().into();
    let mut text = format!("casimir {name}, m = {m}: rank-{} tensor with {} nonzero components\n", t.rank(), t.terms().len());
    if show {
        text += &format!("{}\n", t.render());
    }
    if rep.invariant() {
        text += "invariant under every prolonged basis field\n";
        Ok(Output { text, json: v })
    } else {
        let names: Vec<&str> = rep.failures.iter().map(|&a| def.field_names[a].as_str()).collect();
        Err(Failure::Math(format!("not invariant under {}", names.join(", ")), Some(v)))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainsFile {
    #[serde(default)]
    casimir: Option<String>,
    chains: Vec<ChainSpec>,
    #[serde(default)]
    wrt: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainSpec {
    name: String,
    #[serde(default)]
    casimir: Option<String>,
    #[serde(default = "default_source")]
    source: TensorSource,
    chain: Vec<usize>,
    #[serde(default)]
    factor: Option<String>,
    #[serde(default)]
    divide_by: Option<String>,
    #[serde(default)]
    order: ChainOrder,
}

fn default_source() -> TensorSource {
    TensorSource::Coproduct
}

fn cmd_constants(def: &LieSystemDef, m: usize, path: &Path, form: Option<String>) -> Res<Output> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let file: ChainsFile = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let alg = algebra(def)?;
    let theta = theta_for(def, form.as_deref())?;
    let chart = def.chart_m(m).map_err(input)?;
    let default_cas = file.casimir.clone();
    let mut scalars: HashMap<String, (usize, mlsys::symexpr::RationalExpr)> = HashMap::new();
    let mut ordered = Vec::new();
    let mut out = String::new();
    let mut rows = serde_json::Map::new();
    let mut bad = Vec::new();
    for c in file.chains {
        let check = ContractionCheck {
            name: c.name.clone(),
            casimir: casimir_name(def, c.casimir.or_else(|| default_cas.clone()))?,
            m,
            source: c.source,
            chain: c.chain,
            factor: c.factor,
            divide_by: c.divide_by,
            order: c.order,
            value: String::new(),
        };
        let f = catalog::contraction_value(def, &alg, &theta, &check, &scalars).map_err(math)?;
        let ok = constant_of_motion_check(&f, &alg, m).map_err(math)?;
        if !ok {
            bad.push(c.name.clone());
        }
        out += &format!("{} = {}{}\n", c.name, render(&f, &chart), if ok { "" } else { "   [not constant]" });
        rows.insert(c.name.clone(), json!({"value": render(&f, &chart), "constant": ok}));
        scalars.insert(c.name.clone(), (m, f.clone()));
        ordered.push(f);
    }
    let mut v = json!({"m": m, "scalars": rows});
    if !file.wrt.is_empty() {
        let wrt = file.wrt.iter().map(|n| chart.coord_index(n).map_err(input)).collect::<Res<Vec<_>>>()?;
        let (ok, det) = check_independence(&ordered, &wrt).map_err(input)?;
        out += &format!("Jacobian w.r.t. ({}): {}\n", file.wrt.join(", "), if ok { "nonzero" } else { "zero" });
        v["jacobian"] = json!({"wrt": file.wrt, "nonzero": ok, "determinant": render(&det, &chart)});
        if !ok {
            return Err(Failure::Math("scalars are functionally dependent".into(), Some(v)));
        }
    }
    if !bad.is_empty() {
        return Err(Failure::Math(format!("not constants of motion: {}", bad.join(", ")), Some(v)));
    }
    Ok(Output { text: out, json: v })
}

#[allow(clippy::too_many_arguments)]
fn cmd_integrate(
    def: &LieSystemDef,
    x0: &[f64],
    t0: f64,
    t1: f64,
    method: MethodArg,
    step: f64,
    tol: (f64, f64),
    params: Vec<f64>,
    output: Option<&Path>,
    as_json: bool,
) -> Res<Option<Output>> {
    let params = if params.is_empty() { def.file.numeric.as_ref().map(|n| n.params.clone()).unwrap_or_default() } else { params };
    let sys = NumericSystem::new(&def.fields, def.tdep.clone(), params).map_err(input)?;
    let method = match method {
        MethodArg::Rk4 => Method::Rk4 { step },
        MethodArg::Dopri5 => Method::Dopri5 { rtol: tol.0, atol: tol.1, h0: step },
    };
    let tr = integrate(&sys, x0, t0, t1, method).map_err(|e| match e {
        mlsys::numeric::NumError::Arity { .. } | mlsys::numeric::NumError::BadOption(_) => input(e),
        _ => Failure::Numeric(e.to_string(), None),
    })?;
    if as_json {
        return Ok(Some(Output { text: String::new(), json: serde_json::to_value(&tr).expect("serializable") }));
    }
    match output {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| input(format!("{}: {e}", p.display())))?;
            tr.write_csv(f).map_err(|e| Failure::Numeric(e.to_string(), None))?;
        }
        None => tr.write_csv(std::io::stdout().lock()).map_err(|e| Failure::Numeric(e.to_string(), None))?,
    }
    Ok(None)
}

fn cmd_verify(def: &LieSystemDef, m: usize, seeds: Option<u64>, step: Option<f64>, tolerance: Option<f64>) -> Res<Output> {
    let spec = def.file.numeric.as_ref().ok_or_else(|| input("system has no numeric block"))?;
    let alg = algebra(def)?;
    let scalars: Vec<_> = catalog::symbolic_scalars(def).map_err(math)?.into_iter().filter(|(_, mi, _)| *mi <= m).collect();
    if scalars.is_empty() {
        return Err(input(format!("no constants of motion with m <= {m}")));
    }
    let mut text = String::new();
    let mut symbolic = serde_json::Map::new();
    for (name, mi, f) in &scalars {
        let ok = constant_of_motion_check(f, &alg, *mi).map_err(math)?;
        symbolic.insert(name.clone(), ok.into());
        if !ok {
            return Err(Failure::Math(format!("{name} is not a constant of motion"), Some(json!({"symbolic": symbolic}))));
        }
    }
    text += &format!("symbolic: {} constants annihilated by the prolonged algebra\n", scalars.len());
    let seeds = seeds.unwrap_or(spec.seeds);
    let step = step.unwrap_or(spec.step);
    let tol = tolerance.unwrap_or(spec.tolerance);
    let sys = NumericSystem::new(&def.fields, def.tdep.clone(), spec.params.clone()).map_err(input)?;
    let bounds: Vec<(f64, f64)> = spec.sample_box.iter().map(|b| (b[0], b[1])).collect();
    let mut worst: HashMap<&str, f64> = HashMap::new();
    let mut relation_dev: f64 = 0.0;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trajs: Vec<Trajectory> = (0..m)
            .map(|_| {
                let x0 = sample_generic(&def.chart, &bounds, &spec.params, 1e-3, &mut rng).map_err(|e| Failure::Numeric(e.to_string(), None))?;
                integrate(&sys, &x0, spec.t_span[0], spec.t_span[1], Method::Rk4 { step })
                    .map_err(|e| Failure::Numeric(format!("seed {seed}: {e}"), None))
            })
            .collect::<Res<_>>()?;
        for (name, mi, f) in &scalars {
            let d = drift(f, &trajs[..*mi], &spec.params).map_err(|e| Failure::Numeric(format!("seed {seed}, {name}: {e}"), None))?;
            let w = worst.entry(name.as_str()).or_insert(0.0);
            *w = w.max(d);
        }
        let relations: Vec<(String, _)> = scalars.iter().filter(|(_, mi, _)| *mi == m).map(|(n, _, f)| (n.clone(), f.clone())).collect();
        for r in verify_superposition(&relations, &trajs, &spec.params).map_err(|e| Failure::Numeric(e.to_string(), None))? {
            match r.deviation {
                Some(d) => relation_dev = relation_dev.max(d),
                None => return Err(Failure::Numeric(format!("seed {seed}: {} hits a pole at t = {:?}", r.name, r.pole_at), None)),
            }
        }
    }
    let mut drifts = serde_json::Map::new();
    let mut over = Vec::new();
    for (name, _, _) in &scalars {
        let d = worst[name.as_str()];
        text += &format!("{name}: max relative drift {d:.3e}\n");
        drifts.insert(name.clone(), json!(d));
        if !(d < tol) {
            over.push(name.clone());
        }
    }
    text += &format!("superposition relations: max deviation {relation_dev:.3e}\n");
    let v = json!({
        "m": m, "seeds": seeds, "step": step, "tolerance": tol,
        "symbolic": symbolic, "drift": drifts, "relation_deviation": relation_dev,
    });
    if over.is_empty() {
        text += &format!("all drifts below {tol:e} over {seeds} seeds\n");
        Ok(Output { text, json: v })
    } else {
        Err(Failure::Numeric(format!("drift exceeds {tol:e} for {}", over.join(", ")), Some(v)))
    }
}

fn cmd_replicate(def: &LieSystemDef, numeric: bool, as_json: bool) -> Res<Output> {
    let checks = catalog::replicate(def, ReplicateOptions { numeric });
    let text: String = checks
        .iter()
        .map(|c| format!("{:4} {:32} {}\n", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail))
        .collect();
    let failed = checks.iter().filter(|c| !c.passed).count();
    let v = json!({"system": def.id, "checks": checks, "failed": failed});
    if failed == 0 {
        Ok(Output { text: text + &format!("{}: all {} checks passed\n", def.id, checks.len()), json: v })
    } else {
        if !as_json {
            print!("{text}");
        }
        Err(Failure::Math(format!("{}: {failed} of {} checks failed", def.id, checks.len()), Some(v)))
    }
}

fn print_text_or_json(out: &Output, as_json: bool) {
    let mut stdout = std::io::stdout().lock();
    if as_json {
        let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&out.json).expect("serializable"));
    } else {
        let _ = write!(stdout, "{}", out.text);
    }
}

fn run(cli: Cli) -> Res<Option<Output>> {
    let dir = cli.catalog_dir.as_deref();
    let system = |s: &Option<String>| -> Res<LieSystemDef> {
        let spec = s.as_deref().ok_or_else(|| input("no system given; use -s <file|catalog id>"))?;
        resolve(spec, dir)
    };
    let out = match cli.cmd {
        Cmd::Bracket { a, b } => cmd_bracket(&system(&cli.system)?, &a, &b)?,
        Cmd::StructureConstants { max_dim } => cmd_structure_constants(&system(&cli.system)?, max_dim)?,
        Cmd::Coframe { symmetries } => cmd_coframe(&system(&cli.system)?, symmetries)?,
        Cmd::Symmetries { degree } => cmd_symmetries(&system(&cli.system)?, degree)?,
        Cmd::CheckMultisymplectic { form } => cmd_check_ms(&system(&cli.system)?, &form)?,
        Cmd::InvariantVolume => cmd_invariant_volume(&system(&cli.system)?)?,
        Cmd::HamiltonianForms { form } => cmd_hamiltonian_forms(&system(&cli.system)?, &form)?,
        Cmd::CasimirInvariant { m, casimir, form, tensor } => cmd_casimir_invariant(&system(&cli.system)?, m, casimir, form, tensor)?,
        Cmd::Constants { m, chains, form } => cmd_constants(&system(&cli.system)?, m, &chains, form)?,
        Cmd::Integrate { x0, t0, t1, step, method, rtol, atol, params, output } => {
            return cmd_integrate(&system(&cli.system)?, &x0, t0, t1, method, step, (rtol, atol), params, output.as_deref(), cli.json);
        }
        Cmd::Verify { m, seeds, step, tolerance } => cmd_verify(&system(&cli.system)?, m, seeds, step, tolerance)?,
        Cmd::Replicate { id, no_numeric } => {
            let def = system(&id.or(cli.system))?;
            cmd_replicate(&def, !no_numeric, cli.json)?
        }
    };
    Ok(Some(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let as_json = cli.json;
    match run(cli) {
        Ok(Some(out)) => {
            print_text_or_json(&out, as_json);
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            let (msg, payload) = match f {
                Failure::Input(m) => (m, None),
                Failure::Math(m, p) | Failure::Numeric(m, p) => (m, p),
            };
            if as_json {
                let mut v = payload.unwrap_or_else(|| json!({}));
                v["error"] = msg.clone().into();
                v["exit_code"] = code.into();
                println!("{}", serde_json::to_string_pretty(&v).expect("serializable"));
            }
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

