//! Built-in Lie systems and the replication suite that re-derives every
//! expected quantity stored with them.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coalgebra::TensorElement;
use crate::diffgeo::{DiffForm, VectorField};
use crate::liealgebra::{
    is_locally_automorphic, is_unimodular, same_span, solve_symmetries, verify_isomorphic_sc, StructureConstants,
    VGLieAlgebra,
};
use crate::multisymplectic::{
    bracket_km1, bracket_km2, check_multisymplectic, default_ansatz, dual_coframe, express_form_in_span,
    hamiltonian_form, invariant_form_space, invariant_volume, minimal_lie_hamilton_algebra, MultisymplecticForm,
};
use crate::numeric::{drift, integrate, sample_generic, Method, NumericSystem};
use crate::prolong_invariants::{
    check_independence, check_symmetries, constant_of_motion_check, smallest_m, verify_evolution_invariant,
    Realization, ScConvention,
};
use crate::symexpr::{render, ChartRef, RationalExpr, Q};
use crate::system::{
    coframe_combination, parse_expr, parse_form, parse_one_forms, sc_from_entries, CoframeTerm, FrameKind,
    ContractionCheck, LieSystemDef, SystemError, TensorSource,
};

const SOURCES: [(&str, &str); 4] = [
    ("schwarz", include_str!("../catalog/schwarz.json")),
    ("dbh", include_str!("../catalog/dbh.json")),
    ("control", include_str!("../catalog/control.json")),
    ("riccati", include_str!("../catalog/riccati.json")),
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown catalog id `{0}`")]
    Unknown(String),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("catalog entry `{id}` failed self-verification: {detail}")]
    SelfCheck { id: String, detail: String },
}

/// Identifiers of the built-in systems.
pub fn ids() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(id, _)| *id)
}

/// Raw JSON of a built-in system.
pub fn source(id: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(i, _)| *i == id).map(|(_, s)| *s)
}

/// Parse a built-in system and run its cheap consistency checks.
pub fn load(id: &str) -> Result<LieSystemDef, CatalogError> {
    let text = source(id).ok_or_else(|| CatalogError::Unknown(id.to_string()))?;
    let def = LieSystemDef::from_json(text)?;
    self_verify(&def)?;
    Ok(def)
}

/// Structure constants, symmetry commutation and form invariance.
pub fn self_verify(def: &LieSystemDef) -> Result<(), CatalogError> {
    let fail = |detail: String| CatalogError::SelfCheck { id: def.id.clone(), detail };
    let alg = VGLieAlgebra::new(def.fields.clone()).map_err(|e| fail(e.to_string()))?;
    if let Some(sc) = &def.file.expected.structure_constants {
        let want = sc_from_entries(alg.dim(), sc, "expected.structure_constants")?;
        if &want != alg.sc() {
            return Err(fail(format!("structure constants are {:?}", alg.sc())));
        }
    }
    check_symmetries(&alg, &def.symmetries).map_err(|e| fail(e.to_string()))?;
    for name in &def.file.expected.certify {
        let w = def.form(name)?;
        for x in alg.basis() {
            let l = w.lie_derivative(x).map_err(|e| fail(e.to_string()))?;
            if !l.is_zero() {
                return Err(fail(format!("form `{name}` is not invariant")));
            }
        }
    }
    Ok(())
}

/// Outcome of one replication check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Options for [`replicate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReplicateOptions {
    pub numeric: bool,
}

impl Default for ReplicateOptions {
    fn default() -> Self {
        ReplicateOptions { numeric: true }
    }
}

struct Suite {
    out: Vec<CheckResult>,
}

impl Suite {
    fn record(&mut self, name: impl Into<String>, r: Result<String, String>) {
        let (passed, detail) = match r {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.out.push(CheckResult { name: name.into(), passed, detail });
    }
}

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn sc_text(sc: &StructureConstants) -> String {
    sc.entries().iter().map(|e| format!("[{},{}]_{}={}", e.alpha, e.beta, e.gamma, e.value)).collect::<Vec<_>>().join(" ")
}

fn ensure(ok: bool, pass: impl Into<String>, fail: impl Into<String>) -> Result<String, String> {
    if ok {
        Ok(pass.into())
    } else {
        Err(fail.into())
    }
}

fn frame(def: &LieSystemDef, kind: FrameKind) -> Result<Vec<DiffForm>, String> {
    let fields = match kind {
        FrameKind::Fields => &def.fields,
        FrameKind::Symmetries => &def.symmetries,
    };
    dual_coframe(fields).map_err(err)
}

fn expect_combination(coframe: &[DiffForm], terms: &[CoframeTerm], chart: &ChartRef, ctx: &str) -> Result<DiffForm, String> {
    coframe_combination(coframe, terms, chart, ctx).map_err(err)
}

fn forms_equal(a: &DiffForm, b: &DiffForm) -> bool {
    if a.is_zero() || b.is_zero() {
        a.is_zero() && b.is_zero()
    } else {
        a == b
    }
}

/// Run every check listed in the system's `expected` block.
pub fn replicate(def: &LieSystemDef, opts: ReplicateOptions) -> Vec<CheckResult> {
    let mut s = Suite { out: Vec::new() };
    let alg = match VGLieAlgebra::new(def.fields.clone()) {
        Ok(a) => a,
        Err(e) => {
            s.record("closure", Err(e.to_string()));
            return s.out;
        }
    };
    let ex = &def.file.expected;
    let chart = def.chart.clone();

    if let Some(sc) = &ex.structure_constants {
        let r = sc_from_entries(alg.dim(), sc, "structure_constants").map_err(err).and_then(|want| {
            ensure(&want == alg.sc(), sc_text(alg.sc()), format!("got {}", sc_text(alg.sc())))
        });
        s.record("structure_constants", r);
    }
    let la = is_locally_automorphic(&alg);
    if let Some(want) = ex.locally_automorphic {
        s.record("locally_automorphic", ensure(la.locally_automorphic == want, format!("{want}"), format!("got {}", la.locally_automorphic)));
    }
    if let Some(det) = &ex.frame_determinant {
        let r = parse_expr(det, &chart, "frame_determinant").map_err(err).and_then(|want| {
            let got = la.determinant.clone().unwrap_or_default();
            ensure(got == want, render(&got, &chart), format!("got {}", render(&got, &chart)))
        });
        s.record("frame_determinant", r);
    }
    if let Some(want) = ex.unimodular {
        let rep = is_unimodular(alg.sc());
        let traces = rep.traces.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        let mut r = ensure(rep.unimodular == want, format!("traces ({traces})"), format!("traces ({traces})"));
        // Cross-check with the direct criterion when the coframe exists.
        if r.is_ok() && la.locally_automorphic {
            r = dual_coframe(alg.basis())
                .and_then(|eta| crate::multisymplectic::wedge_products(&eta, eta.len()))
                .map_err(err)
                .and_then(|mut v| {
                    let vol = v.pop().expect("top form");
                    let mut inv = true;
                    for x in alg.basis() {
                        inv &= vol.lie_derivative(x).map_err(err)?.is_zero();
                    }
                    ensure(inv == want, format!("traces ({traces}); coframe volume agrees"), "coframe volume disagrees")
                });
        }
        s.record("unimodular", r);
    }
    if let Some(want) = ex.smallest_m {
        let r = smallest_m(&alg, 4).map_err(err).and_then(|m| ensure(m == want, format!("m = {m}"), format!("got m = {m}")));
        s.record("smallest_m", r);
    }
    if let Some(rows) = &ex.coframe {
        let r = parse_one_forms(&chart, rows, "coframe")
            .map_err(err)
            .and_then(|want| Ok((want, dual_coframe(alg.basis()).map_err(err)?)))
            .and_then(|(want, got)| ensure(want == got, "dual to the fields", "coframe differs"));
        s.record("coframe", r);
    }
    if !def.symmetries.is_empty() {
        let r = check_symmetries(&alg, &def.symmetries).map_err(err).and_then(|_| match ex.symmetry_degree {
            Some(d) => {
                let sol = solve_symmetries(&alg, d).map_err(err)?;
                ensure(
                    same_span(&sol, &def.symmetries),
                    format!("{} commuting fields span the degree-{d} solutions", def.symmetries.len()),
                    format!("degree-{d} solution space has dimension {}", sol.len()),
                )
            }
            None => Ok("listed fields commute".into()),
        });
        s.record("symmetries", r);
    }
    if let Some(rows) = &ex.symmetry_isomorphism {
        let r = (|| {
            let sym = VGLieAlgebra::new(def.symmetries.clone()).map_err(err)?;
            let map: Vec<Vec<Q>> = rows
                .iter()
                .map(|row| row.iter().map(|v| v.trim().parse::<Q>().map_err(|_| format!("bad entry `{v}`"))).collect())
                .collect::<Result<_, _>>()?;
            let ok = verify_isomorphic_sc(alg.sc(), sym.sc(), &map).map_err(err)?;
            ensure(ok, "map is a Lie algebra isomorphism", format!("symmetry algebra {}", sc_text(sym.sc())))
        })();
        s.record("symmetry_isomorphism", r);
    }
    if let Some(rows) = &ex.symmetry_coframe {
        let r = parse_one_forms(&chart, rows, "symmetry_coframe")
            .map_err(err)
            .and_then(|want| Ok((want, dual_coframe(&def.symmetries).map_err(err)?)))
            .and_then(|(want, got)| ensure(want == got, "dual to the symmetries", "coframe differs"));
        s.record("symmetry_coframe", r);
    }
    for (k, rel) in ex.coframe_differentials.iter().enumerate() {
        let r = (|| {
            let eta = frame(def, rel.coframe)?;
            let form = eta.get(rel.form.wrapping_sub(1)).ok_or("coframe index out of range")?;
            let want = expect_combination(&eta, &rel.terms, &chart, "coframe_differentials")?;
            ensure(forms_equal(&form.d(), &want), "matches", format!("got {}", form.d().render()))
        })();
        s.record(format!("coframe_differential[{}]", k + 1), r);
    }
    if let Some(name) = &ex.volume_form {
        let r = (|| {
            let vol = invariant_volume(&alg).map_err(err)?;
            let want = def.form(name).map_err(err)?;
            ensure(vol.form() == want, format!("{name} = {}", vol.form().render()), format!("got {}", vol.form().render()))
        })();
        s.record("volume_form", r);
    }
    for e in &ex.form_expansions {
        let r = (|| {
            let eta = frame(def, e.coframe)?;
            let mut want = expect_combination(&eta, &e.terms, &chart, "form_expansions")?;
            if e.exterior_derivative {
                want = want.d();
            }
            let form = def.form(&e.form).map_err(err)?;
            ensure(forms_equal(form, &want), "matches", "expansion differs")
        })();
        let tag = if e.exterior_derivative { "exact_expansion" } else { "expansion" };
        s.record(format!("{tag}:{}", e.form), r);
    }
    for name in &ex.certify {
        let r = (|| {
            let form = def.form(name).map_err(err)?;
            let ms = check_multisymplectic(form).map_err(err)?;
            for (a, x) in alg.basis().iter().enumerate() {
                if !form.lie_derivative(x).map_err(err)?.is_zero() {
                    return Err(format!("not invariant under X{}", a + 1));
                }
            }
            let locus = ms.degeneracy_locus().map(|d| render(d, &chart)).unwrap_or_default();
            Ok(format!("closed, nondegenerate off {locus} = 0, invariant"))
        })();
        s.record(format!("multisymplectic:{name}"), r);
    }
    for (k, inv) in ex.invariant_forms.iter().enumerate() {
        let r = (|| {
            let form = parse_form(&chart, &inv.form, "invariant_forms").map_err(err)?;
            for x in alg.basis() {
                if !form.lie_derivative(x).map_err(err)?.is_zero() {
                    return Err("not invariant".into());
                }
            }
            let space = invariant_form_space(&alg, &def.symmetries, form.degree()).map_err(err)?;
            let c = express_form_in_span(&form, &space).ok_or("outside the symmetry-coframe span")?;
            Ok(format!("coefficients ({})", c.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
        })();
        s.record(format!("invariant_form[{}]", k + 1), r);
    }

    let mut theta: Option<MultisymplecticForm> = None;
    if let Some(h) = &ex.hamiltonian {
        let r = def.form(&h.form).map_err(err).and_then(|f| check_multisymplectic(f).map_err(err));
        match r {
            Ok(t) => {
                hamiltonian_checks(&mut s, def, &alg, &t, h);
                theta = Some(t);
            }
            Err(e) => s.record("hamiltonian", Err(e)),
        }
    } else if let Some(name) = &ex.volume_form {
        theta = def.form(name).ok().and_then(|f| check_multisymplectic(f).ok());
    }

    let mut scalars: HashMap<String, (usize, RationalExpr)> = HashMap::new();
    if let Some(theta) = &theta {
        invariant_checks(&mut s, def, &alg, theta, &mut scalars);
    }
    for c in &ex.constants {
        let r = (|| {
            let chart_m = def.chart_m(c.m).map_err(err)?;
            let f = parse_expr(&c.value, &chart_m, &c.name).map_err(err)?;
            let ok = constant_of_motion_check(&f, &alg, c.m).map_err(err)?;
            scalars.insert(c.name.clone(), (c.m, f));
            ensure(ok, "annihilated by the prolonged algebra", "not a constant of motion")
        })();
        s.record(format!("constant:{}", c.name), r);
    }
    for (k, j) in ex.jacobians.iter().enumerate() {
        let r = (|| {
            let mut fs = Vec::new();
            let mut m = 0;
            for n in &j.scalars {
                let (mi, f) = scalars.get(n).ok_or_else(|| format!("unknown scalar `{n}`"))?;
                m = m.max(*mi);
                fs.push(f.clone());
            }
            let chart_m = def.chart_m(m).map_err(err)?;
            let wrt = j.wrt.iter().map(|n| chart_m.coord_index(n).map_err(err)).collect::<Result<Vec<_>, _>>()?;
            let (ok, det) = check_independence(&fs, &wrt).map_err(err)?;
            ensure(ok, "Jacobian determinant is nonzero", format!("determinant {}", render(&det, &chart_m)))
        })();
        s.record(format!("independence[{}]", k + 1), r);
    }
    if opts.numeric {
        if let Some(spec) = &def.file.numeric {
            let r = numeric_drift(def, spec, &scalars);
            s.record("numeric_drift", r);
        }
    }
    s.out
}

fn hamiltonian_checks(
    s: &mut Suite,
    def: &LieSystemDef,
    alg: &VGLieAlgebra,
    theta: &MultisymplecticForm,
    h: &crate::system::HamiltonianExpected,
) {
    let chart = def.chart.clone();
    let diffs: Vec<DiffForm> = match alg.basis().iter().map(|x| theta.contract(x)).collect() {
        Ok(v) => v,
        Err(e) => return s.record("hamiltonian", Err(e.to_string())),
    };
    for (a, spec) in h.differentials.iter().enumerate() {
        let r = parse_form(&chart, spec, "differentials").map_err(err).and_then(|want| {
            let got = diffs.get(a).ok_or("too many differentials")?;
            ensure(got == &want, "matches", format!("got {}", got.render()))
        });
        s.record(format!("contraction:X{}", a + 1), r);
    }
    let r = (|| {
        let ansatz = default_ansatz(alg, theta.degree()).map_err(err)?;
        for (a, x) in alg.basis().iter().enumerate() {
            let p = hamiltonian_form(x, theta, &ansatz).map_err(|e| format!("X{}: {e}", a + 1))?;
            if p.d() != diffs[a] {
                return Err(format!("X{}: primitive fails", a + 1));
            }
        }
        Ok(format!("primitives found in the span of {} coframe products", ansatz.len()))
    })();
    s.record("hamiltonian_primitives", r);
    if !h.primitives.is_empty() {
        let r = (|| {
            let eta = dual_coframe(alg.basis()).map_err(err)?;
            for (a, terms) in h.primitives.iter().enumerate() {
                let p = expect_combination(&eta, terms, &chart, "primitives")?;
                let d = diffs.get(a).ok_or("too many primitives")?;
                if &p.d() != d {
                    return Err(format!("d(theta{}) differs", a + 1));
                }
                if let Some(spec) = h.primitives_coords.get(a) {
                    let c = parse_form(&chart, spec, "primitives_coords").map_err(err)?;
                    if c != p {
                        return Err(format!("theta{} coordinate form differs", a + 1));
                    }
                }
            }
            Ok("listed primitives have the right differentials".into())
        })();
        s.record("primitives", r);
        let r = (|| {
            let eta = dual_coframe(alg.basis()).map_err(err)?;
            let ps = h
                .primitives
                .iter()
                .map(|t| expect_combination(&eta, t, &chart, "primitives"))
                .collect::<Result<Vec<_>, _>>()?;
            for a in 0..ps.len() {
                for b in a + 1..ps.len() {
                    let lhs = bracket_km2(&ps[a], &ps[b], theta).map_err(err)?.d();
                    let rhs = bracket_km1(&diffs[a], &diffs[b], theta).map_err(err)?;
                    if lhs != rhs {
                        return Err(format!("pair ({}, {})", a + 1, b + 1));
                    }
                }
            }
            Ok("d{theta_a, theta_b} = {d theta_a, d theta_b}".into())
        })();
        s.record("bracket_compatibility", r);
    }
    let r = (|| {
        let lh = minimal_lie_hamilton_algebra(alg, theta).map_err(err)?;
        let want = sc_from_entries(alg.dim(), &h.lie_hamilton_sc, "lie_hamilton_sc").map_err(err)?;
        ensure(lh.sc == want, sc_text(&lh.sc), format!("got {}", sc_text(&lh.sc)))
    })();
    s.record("lie_hamilton_sc", r);
}

pub fn realization_for(def: &LieSystemDef, alg: &VGLieAlgebra, theta: &MultisymplecticForm, name: &str) -> Result<(Realization, TensorElement), String> {
    let (spec, _) = def.casimir(name).map_err(err)?;
    let sc = match &spec.sc {
        Some(entries) => sc_from_entries(alg.dim(), entries, "casimirs.sc").map_err(err)?,
        None => {
            let lh = minimal_lie_hamilton_algebra(alg, theta).map_err(err)?.sc;
            match spec.convention {
                ScConvention::LieHamilton => lh,
                ScConvention::VectorField => lh.negated(),
            }
        }
    };
    let cas = def.validated_casimir(name, &sc).map_err(err)?;
    let real = Realization::new(alg.clone(), theta.clone(), sc, spec.convention).map_err(err)?;
    Ok((real, cas.element().clone()))
}

pub fn split(el: &TensorElement, m: usize) -> Result<TensorElement, String> {
    if m == 1 {
        Ok(el.clone())
    } else {
        el.coproduct_m(m - 1).map_err(err)
    }
}

/// `Σ_j 1 ⊠ … ⊠ C ⊠ … ⊠ 1` with `C` in factor `j`.
pub fn diagonal_element(el: &TensorElement, m: usize) -> Result<TensorElement, crate::coalgebra::CoalgebraError> {
    let one = TensorElement::unit(el.dim(), 1);
    let mut acc = TensorElement::zero(el.dim(), m);
    for j in 0..m {
        let parts: Vec<TensorElement> = (0..m).map(|i| if i == j { el.clone() } else { one.clone() }).collect();
        acc = acc.add(&TensorElement::boxed(&parts)?)?;
    }
    Ok(acc)
}

fn invariant_checks(
    s: &mut Suite,
    def: &LieSystemDef,
    alg: &VGLieAlgebra,
    theta: &MultisymplecticForm,
    scalars: &mut HashMap<String, (usize, RationalExpr)>,
) {
    let ex = &def.file.expected;
    for name in def.casimirs.keys() {
        let r = (|| {
            let (real, el) = realization_for(def, alg, theta, name)?;
            for m in 1..=2 {
                let t = real.realize(&split(&el, m)?).map_err(err)?;
                let rep = verify_evolution_invariant(&t, alg).map_err(err)?;
                if !rep.invariant() {
                    return Err(format!("m = {m}: not invariant under {:?}", rep.failures));
                }
            }
            Ok(format!("realized {} on m = 1, 2 is invariant", real.convention_name()))
        })();
        s.record(format!("casimir:{name}"), r);
    }
    for (k, rc) in ex.realizations.iter().enumerate() {
        let r = (|| {
            let (real, el) = realization_for(def, alg, theta, &rc.casimir)?;
            let chart_m = real.chart(rc.m).map_err(err)?;
            let got = real.realize(&split(&el, rc.m)?).map_err(err)?;
            let base = ex.hamiltonian.as_ref().ok_or("no hamiltonian block")?;
            let diffs = base
                .differentials
                .iter()
                .map(|f| parse_form(&def.chart, f, "differentials").map(|w| w.to_tensor()).map_err(err))
                .collect::<Result<Vec<_>, _>>()?;
            let mut want = crate::diffgeo::CovTensor::zero(chart_m.clone(), got.rank());
            for t in &rc.terms {
                let c: Q = t.coeff.trim().parse().map_err(|_| format!("bad coefficient `{}`", t.coeff))?;
                let mut term = crate::diffgeo::CovTensor::scalar(chart_m.clone(), RationalExpr::from_q(c));
                if t.slots.len() != rc.m {
                    return Err("slot count differs from m".into());
                }
                for (slot, word) in t.slots.iter().enumerate() {
                    for &l in word {
                        let d = diffs.get(l.wrapping_sub(1)).ok_or("letter out of range")?;
                        let d = if rc.m == 1 { d.clone() } else { d.lift(&chart_m, rc.m, slot + 1).map_err(err)? };
                        term = term.tensor(&d).map_err(err)?;
                    }
                }
                want = want.add(&term).map_err(err)?;
            }
            if let Some(dc) = &rc.diagonal {
                let c: Q = dc.trim().parse().map_err(|_| format!("bad coefficient `{dc}`"))?;
                let diag = real.realize(&diagonal_element(&el, rc.m).map_err(err)?).map_err(err)?;
                want = want.add(&diag.scale(&c)).map_err(err)?;
            }
            ensure(got == want, "matches", "realized tensor differs")
        })();
        s.record(format!("realization[{}]", k + 1), r);
    }
    for (k, cp) in ex.coproducts.iter().enumerate() {
        let r = (|| {
            let (_, el) = def.casimir(&cp.casimir).map_err(err)?;
            let got = el.coproduct().map_err(err)?;
            let mut want = TensorElement::zero(el.dim(), 2);
            for t in &cp.terms {
                let c: Q = t.coeff.trim().parse().map_err(|_| format!("bad coefficient `{}`", t.coeff))?;
                let parts = t
                    .factors
                    .iter()
                    .map(|f| {
                        let word: Vec<usize> = f.word.iter().map(|&l| l.wrapping_sub(1)).collect();
                        if f.wedge {
                            TensorElement::wedge_word(el.dim(), &word, Q::from_integer(1.into()))
                        } else {
                            TensorElement::word(el.dim(), word.into_iter().collect(), Q::from_integer(1.into()))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(err)?;
                want = want.add(&TensorElement::boxed(&parts).map_err(err)?.scale(&c)).map_err(err)?;
            }
            ensure(got == want, format!("{} terms", got.terms().len()), format!("got {:?}", got))
        })();
        s.record(format!("coproduct[{}]", k + 1), r);
    }
    for c in &ex.contractions {
        let r = (|| {
            let f = contraction_value(def, alg, theta, c, scalars)?;
            let chart_m = def.chart_m(c.m).map_err(err)?;
            let want = parse_expr(&c.value, &chart_m, &c.name).map_err(err)?;
            scalars.insert(c.name.clone(), (c.m, f.clone()));
            if f != want {
                return Err(format!("got {}", render(&f, &chart_m)));
            }
            let ok = constant_of_motion_check(&f, alg, c.m).map_err(err)?;
            ensure(ok, render(&f, &chart_m), "not a constant of motion")
        })();
        s.record(format!("invariant:{}", c.name), r);
    }
}

/// Value of a contraction check after its factor and divisor are applied.
pub fn contraction_value(
    def: &LieSystemDef,
    alg: &VGLieAlgebra,
    theta: &MultisymplecticForm,
    c: &ContractionCheck,
    scalars: &HashMap<String, (usize, RationalExpr)>,
) -> Result<RationalExpr, String> {
    let (real, el) = realization_for(def, alg, theta, &c.casimir)?;
    let split_el = split(&el, c.m)?;
    let t = match c.source {
        TensorSource::Coproduct => split_el,
        TensorSource::Diagonal => diagonal_element(&el, c.m).map_err(err)?,
        TensorSource::CoproductMinusDiagonal => split_el.sub(&diagonal_element(&el, c.m).map_err(err)?).map_err(err)?,
    };
    let ys = c
        .chain
        .iter()
        .map(|&i| {
            let y = def.symmetries.get(i.wrapping_sub(1)).ok_or_else(|| format!("symmetry {i} out of range"))?;
            real.prolonged(y, c.m).map_err(err)
        })
        .collect::<Result<Vec<VectorField>, String>>()?;
    let refs: Vec<&VectorField> = ys.iter().collect();
    let mut f = real.contract_ordered(&t, &refs, c.order).map_err(err)?;
    if let Some(k) = &c.factor {
        let k: Q = k.trim().parse().map_err(|_| format!("bad factor `{k}`"))?;
        f = f.scale(&k);
    }
    if let Some(d) = &c.divide_by {
        let (_, g) = scalars.get(d).ok_or_else(|| format!("unknown scalar `{d}`"))?;
        f = f.div(g).map_err(err)?;
    }
    Ok(f)
}

/// The form Casimirs are realized with: the Hamiltonian block's form, else
/// the volume form.
pub fn system_theta(def: &LieSystemDef) -> Option<MultisymplecticForm> {
    let ex = &def.file.expected;
    let name = ex.hamiltonian.as_ref().map(|h| &h.form).or(ex.volume_form.as_ref())?;
    def.form(name).ok().and_then(|f| check_multisymplectic(f).ok())
}

/// Computed contractions followed by the listed constants, in file order,
/// each tagged with its `m`.
pub fn symbolic_scalars(def: &LieSystemDef) -> Result<Vec<(String, usize, RationalExpr)>, String> {
    let alg = VGLieAlgebra::new(def.fields.clone()).map_err(err)?;
    let ex = &def.file.expected;
    let mut map = HashMap::new();
    let mut out = Vec::new();
    if !ex.contractions.is_empty() {
        let theta = system_theta(def).ok_or("no multisymplectic form to realize with")?;
        for c in &ex.contractions {
            let f = contraction_value(def, &alg, &theta, c, &map)?;
            map.insert(c.name.clone(), (c.m, f.clone()));
            out.push((c.name.clone(), c.m, f));
        }
    }
    for c in &ex.constants {
        let chart_m = def.chart_m(c.m).map_err(err)?;
        let f = parse_expr(&c.value, &chart_m, &c.name).map_err(err)?;
        out.push((c.name.clone(), c.m, f));
    }
    Ok(out)
}

fn numeric_drift(def: &LieSystemDef, spec: &crate::system::NumericSpec, scalars: &HashMap<String, (usize, RationalExpr)>) -> Result<String, String> {
    let sys = NumericSystem::new(&def.fields, def.tdep.clone(), spec.params.clone()).map_err(err)?;
    let fs = spec
        .drift
        .iter()
        .map(|n| scalars.get(n).cloned().map(|v| (n.clone(), v)).ok_or_else(|| format!("unknown scalar `{n}`")))
        .collect::<Result<Vec<_>, _>>()?;
    let m = fs.iter().map(|(_, (m, _))| *m).max().unwrap_or(1);
    let bounds: Vec<(f64, f64)> = spec.sample_box.iter().map(|b| (b[0], b[1])).collect();
    let mut worst: f64 = 0.0;
    let mut worst_name = String::new();
    for seed in 0..spec.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trajs = Vec::with_capacity(m);
        for _ in 0..m {
            let x0 = sample_generic(&def.chart, &bounds, &spec.params, 1e-3, &mut rng).map_err(err)?;
            let tr = integrate(&sys, &x0, spec.t_span[0], spec.t_span[1], Method::Rk4 { step: spec.step })
                .map_err(|e| format!("seed {seed}: {e}"))?;
            trajs.push(tr);
        }
        for (name, (mi, f)) in &fs {
            let d = drift(f, &trajs[..*mi], &spec.params).map_err(|e| format!("seed {seed}, {name}: {e}"))?;
            if d > worst {
                worst = d;
                worst_name = name.clone();
            }
        }
    }
    let detail = format!("max relative drift {worst:.3e} ({worst_name}) over {} seeds", spec.seeds);
    ensure(worst < spec.tolerance, detail.clone(), detail)
}

impl Realization {
    fn convention_name(&self) -> &'static str {
        match self.convention() {
            ScConvention::LieHamilton => "lie_hamilton",
            ScConvention::VectorField => "vector_field",
        }
    }
}
