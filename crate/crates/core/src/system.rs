//! The JSON system-definition format and its parsed form.

use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalgebra::{element_from_terms, AbstractCasimir, CasimirKind, CasimirTerm, CoalgebraError, TensorElement};
use crate::diffgeo::{product_chart, DiffForm, GeoError, VectorField};
use crate::liealgebra::{ScEntry, StructureConstants};
use crate::numeric::{NumError, TCoefficient};
use crate::prolong_invariants::{ChainOrder, ScConvention};
use crate::symexpr::{parse, Chart, ChartRef, RationalExpr, SymError, Q};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("unsupported schema_version {0}")]
    Version(u32),
    #[error("{context}: {source}")]
    Expr { context: String, source: SymError },
    #[error("{context}: {msg}")]
    Schema { context: String, msg: String },
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
    #[error(transparent)]
    Num(#[from] NumError),
}

fn schema(context: impl Into<String>, msg: impl Into<String>) -> SystemError {
    SystemError::Schema { context: context.into(), msg: msg.into() }
}

/// Form given by `coeff * d(coords[0]) ∧ d(coords[1]) ∧ …` terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub degree: usize,
    pub terms: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormTerm {
    pub coords: Vec<String>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CasimirSpec {
    pub name: String,
    pub kind: CasimirKind,
    /// Structure constants the element is written against.
    #[serde(default = "default_convention")]
    pub convention: ScConvention,
    /// Abstract structure constants; derived from the fields when absent.
    #[serde(default)]
    pub sc: Option<Vec<ScEntry>>,
    pub terms: Vec<CasimirTerm>,
}

fn default_convention() -> ScConvention {
    ScConvention::LieHamilton
}

/// Structure constants from 1-based entries with rational values.
pub fn sc_from_entries(dim: usize, entries: &[ScEntry], context: &str) -> Result<StructureConstants, SystemError> {
    let mut sparse = Vec::with_capacity(entries.len());
    for (k, e) in entries.iter().enumerate() {
        let ctx = format!("{context}[{k}]");
        let v: Q = e.value.trim().parse().map_err(|_| schema(&ctx, format!("`{}` is not a rational number", e.value)))?;
        if e.alpha == 0 || e.beta == 0 || e.gamma == 0 {
            return Err(schema(ctx, "indices are 1-based"));
        }
        sparse.push((e.alpha - 1, e.beta - 1, e.gamma - 1, v));
    }
    StructureConstants::from_sparse(dim, &sparse).map_err(|e| schema(context, e.to_string()))
}

/// `coeff · η_{i₁} ∧ … ∧ η_{i_p}` in a coframe, 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoframeTerm {
    pub coeff: String,
    pub indices: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    /// Dual to the algebra basis.
    #[default]
    Fields,
    /// Dual to the listed symmetries.
    Symmetries,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoframeRelation {
    #[serde(default)]
    pub coframe: FrameKind,
    /// 1-based index of the differentiated coframe element.
    pub form: usize,
    pub terms: Vec<CoframeTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormExpansion {
    pub form: String,
    #[serde(default)]
    pub coframe: FrameKind,
    /// Compare against `d(Σ …)` instead of `Σ …`.
    #[serde(default)]
    pub exterior_derivative: bool,
    pub terms: Vec<CoframeTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantFormCheck {
    pub form: FormSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianExpected {
    /// Name of the multisymplectic form in `forms`.
    pub form: String,
    /// `ι_{X_α}Θ` in coordinates.
    pub differentials: Vec<FormSpec>,
    /// Hamiltonian forms as combinations of the field coframe.
    #[serde(default)]
    pub primitives: Vec<Vec<CoframeTerm>>,
    /// Hamiltonian forms in coordinates.
    #[serde(default)]
    pub primitives_coords: Vec<FormSpec>,
    pub lie_hamilton_sc: Vec<ScEntry>,
}

/// Letters refer to the expected differentials; `slots[j]` is the word in slot `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationTerm {
    pub coeff: String,
    pub slots: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealizationCheck {
    pub casimir: String,
    pub m: usize,
    /// Coefficient of the slot-wise sum `Υ(C)^{[m]}` included in the expectation.
    #[serde(default)]
    pub diagonal: Option<String>,
    pub terms: Vec<RealizationTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFactor {
    pub word: Vec<usize>,
    #[serde(default)]
    pub wedge: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoproductTerm {
    pub coeff: String,
    pub factors: Vec<BoxFactor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoproductCheck {
    pub casimir: String,
    pub terms: Vec<CoproductTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorSource {
    /// `Υ^{(m)}(Δ^{(m−1)} C)`.
    Coproduct,
    /// `Υ(C)^{[m]}`.
    Diagonal,
    /// `Υ^{(m)}(Δ^{(m−1)} C) − Υ(C)^{[m]}`.
    CoproductMinusDiagonal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionCheck {
    pub name: String,
    pub casimir: String,
    pub m: usize,
    pub source: TensorSource,
    /// Operator word `ι_{Y_{c₁}} ι_{Y_{c₂}} …` as written, 1-based.
    pub chain: Vec<usize>,
    #[serde(default)]
    pub factor: Option<String>,
    /// Name of an earlier contraction or constant to divide by.
    #[serde(default)]
    pub divide_by: Option<String>,
    /// Slot assignment of the written chain.
    #[serde(default)]
    pub order: ChainOrder,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantCheck {
    pub name: String,
    pub m: usize,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobianCheck {
    pub scalars: Vec<String>,
    pub wrt: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expected {
    pub structure_constants: Option<Vec<ScEntry>>,
    pub locally_automorphic: Option<bool>,
    pub frame_determinant: Option<String>,
    pub unimodular: Option<bool>,
    pub smallest_m: Option<usize>,
    pub coframe: Option<Vec<Vec<String>>>,
    pub symmetry_degree: Option<u16>,
    /// `e_i ↦ Σ_j map[i][j] Y_j` is an isomorphism from the field constants
    /// to the symmetry constants.
    pub symmetry_isomorphism: Option<Vec<Vec<String>>>,
    pub symmetry_coframe: Option<Vec<Vec<String>>>,
    pub coframe_differentials: Vec<CoframeRelation>,
    pub volume_form: Option<String>,
    pub form_expansions: Vec<FormExpansion>,
    pub certify: Vec<String>,
    pub invariant_forms: Vec<InvariantFormCheck>,
    pub hamiltonian: Option<HamiltonianExpected>,
    pub realizations: Vec<RealizationCheck>,
    pub coproducts: Vec<CoproductCheck>,
    pub contractions: Vec<ContractionCheck>,
    pub constants: Vec<ConstantCheck>,
    pub jacobians: Vec<JacobianCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericSpec {
    /// Values for the chart parameters.
    #[serde(default)]
    pub params: Vec<f64>,
    /// Sampling box per coordinate.
    #[serde(rename = "box")]
    pub sample_box: Vec<[f64; 2]>,
    pub t_span: [f64; 2],
    pub step: f64,
    pub seeds: u64,
    pub tolerance: f64,
    /// Names of constants (from `expected`) whose drift is measured.
    pub drift: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub schema_version: u32,
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub coordinates: Vec<String>,
    #[serde(default)]
    pub parameters: Vec<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
    pub fields: IndexMap<String, Vec<String>>,
    #[serde(default)]
    pub tdep: IndexMap<String, String>,
    #[serde(default)]
    pub forms: IndexMap<String, FormSpec>,
    #[serde(default)]
    pub casimirs: Vec<CasimirSpec>,
    #[serde(default)]
    pub symmetries: IndexMap<String, Vec<String>>,
    #[serde(default)]
    pub numeric: Option<NumericSpec>,
    #[serde(default)]
    pub expected: Expected,
}

/// Parsed system: every expression checked against its chart.
#[derive(Clone, Debug)]
pub struct LieSystemDef {
    pub id: String,
    pub file: SystemFile,
    pub chart: ChartRef,
    pub field_names: Vec<String>,
    pub fields: Vec<VectorField>,
    pub tdep: Vec<TCoefficient>,
    pub forms: IndexMap<String, DiffForm>,
    pub casimirs: IndexMap<String, (CasimirSpec, TensorElement)>,
    pub symmetry_names: Vec<String>,
    pub symmetries: Vec<VectorField>,
}

pub fn parse_expr(text: &str, chart: &Chart, context: &str) -> Result<RationalExpr, SystemError> {
    parse(text, chart).map_err(|source| SystemError::Expr { context: context.to_string(), source })
}

pub fn parse_field(chart: &ChartRef, comps: &[String], context: &str) -> Result<VectorField, SystemError> {
    if comps.len() != chart.dim() {
        return Err(schema(context, format!("{} components for {} coordinates", comps.len(), chart.dim())));
    }
    let coeffs = comps
        .iter()
        .enumerate()
        .map(|(i, c)| parse_expr(c, chart, &format!("{context}[{}]", i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VectorField::new(chart.clone(), coeffs)?)
}

pub fn parse_form(chart: &ChartRef, spec: &FormSpec, context: &str) -> Result<DiffForm, SystemError> {
    let mut terms = Vec::with_capacity(spec.terms.len());
    for (k, t) in spec.terms.iter().enumerate() {
        if t.coords.len() != spec.degree {
            return Err(schema(format!("{context}.terms[{k}]"), format!("expected {} coordinates", spec.degree)));
        }
        let idx = t
            .coords
            .iter()
            .map(|n| chart.coord_index(n).map_err(|source| SystemError::Expr { context: format!("{context}.terms[{k}]"), source }))
            .collect::<Result<Vec<_>, _>>()?;
        terms.push((idx, parse_expr(&t.coeff, chart, &format!("{context}.terms[{k}].coeff"))?));
    }
    Ok(DiffForm::from_terms(chart.clone(), spec.degree, terms)?)
}

/// Coframe components given per coordinate, as 1-forms.
pub fn parse_one_forms(chart: &ChartRef, rows: &[Vec<String>], context: &str) -> Result<Vec<DiffForm>, SystemError> {
    rows.iter()
        .enumerate()
        .map(|(a, row)| {
            let f = parse_field(chart, row, &format!("{context}[{}]", a + 1))?;
            Ok(DiffForm::from_terms(chart.clone(), 1, f.coeffs().iter().cloned().enumerate().map(|(i, c)| (vec![i], c)))?)
        })
        .collect()
}

/// `Σ coeff · η_{i₁} ∧ …` over a coframe.
pub fn coframe_combination(coframe: &[DiffForm], terms: &[CoframeTerm], chart: &ChartRef, context: &str) -> Result<DiffForm, SystemError> {
    let degree = terms.first().map_or(0, |t| t.indices.len());
    let mut acc = DiffForm::zero(chart.clone(), degree);
    for (k, t) in terms.iter().enumerate() {
        let ctx = format!("{context}[{k}]");
        let mut w = DiffForm::scalar(chart.clone(), parse_expr(&t.coeff, chart, &ctx)?);
        for &i in &t.indices {
            let eta = coframe.get(i.wrapping_sub(1)).ok_or_else(|| schema(&ctx, format!("coframe index {i} out of range")))?;
            w = w.wedge(eta)?;
        }
        if w.degree() != degree {
            return Err(schema(ctx, "mixed degrees"));
        }
        acc = acc.add(&w)?;
    }
    Ok(acc)
}

impl LieSystemDef {
    pub fn from_json(text: &str) -> Result<Self, SystemError> {
        let file: SystemFile = serde_json::from_str(text).map_err(|e| SystemError::Json(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: SystemFile) -> Result<Self, SystemError> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(SystemError::Version(file.schema_version));
        }
        let chart = Chart::with_params(&file.coordinates, &file.parameters)
            .and_then(|c| c.with_constraints(&file.constraints))
            .map_err(|source| SystemError::Expr { context: "chart".into(), source })?;
        let chart = Arc::new(chart);
        if file.fields.is_empty() {
            return Err(schema("fields", "at least one field is required"));
        }
        let field_names: Vec<String> = file.fields.keys().cloned().collect();
        let fields = file
            .fields
            .iter()
            .map(|(n, comps)| parse_field(&chart, comps, &format!("fields.{n}")))
            .collect::<Result<Vec<_>, _>>()?;
        for name in file.tdep.keys() {
            if !file.fields.contains_key(name) {
                return Err(schema("tdep", format!("unknown field `{name}`")));
            }
        }
        let tdep = field_names
            .iter()
            .map(|n| match file.tdep.get(n) {
                Some(t) => TCoefficient::parse(t),
                None => Ok(TCoefficient::constant(0.0)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let forms = file
            .forms
            .iter()
            .map(|(n, spec)| Ok((n.clone(), parse_form(&chart, spec, &format!("forms.{n}"))?)))
            .collect::<Result<IndexMap<_, _>, SystemError>>()?;
        let mut casimirs = IndexMap::new();
        for c in &file.casimirs {
            let element = element_from_terms(fields.len(), &c.terms)?;
            if casimirs.insert(c.name.clone(), (c.clone(), element)).is_some() {
                return Err(schema("casimirs", format!("duplicate name `{}`", c.name)));
            }
        }
        let symmetry_names = file.symmetries.keys().cloned().collect();
        let symmetries = file
            .symmetries
            .iter()
            .map(|(n, comps)| parse_field(&chart, comps, &format!("symmetries.{n}")))
            .collect::<Result<Vec<_>, _>>()?;
        let id = file.id.clone().unwrap_or_else(|| "system".into());
        Ok(LieSystemDef { id, file, chart, field_names, fields, tdep, forms, casimirs, symmetry_names, symmetries })
    }

    pub fn field(&self, name: &str) -> Result<&VectorField, SystemError> {
        self.field_names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.fields[i])
            .ok_or_else(|| schema("fields", format!("unknown field `{name}`")))
    }

    pub fn form(&self, name: &str) -> Result<&DiffForm, SystemError> {
        self.forms.get(name).ok_or_else(|| schema("forms", format!("unknown form `{name}`")))
    }

    pub fn casimir(&self, name: &str) -> Result<&(CasimirSpec, TensorElement), SystemError> {
        self.casimirs.get(name).ok_or_else(|| schema("casimirs", format!("unknown casimir `{name}`")))
    }

    /// Chart of the `m`-fold product, the base chart itself for `m = 1`.
    pub fn chart_m(&self, m: usize) -> Result<ChartRef, SystemError> {
        if m == 0 {
            return Err(schema("m", "must be at least 1"));
        }
        Ok(if m == 1 { self.chart.clone() } else { product_chart(&self.chart, m)? })
    }

    /// Validate a Casimir against given structure constants.
    pub fn validated_casimir(&self, name: &str, sc: &StructureConstants) -> Result<AbstractCasimir, SystemError> {
        let (spec, el) = self.casimir(name)?;
        Ok(AbstractCasimir::new(sc, el.clone(), spec.kind)?)
    }
}
