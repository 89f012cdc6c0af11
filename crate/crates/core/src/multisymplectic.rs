//! Multisymplectic forms, dual coframes, invariant forms, Hamiltonian forms
//! and the brackets they induce.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::coalgebra::{CoalgebraError, TensorElement};
use crate::diffgeo::{CovTensor, DiffForm, GeoError, VectorField};
use crate::liealgebra::linalg::{det_f, inverse_f, rank_f, solve_f_rect, solve_q, split_by_monomials, FMatrix};
use crate::liealgebra::{is_locally_automorphic, is_unimodular, LieError, StructureConstants, VGLieAlgebra};
use crate::symexpr::{ChartRef, RationalExpr, Q};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MsError {
    #[error("form degree {degree} is outside 2..={dim}")]
    BadDegree { degree: usize, dim: usize },
    #[error("form is not closed")]
    NotClosed,
    #[error("contraction map has generic rank {rank} < {dim}")]
    Degenerate { rank: usize, dim: usize },
    #[error("frame is singular")]
    SingularFrame,
    #[error("algebra is not unimodular; adjoint traces {traces:?}")]
    NotUnimodular { traces: Vec<String> },
    #[error("algebra is not locally automorphic")]
    NotLocallyAutomorphic,
    #[error("field {0} is not locally Hamiltonian")]
    NotLocallyHamiltonian(usize),
    #[error("no primitive in the ansatz span")]
    NoPrimitiveInAnsatz,
    #[error("form is not in the image of the contraction map")]
    NotInImage,
    #[error("result is not invariant under field {0}")]
    NotInvariant(usize),
    #[error("element is not coadjoint-invariant")]
    NotCoadInvariant,
    #[error("bracket leaves the span of the generators")]
    NotClosedBracket,
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
}

/// Closed, generically 1-nondegenerate form.
#[derive(Clone, Debug, PartialEq)]
pub struct MultisymplecticForm {
    form: DiffForm,
    rank: usize,
    degeneracy_locus: Option<RationalExpr>,
}

impl MultisymplecticForm {
    pub fn form(&self) -> &DiffForm {
        &self.form
    }

    pub fn degree(&self) -> usize {
        self.form.degree()
    }

    pub fn chart(&self) -> &ChartRef {
        self.form.chart()
    }

    /// Generic rank of the contraction matrix.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Determinant of a nonsingular maximal minor of the contraction matrix;
    /// injectivity may fail only on its zero set.
    pub fn degeneracy_locus(&self) -> Option<&RationalExpr> {
        self.degeneracy_locus.as_ref()
    }

    /// `ι_X Θ`.
    pub fn contract(&self, x: &VectorField) -> Result<DiffForm, MsError> {
        Ok(self.form.interior(x)?)
    }

    /// The unique `X` with `ι_X Θ = ξ`.
    pub fn hamiltonian_field(&self, xi: &DiffForm) -> Result<VectorField, MsError> {
        let n = self.form.chart().dim();
        let cols = self.columns();
        let m = self.contraction_matrix(&cols);
        // Rows are equations (one per column tuple), unknowns are Xⁱ.
        let a: FMatrix = (0..cols.len()).map(|j| (0..n).map(|i| m[i][j].clone()).collect()).collect();
        let rhs: Vec<RationalExpr> = cols.iter().map(|c| xi.coeff(c)).collect();
        if xi.terms().keys().any(|k| !cols.contains(k)) {
            return Err(MsError::NotInImage);
        }
        let x = solve_f_rect(&a, &rhs).ok_or(MsError::NotInImage)?;
        Ok(VectorField::new(self.form.chart().clone(), x)?)
    }

    fn columns(&self) -> Vec<Vec<usize>> {
        let n = self.form.chart().dim();
        let mut cols = BTreeSet::new();
        for i in 0..n {
            let d = VectorField::coordinate(self.form.chart().clone(), i).expect("in range");
            for k in self.form.interior(&d).expect("degree ≥ 2").terms().keys() {
                cols.insert(k.clone());
            }
        }
        cols.into_iter().collect()
    }

    fn contraction_matrix(&self, cols: &[Vec<usize>]) -> FMatrix {
        contraction_matrix(&self.form, cols)
    }
}

fn contraction_matrix(form: &DiffForm, cols: &[Vec<usize>]) -> FMatrix {
    let n = form.chart().dim();
    (0..n)
        .map(|i| {
            let d = VectorField::coordinate(form.chart().clone(), i).expect("in range");
            let c = form.interior(&d).expect("degree ≥ 1");
            cols.iter().map(|k| c.coeff(k)).collect()
        })
        .collect()
}

/// Certify closedness and generic 1-nondegeneracy.
pub fn check_multisymplectic(form: &DiffForm) -> Result<MultisymplecticForm, MsError> {
    let dim = form.chart().dim();
    let k = form.degree();
    if k < 2 || k > dim {
        return Err(MsError::BadDegree { degree: k, dim });
    }
    if !form.d().is_zero() {
        return Err(MsError::NotClosed);
    }
    let ms = MultisymplecticForm { form: form.clone(), rank: 0, degeneracy_locus: None };
    let cols = ms.columns();
    let m = contraction_matrix(form, &cols);
    let rank = rank_f(&m);
    if rank < dim {
        return Err(MsError::Degenerate { rank, dim });
    }
    // Greedy choice of independent columns for a nonsingular maximal minor.
    let mut chosen: Vec<usize> = Vec::new();
    for j in 0..cols.len() {
        let mut trial = chosen.clone();
        trial.push(j);
        let sub: FMatrix = trial.iter().map(|&c| m.iter().map(|row| row[c].clone()).collect()).collect();
        if rank_f(&sub) == trial.len() {
            chosen = trial;
        }
        if chosen.len() == dim {
            break;
        }
    }
    let minor: FMatrix = m.iter().map(|row| chosen.iter().map(|&c| row[c].clone()).collect()).collect();
    let det = det_f(&minor);
    Ok(MultisymplecticForm { form: form.clone(), rank, degeneracy_locus: Some(det) })
}

/// Forms `η_α` with `η_α(X_β) = δ_αβ`.
pub fn dual_coframe(fields: &[VectorField]) -> Result<Vec<DiffForm>, MsError> {
    let chart = fields.first().ok_or(MsError::SingularFrame)?.chart().clone();
    let n = chart.dim();
    if fields.len() != n {
        return Err(MsError::SingularFrame);
    }
    // F[β][i] = X_βⁱ; the coframe matrix E satisfies E Fᵀ = I.
    let ft: FMatrix = (0..n).map(|i| fields.iter().map(|f| f.coeff(i).clone()).collect()).collect();
    let e = inverse_f(&ft).ok_or(MsError::SingularFrame)?;
    e.into_iter()
        .map(|row| Ok(DiffForm::from_terms(chart.clone(), 1, row.into_iter().enumerate().map(|(i, c)| (vec![i], c)))?))
        .collect()
}

/// All `p`-fold wedge products `η_{i₁} ∧ … ∧ η_{i_p}`, `i₁ < … < i_p`.
pub fn wedge_products(coframe: &[DiffForm], p: usize) -> Result<Vec<DiffForm>, MsError> {
    let chart = coframe.first().ok_or(MsError::SingularFrame)?.chart().clone();
    let mut out = Vec::new();
    for combo in combinations(coframe.len(), p) {
        let mut w = DiffForm::scalar(chart.clone(), RationalExpr::one());
        for i in combo {
            w = w.wedge(&coframe[i])?;
        }
        out.push(w);
    }
    Ok(out)
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Products of `k − 2` coframe forms: the default space searched for
/// Hamiltonian `(k−2)`-forms.
pub fn default_ansatz(alg: &VGLieAlgebra, k: usize) -> Result<Vec<DiffForm>, MsError> {
    if k < 2 {
        return Err(MsError::BadDegree { degree: k, dim: alg.chart().dim() });
    }
    wedge_products(&dual_coframe(alg.basis())?, k - 2)
}

fn check_invariant_form(alg: &VGLieAlgebra, w: &DiffForm) -> Result<(), MsError> {
    for (a, x) in alg.basis().iter().enumerate() {
        if !w.lie_derivative(x)?.is_zero() {
            return Err(MsError::NotInvariant(a));
        }
    }
    Ok(())
}

/// Wedge products of degree `p` of the coframe dual to `symmetries`; each is
/// verified to be annihilated by every basis field of `alg`.
pub fn invariant_form_space(alg: &VGLieAlgebra, symmetries: &[VectorField], p: usize) -> Result<Vec<DiffForm>, MsError> {
    if symmetries.len() != alg.chart().dim() {
        return Err(MsError::SingularFrame);
    }
    let nu = dual_coframe(symmetries)?;
    let forms = wedge_products(&nu, p)?;
    for w in &forms {
        check_invariant_form(alg, w)?;
    }
    Ok(forms)
}

/// `η¹ ∧ … ∧ ηʳ` of the algebra's own coframe, certified invariant.
pub fn invariant_volume(alg: &VGLieAlgebra) -> Result<MultisymplecticForm, MsError> {
    let uni = is_unimodular(alg.sc());
    if !uni.unimodular {
        return Err(MsError::NotUnimodular { traces: uni.traces.iter().map(ToString::to_string).collect() });
    }
    if !is_locally_automorphic(alg).locally_automorphic {
        return Err(MsError::NotLocallyAutomorphic);
    }
    let eta = dual_coframe(alg.basis())?;
    let vol = wedge_products(&eta, eta.len())?.pop().expect("one top-degree product");
    check_invariant_form(alg, &vol)?;
    check_multisymplectic(&vol)
}

/// Realize an element of `T(g*)` by substituting `e*_α ↦ η_α`.
pub fn algebra_invariant_to_tensor(alg: &VGLieAlgebra, omega: &TensorElement) -> Result<CovTensor, MsError> {
    if omega.factors() != 1 || omega.dim() != alg.dim() {
        return Err(CoalgebraError::DimensionMismatch(omega.dim(), alg.dim()).into());
    }
    if !omega.is_invariant(alg.sc(), true)? {
        return Err(MsError::NotCoadInvariant);
    }
    let chart = alg.chart().clone();
    let eta: Vec<CovTensor> = dual_coframe(alg.basis())?.iter().map(DiffForm::to_tensor).collect();
    let mut acc: Option<CovTensor> = None;
    for (key, k) in omega.terms() {
        let mut t = CovTensor::scalar(chart.clone(), RationalExpr::from_q(k.clone()));
        for &l in &key[0] {
            t = t.tensor(&eta[l])?;
        }
        acc = Some(match acc {
            None => t,
            Some(a) => a.add(&t)?,
        });
    }
    let t = acc.unwrap_or_else(|| CovTensor::zero(chart, 0));
    for (a, x) in alg.basis().iter().enumerate() {
        if !t.lie_derivative(x)?.is_zero() {
            return Err(MsError::NotInvariant(a));
        }
    }
    Ok(t)
}

/// As [`algebra_invariant_to_tensor`], read back as a differential form. The
/// element must be antisymmetric; with unnormalized signed sums the form is
/// the tensor's component on increasing index tuples.
pub fn algebra_invariant_to_form(alg: &VGLieAlgebra, omega: &TensorElement) -> Result<DiffForm, MsError> {
    if !omega.is_antisymmetric() {
        return Err(CoalgebraError::WrongSymmetry.into());
    }
    let t = algebra_invariant_to_tensor(alg, omega)?;
    let chart = alg.chart().clone();
    if t.is_zero() {
        return Ok(DiffForm::zero(chart, omega.terms().keys().next().map_or(0, |k| k[0].len())));
    }
    let terms = t.terms().iter().filter(|(k, _)| k.windows(2).all(|w| w[0] < w[1])).map(|(k, c)| (k.clone(), c.clone()));
    Ok(DiffForm::from_terms(chart, t.rank(), terms)?)
}

/// Solve `d(Σ cᵢ ansatzᵢ) = ι_X Θ` for constants `cᵢ`.
pub fn hamiltonian_form(x: &VectorField, theta: &MultisymplecticForm, ansatz: &[DiffForm]) -> Result<DiffForm, MsError> {
    let target = theta.contract(x)?;
    let chart = theta.chart().clone();
    let k = theta.degree();
    if !target.d().is_zero() {
        return Err(MsError::NotLocallyHamiltonian(0));
    }
    if target.is_zero() {
        return Ok(DiffForm::zero(chart, k - 2));
    }
    let dans: Vec<DiffForm> = ansatz.iter().map(DiffForm::d).collect();
    let nu = ansatz.len();
    let mut keys = BTreeSet::new();
    for w in dans.iter().chain(std::iter::once(&target)) {
        keys.extend(w.terms().keys().cloned());
    }
    let mut rows = Vec::new();
    for key in keys {
        let mut exprs: Vec<(usize, RationalExpr)> = dans.iter().enumerate().map(|(i, w)| (i, w.coeff(&key))).collect();
        exprs.push((nu, target.coeff(&key)));
        rows.extend(split_by_monomials(&exprs, nu + 1));
    }
    let (a, rhs): (Vec<Vec<Q>>, Vec<Q>) = rows
        .into_iter()
        .map(|mut r| {
            let b = r.pop().expect("rhs");
            (r, b)
        })
        .unzip();
    let c = solve_q(&a, &rhs, nu).ok_or(MsError::NoPrimitiveInAnsatz)?;
    let mut out = DiffForm::zero(chart, k - 2);
    for (ci, w) in c.iter().zip(ansatz) {
        if !ci.is_zero() {
            out = out.add(&w.scale(ci))?;
        }
    }
    Ok(out)
}

/// `{ξ, ζ} = ι_{[Y,X]} Θ` where `ι_X Θ = ξ`, `ι_Y Θ = ζ`.
pub fn bracket_km1(xi: &DiffForm, zeta: &DiffForm, theta: &MultisymplecticForm) -> Result<DiffForm, MsError> {
    let x = theta.hamiltonian_field(xi)?;
    let y = theta.hamiltonian_field(zeta)?;
    theta.contract(&y.bracket(&x)?)
}

/// `{θ_X, θ_Y} = ι_Y ι_X Θ` where `dθ_X = ι_X Θ`, `dθ_Y = ι_Y Θ`.
pub fn bracket_km2(theta_x: &DiffForm, theta_y: &DiffForm, theta: &MultisymplecticForm) -> Result<DiffForm, MsError> {
    let x = theta.hamiltonian_field(&theta_x.d())?;
    let y = theta.hamiltonian_field(&theta_y.d())?;
    Ok(theta.contract(&x)?.interior(&y)?)
}

/// Constants `k` with `Σ kᵢ basisᵢ = target`, for forms.
pub fn express_form_in_span(target: &DiffForm, basis: &[DiffForm]) -> Option<Vec<Q>> {
    let nb = basis.len();
    let mut keys = BTreeSet::new();
    for w in basis.iter().chain(std::iter::once(target)) {
        keys.extend(w.terms().keys().cloned());
    }
    let mut rows = Vec::new();
    for key in keys {
        let mut exprs: Vec<(usize, RationalExpr)> = basis.iter().enumerate().map(|(i, w)| (i, w.coeff(&key))).collect();
        exprs.push((nb, target.coeff(&key)));
        rows.extend(split_by_monomials(&exprs, nb + 1));
    }
    let (a, rhs): (Vec<Vec<Q>>, Vec<Q>) = rows
        .into_iter()
        .map(|mut r| {
            let b = r.pop().expect("rhs");
            (r, b)
        })
        .unzip();
    solve_q(&a, &rhs, nb)
}

/// Generators `ι_{X_α} Θ` with the structure constants of their bracket.
#[derive(Clone, Debug, PartialEq)]
pub struct LieHamiltonAlgebra {
    pub generators: Vec<DiffForm>,
    pub sc: StructureConstants,
}

pub fn minimal_lie_hamilton_algebra(alg: &VGLieAlgebra, theta: &MultisymplecticForm) -> Result<LieHamiltonAlgebra, MsError> {
    let mut gens = Vec::with_capacity(alg.dim());
    for (a, x) in alg.basis().iter().enumerate() {
        let g = theta.contract(x)?;
        if !g.d().is_zero() {
            return Err(MsError::NotLocallyHamiltonian(a));
        }
        gens.push(g);
    }
    let r = gens.len();
    let mut entries = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            let br = bracket_km1(&gens[a], &gens[b], theta)?;
            let k = express_form_in_span(&br, &gens).ok_or(MsError::NotClosedBracket)?;
            for (g, v) in k.into_iter().enumerate() {
                if !v.is_zero() {
                    entries.push((a, b, g, v));
                }
            }
        }
    }
    let sc = StructureConstants::from_sparse(r, &entries)?;
    Ok(LieHamiltonAlgebra { generators: gens, sc })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::symexpr::Chart;

    #[test]
    fn degenerate_plane_in_space() {
        let c = Arc::new(Chart::new(&["x", "y", "z"]).unwrap());
        let w = DiffForm::parse(c, 2, &[(vec!["x", "y"], "1")]).unwrap();
        assert_eq!(check_multisymplectic(&w), Err(MsError::Degenerate { rank: 2, dim: 3 }));
    }

    #[test]
    fn coordinate_coframe() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let f: Vec<VectorField> = (0..2).map(|i| VectorField::coordinate(c.clone(), i).unwrap()).collect();
        let eta = dual_coframe(&f).unwrap();
        assert_eq!(eta[0], DiffForm::dx(c.clone(), 0).unwrap());
        assert_eq!(eta[1], DiffForm::dx(c, 1).unwrap());
    }

    #[test]
    fn translations_form_abelian_lie_hamilton_algebra() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let f: Vec<VectorField> = (0..2).map(|i| VectorField::coordinate(c.clone(), i).unwrap()).collect();
        let alg = VGLieAlgebra::new(f).unwrap();
        let vol = invariant_volume(&alg).unwrap();
        let lh = minimal_lie_hamilton_algebra(&alg, &vol).unwrap();
        assert!(lh.sc.is_abelian());
        let zero = VectorField::zero(c);
        assert!(hamiltonian_form(&zero, &vol, &[]).unwrap().is_zero());
    }

    #[test]
    fn affine_volume_rejected() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let x1 = VectorField::parse(c.clone(), &["1", "0"]).unwrap();
        let x2 = VectorField::parse(c, &["x", "1"]).unwrap();
        let alg = VGLieAlgebra::new(vec![x1, x2]).unwrap();
        assert!(matches!(invariant_volume(&alg), Err(MsError::NotUnimodular { .. })));
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }
}
