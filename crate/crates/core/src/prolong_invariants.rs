//! Tensor-field realizations of coalgebra elements on diagonal prolongations,
//! invariants built from Casimirs and the constants of motion read off them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalgebra::{CoalgebraError, TensorElement};
use crate::diffgeo::{product_chart, CovTensor, DiffForm, GeoError, VectorField};
use crate::liealgebra::linalg::{det_f, rank_f, FMatrix};
use crate::liealgebra::{verify_isomorphic_sc, LieError, StructureConstants, VGLieAlgebra};
use crate::multisymplectic::{minimal_lie_hamilton_algebra, MsError, MultisymplecticForm};
use crate::symexpr::{render, ChartRef, RationalExpr, Q};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("element has dimension {got}, algebra has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("abstract structure constants do not match the declared convention")]
    ConventionMismatch,
    #[error("the form is not invariant under basis field {0}")]
    FormNotInvariant(usize),
    #[error("symmetry {symmetry} does not commute with basis field {field}")]
    NotSymmetry { symmetry: usize, field: usize },
    #[error("chain of length {chain} exceeds tensor rank {rank}")]
    RankUnderflow { chain: usize, rank: usize },
    #[error("chain index {0} is out of range")]
    BadChainIndex(usize),
    #[error("{0} is not annihilated by the prolonged algebra")]
    NotConstant(String),
    #[error("{got} scalars for {expected} coordinates")]
    CountMismatch { expected: usize, got: usize },
    #[error("prolonged fields stay dependent up to m = {0}")]
    NotReached(usize),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Ms(#[from] MsError),
    #[error(transparent)]
    Coalgebra(#[from] CoalgebraError),
}

type Result<T> = std::result::Result<T, InvariantError>;

/// How the abstract structure constants relate to the basis fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScConvention {
    /// Abstract constants equal those of the generators `ι_{X_α}Θ` under the
    /// `(k−1)`-form bracket; `ad_v` is realized by `ℒ_{−X_v}`.
    LieHamilton,
    /// Abstract constants equal those of the fields `X_α`; `ad_v` is
    /// realized by `ℒ_{X_v}`.
    VectorField,
}

/// Which tensor slot each `ι` of a written chain `ι_{Y_a}ι_{Y_b}…` consumes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainOrder {
    /// `Y_a` fills slot 1, `Y_b` slot 2, and so on.
    AsWritten,
    /// The rightmost `ι` binds first: `Y_a` fills the last slot.
    Reversed,
    /// Mean of the two binding orders.
    #[default]
    Averaged,
}

/// `Υ^{(m)}`: letter `v_α` in factor `j` becomes `ι_{X_α}Θ` in slot `j`.
#[derive(Clone, Debug)]
pub struct Realization {
    alg: VGLieAlgebra,
    theta: MultisymplecticForm,
    sc: StructureConstants,
    convention: ScConvention,
    generators: Vec<DiffForm>,
    tensors: Vec<CovTensor>,
}

impl Realization {
    /// Verifies `ℒ_{X_α}Θ = 0` and that `sc` matches `convention`.
    pub fn new(alg: VGLieAlgebra, theta: MultisymplecticForm, sc: StructureConstants, convention: ScConvention) -> Result<Self> {
        if sc.dim() != alg.dim() {
            return Err(InvariantError::DimensionMismatch { expected: alg.dim(), got: sc.dim() });
        }
        for (a, x) in alg.basis().iter().enumerate() {
            if !theta.form().lie_derivative(x)?.is_zero() {
                return Err(InvariantError::FormNotInvariant(a));
            }
        }
        let lh = minimal_lie_hamilton_algebra(&alg, &theta)?;
        let expected = match convention {
            ScConvention::LieHamilton => lh.sc.clone(),
            ScConvention::VectorField => lh.sc.negated(),
        };
        let n = sc.dim();
        let id: Vec<Vec<Q>> = (0..n).map(|i| (0..n).map(|j| Q::from_integer(((i == j) as i64).into())).collect()).collect();
        if !verify_isomorphic_sc(&sc, &expected, &id)? {
            return Err(InvariantError::ConventionMismatch);
        }
        let tensors = lh.generators.iter().map(DiffForm::to_tensor).collect();
        Ok(Realization { alg, theta, sc, convention, generators: lh.generators, tensors })
    }

    pub fn algebra(&self) -> &VGLieAlgebra {
        &self.alg
    }

    pub fn theta(&self) -> &MultisymplecticForm {
        &self.theta
    }

    pub fn sc(&self) -> &StructureConstants {
        &self.sc
    }

    pub fn convention(&self) -> ScConvention {
        self.convention
    }

    /// `dθ_α = ι_{X_α}Θ`.
    pub fn generators(&self) -> &[DiffForm] {
        &self.generators
    }

    /// The base chart for `m = 1`, otherwise the `m`-fold product.
    pub fn chart(&self, m: usize) -> Result<ChartRef> {
        let base = self.alg.chart();
        if m == 1 {
            Ok(base.clone())
        } else {
            Ok(product_chart(base, m)?)
        }
    }

    /// Prolonged field `X^{[m]}` onto [`Realization::chart`].
    pub fn prolonged(&self, x: &VectorField, m: usize) -> Result<VectorField> {
        Ok(if m == 1 { x.clone() } else { x.diagonal_on(&self.chart(m)?, m)? })
    }

    fn check_dim(&self, t: &TensorElement) -> Result<()> {
        if t.dim() != self.alg.dim() {
            return Err(InvariantError::DimensionMismatch { expected: self.alg.dim(), got: t.dim() });
        }
        Ok(())
    }

    /// `Υ^{(m)}(t)` with `m` the number of factors of `t`.
    pub fn realize(&self, t: &TensorElement) -> Result<CovTensor> {
        self.check_dim(t)?;
        let m = t.factors();
        let chart = self.chart(m)?;
        let lifted: Vec<Vec<CovTensor>> = (1..=m)
            .map(|slot| {
                self.tensors
                    .iter()
                    .map(|g| if m == 1 { Ok(g.clone()) } else { g.lift(&chart, m, slot) })
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<_, _>>()?;
        let mut acc: Option<CovTensor> = None;
        for (key, k) in t.terms() {
            let mut term = CovTensor::scalar(chart.clone(), RationalExpr::from_q(k.clone()));
            for (slot, word) in key.iter().enumerate() {
                for &l in word {
                    term = term.tensor(&lifted[slot][l])?;
                }
            }
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.unwrap_or_else(|| CovTensor::zero(chart, 0)))
    }

    /// `Υ^{(m)}(t)(Y₁, …, Y_s)` for a chain that fully contracts every term,
    /// computed factor by factor without materializing the tensor.
    pub fn contract_realized(&self, t: &TensorElement, chain: &[&VectorField]) -> Result<RationalExpr> {
        self.check_dim(t)?;
        let m = t.factors();
        let chart = self.chart(m)?;
        let deg = self.theta.degree() - 1;
        let lifted: Vec<Vec<DiffForm>> = (1..=m)
            .map(|slot| {
                self.generators
                    .iter()
                    .map(|g| if m == 1 { Ok(g.clone()) } else { g.lift(&chart, m, slot) })
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<_, _>>()?;
        let mut cache: std::collections::HashMap<(usize, usize, usize), RationalExpr> = Default::default();
        let mut total = RationalExpr::zero();
        for (key, k) in t.terms() {
            let letters: Vec<(usize, usize)> =
                key.iter().enumerate().flat_map(|(s, w)| w.iter().map(move |&l| (s, l))).collect();
            let rank = letters.len() * deg;
            if rank != chain.len() {
                return Err(InvariantError::RankUnderflow { chain: chain.len(), rank });
            }
            let mut prod = RationalExpr::from_q(k.clone());
            for (pos, &(s, l)) in letters.iter().enumerate() {
                let start = pos * deg;
                let v = match cache.get(&(s, l, start)) {
                    Some(v) => v.clone(),
                    None => {
                        // The tensor of a form evaluates like the form itself.
                        let v = lifted[s][l].eval_on(&chain[start..start + deg])?;
                        cache.insert((s, l, start), v.clone());
                        v
                    }
                };
                if v.is_zero() {
                    prod = RationalExpr::zero();
                    break;
                }
                prod = prod.mul(&v);
            }
            total = total.add(&prod);
        }
        Ok(total)
    }

    /// [`Realization::contract_realized`] with a written chain read under `order`.
    pub fn contract_ordered(&self, t: &TensorElement, chain: &[&VectorField], order: ChainOrder) -> Result<RationalExpr> {
        let rev: Vec<&VectorField> = chain.iter().rev().copied().collect();
        Ok(match order {
            ChainOrder::AsWritten => self.contract_realized(t, chain)?,
            ChainOrder::Reversed => self.contract_realized(t, &rev)?,
            ChainOrder::Averaged => {
                let a = self.contract_realized(t, chain)?;
                let b = self.contract_realized(t, &rev)?;
                a.add(&b).scale(&Q::new(1.into(), 2.into()))
            }
        })
    }

    /// The abstract `ad_{e_α}` realized on tensor fields with this
    /// realization's convention.
    pub fn rho(&self, alpha: usize, tensor: &CovTensor, m: usize) -> Result<CovTensor> {
        let x = self.prolonged(&self.alg.basis()[alpha], m)?;
        let x = match self.convention {
            ScConvention::LieHamilton => x.neg(),
            ScConvention::VectorField => x,
        };
        Ok(tensor.lie_derivative(&x)?)
    }
}

/// Outcome of the invariance check and any constants read off it.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub tensor: CovTensor,
    pub annihilators: Vec<usize>,
    pub failures: Vec<usize>,
    pub scalars: Vec<(String, RationalExpr)>,
    pub jacobian_ok: Option<bool>,
}

impl InvariantReport {
    pub fn invariant(&self) -> bool {
        self.failures.is_empty()
    }

    /// Serializable view; the tensor is included only on request.
    pub fn to_json(&self, with_tensor: bool) -> serde_json::Value {
        let chart = self.tensor.chart();
        let scalars: serde_json::Map<String, serde_json::Value> =
            self.scalars.iter().map(|(n, f)| (n.clone(), render(f, chart).into())).collect();
        let mut v = serde_json::json!({
            "invariant": self.invariant(),
            "annihilators": self.annihilators.iter().map(|a| a + 1).collect::<Vec<_>>(),
            "failures": self.failures.iter().map(|a| a + 1).collect::<Vec<_>>(),
            "scalars": scalars,
            "jacobian_ok": self.jacobian_ok,
        });
        if with_tensor {
            v["tensor"] = self.tensor.render().into();
        }
        v
    }
}

fn infer_m(chart: &ChartRef, alg: &VGLieAlgebra) -> Result<usize> {
    let n = alg.chart().dim();
    if n == 0 || !chart.dim().is_multiple_of(n) {
        return Err(GeoError::ChartMismatch.into());
    }
    Ok(chart.dim() / n)
}

fn prolong_onto(x: &VectorField, chart: &ChartRef, m: usize) -> Result<VectorField> {
    Ok(if m == 1 { x.clone() } else { x.diagonal_on(chart, m)? })
}

/// Check `ℒ_{X_α^{[m]}} T = 0` for every basis field; failures are recorded.
pub fn verify_evolution_invariant(t: &CovTensor, alg: &VGLieAlgebra) -> Result<InvariantReport> {
    let m = infer_m(t.chart(), alg)?;
    let mut annihilators = Vec::new();
    let mut failures = Vec::new();
    for (a, x) in alg.basis().iter().enumerate() {
        let xm = prolong_onto(x, t.chart(), m)?;
        if t.lie_derivative(&xm)?.is_zero() {
            annihilators.push(a);
        } else {
            failures.push(a);
        }
    }
    Ok(InvariantReport { tensor: t.clone(), annihilators, failures, scalars: Vec::new(), jacobian_ok: None })
}

/// Verify that every symmetry commutes with every basis field.
pub fn check_symmetries(alg: &VGLieAlgebra, symmetries: &[VectorField]) -> Result<()> {
    for (s, y) in symmetries.iter().enumerate() {
        for (a, x) in alg.basis().iter().enumerate() {
            if !x.bracket(y)?.is_zero() {
                return Err(InvariantError::NotSymmetry { symmetry: s, field: a });
            }
        }
    }
    Ok(())
}

/// Fully contract `t` with prolonged symmetries along each named chain
/// (0-based indices into `symmetries`); each result is certified to be a
/// constant of motion of the prolonged algebra.
pub fn extract_constants(
    t: &CovTensor,
    alg: &VGLieAlgebra,
    symmetries: &[VectorField],
    chains: &[(String, Vec<usize>)],
) -> Result<Vec<(String, RationalExpr)>> {
    check_symmetries(alg, symmetries)?;
    let m = infer_m(t.chart(), alg)?;
    let ys: Vec<VectorField> = symmetries.iter().map(|y| prolong_onto(y, t.chart(), m)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(chains.len());
    for (name, chain) in chains {
        if chain.len() != t.rank() {
            return Err(InvariantError::RankUnderflow { chain: chain.len(), rank: t.rank() });
        }
        let refs: Vec<&VectorField> =
            chain.iter().map(|&i| ys.get(i).ok_or(InvariantError::BadChainIndex(i))).collect::<Result<_>>()?;
        let f = t.full_contraction(&refs)?;
        if !constant_of_motion_check(&f, alg, m)? {
            return Err(InvariantError::NotConstant(name.clone()));
        }
        out.push((name.clone(), f));
    }
    Ok(out)
}

/// Smallest `m ≤ m_max` with `X_1^{[m]}, …, X_r^{[m]}` generically independent.
pub fn smallest_m(alg: &VGLieAlgebra, m_max: usize) -> Result<usize> {
    let r = alg.dim();
    for m in 1..=m_max {
        let chart = if m == 1 { alg.chart().clone() } else { product_chart(alg.chart(), m)? };
        let rows: FMatrix = alg
            .basis()
            .iter()
            .map(|x| prolong_onto(x, &chart, m).map(|f| f.coeffs().to_vec()))
            .collect::<Result<_>>()?;
        if rank_f(&rows) == r {
            return Ok(m);
        }
    }
    Err(InvariantError::NotReached(m_max))
}

/// Jacobian determinant `∂(f₁, …, f_n)/∂(y₁, …, y_n)` with `wrt` the variable
/// indices `yⱼ`; independence holds iff it is nonzero.
pub fn check_independence(scalars: &[RationalExpr], wrt: &[usize]) -> Result<(bool, RationalExpr)> {
    if scalars.len() != wrt.len() {
        return Err(InvariantError::CountMismatch { expected: wrt.len(), got: scalars.len() });
    }
    let jac: FMatrix = scalars.iter().map(|f| wrt.iter().map(|&v| f.diff(v)).collect()).collect();
    let det = det_f(&jac);
    Ok((!det.is_zero(), det))
}

/// `X_α^{[m]} f = 0` for every basis field.
pub fn constant_of_motion_check(f: &RationalExpr, alg: &VGLieAlgebra, m: usize) -> Result<bool> {
    let chart = if m == 1 { alg.chart().clone() } else { product_chart(alg.chart(), m)? };
    for x in alg.basis() {
        if !prolong_onto(x, &chart, m)?.apply(f).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::multisymplectic::invariant_volume;
    use crate::symexpr::{parse, Chart};

    fn plane() -> (VGLieAlgebra, MultisymplecticForm) {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let f: Vec<VectorField> = (0..2).map(|i| VectorField::coordinate(c.clone(), i).unwrap()).collect();
        let alg = VGLieAlgebra::new(f).unwrap();
        let vol = invariant_volume(&alg).unwrap();
        (alg, vol)
    }

    #[test]
    fn translations_realize_to_coordinate_forms() {
        let (alg, vol) = plane();
        let r = Realization::new(alg, vol, StructureConstants::zero(2), ScConvention::LieHamilton).unwrap();
        let t = TensorElement::generator(2, 0).unwrap();
        let tensor = r.realize(&t).unwrap();
        // ι_{∂x}(dx∧dy) = dy.
        assert_eq!(tensor, CovTensor::from(&DiffForm::dx(r.chart(1).unwrap(), 1).unwrap()));
        let unit = r.realize(&TensorElement::unit(2, 2)).unwrap();
        assert_eq!(unit.as_scalar(), Some(RationalExpr::one()));
    }

    #[test]
    fn factorized_contraction_matches_tensor() {
        let (alg, vol) = plane();
        let r = Realization::new(alg.clone(), vol, StructureConstants::zero(2), ScConvention::VectorField).unwrap();
        let t = TensorElement::generator(2, 0).unwrap().mul(&TensorElement::generator(2, 1).unwrap()).unwrap();
        let d = t.coproduct().unwrap();
        let chart = r.chart(2).unwrap();
        let y = VectorField::parse(chart.clone(), &["x_2", "1", "y_1", "x_1"]).unwrap();
        let z = VectorField::parse(chart, &["1", "y_2", "0", "2"]).unwrap();
        let direct = r.realize(&d).unwrap().full_contraction(&[&y, &z]).unwrap();
        assert_eq!(r.contract_realized(&d, &[&y, &z]).unwrap(), direct);
    }

    #[test]
    fn line_sl2_needs_three_copies() {
        let c = Arc::new(Chart::new(&["x"]).unwrap());
        let f = ["1", "x", "x^2"].map(|s| VectorField::parse(c.clone(), &[s]).unwrap());
        let alg = VGLieAlgebra::new(f.to_vec()).unwrap();
        assert_eq!(smallest_m(&alg, 4), Ok(3));
        assert_eq!(smallest_m(&alg, 2), Err(InvariantError::NotReached(2)));
    }

    #[test]
    fn duplicated_scalars_are_dependent() {
        let c = Chart::new(&["x", "y"]).unwrap();
        let f = parse("x*y", &c).unwrap();
        let (ok, det) = check_independence(&[f.clone(), f], &[0, 1]).unwrap();
        assert!(!ok && det.is_zero());
    }

    #[test]
    fn coordinate_is_not_constant() {
        let (alg, _) = plane();
        let c = product_chart(alg.chart(), 2).unwrap();
        let diff = parse("x_1 - x_2", &c).unwrap();
        assert!(constant_of_motion_check(&diff, &alg, 2).unwrap());
        let x1 = parse("x_1", &c).unwrap();
        assert!(!constant_of_motion_check(&x1, &alg, 2).unwrap());
    }
}
