use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::diffgeo::VectorField;
use crate::symexpr::{ChartRef, Monomial, Poly, RationalExpr, Q};

use super::linalg::{det_f, nullspace, rank_f, solve_q, split_by_monomials, FMatrix};
use super::{LieError, StructureConstants};

/// Constants `k` with `Σ k_j basis_j = target`, if `target` lies in the Q-span.
pub fn express_in_span(target: &VectorField, basis: &[VectorField]) -> Option<Vec<Q>> {
    let nb = basis.len();
    if target.is_zero() {
        return Some(vec![Q::zero(); nb]);
    }
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for i in 0..target.dim() {
        let mut exprs: Vec<(usize, RationalExpr)> =
            basis.iter().enumerate().map(|(j, b)| (j, b.coeff(i).clone())).collect();
        exprs.push((nb, target.coeff(i).clone()));
        rows.extend(split_by_monomials(&exprs, nb + 1));
    }
    let (a, rhs): (Vec<Vec<Q>>, Vec<Q>) = rows
        .into_iter()
        .map(|mut r| {
            let b = r.pop().expect("rhs column");
            (r, b)
        })
        .unzip();
    solve_q(&a, &rhs, nb)
}

/// Finite-dimensional Lie algebra of vector fields with exact structure constants.
#[derive(Clone, Debug, PartialEq)]
pub struct VGLieAlgebra {
    basis: Vec<VectorField>,
    sc: StructureConstants,
}

impl VGLieAlgebra {
    /// Take `basis` as given; fails unless it is Q-independent and closed.
    pub fn new(basis: Vec<VectorField>) -> Result<Self, LieError> {
        let chart = basis.first().ok_or(LieError::Empty)?.chart().clone();
        for (i, b) in basis.iter().enumerate() {
            if b.is_zero() || express_in_span(b, &basis[..i]).is_some() {
                return Err(LieError::DependentBasis(i));
            }
            if **b.chart() != *chart {
                return Err(LieError::Geo(crate::diffgeo::GeoError::ChartMismatch));
            }
        }
        let sc = structure_constants_of(&basis)?;
        Ok(VGLieAlgebra { basis, sc })
    }

    pub fn basis(&self) -> &[VectorField] {
        &self.basis
    }

    pub fn sc(&self) -> &StructureConstants {
        &self.sc
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn chart(&self) -> &ChartRef {
        self.basis[0].chart()
    }

    /// Matrix with one row per basis field, one column per coordinate.
    pub fn frame_matrix(&self) -> FMatrix {
        self.basis.iter().map(|b| b.coeffs().to_vec()).collect()
    }
}

fn structure_constants_of(basis: &[VectorField]) -> Result<StructureConstants, LieError> {
    let r = basis.len();
    let mut entries = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            let br = basis[a].bracket(&basis[b])?;
            let k = express_in_span(&br, basis).ok_or(LieError::NotClosed { alpha: a, beta: b })?;
            for (g, v) in k.into_iter().enumerate() {
                if !v.is_zero() {
                    entries.push((a, b, g, v));
                }
            }
        }
    }
    StructureConstants::from_sparse(r, &entries)
}

/// Smallest Lie algebra containing `fields`: bracket until the Q-span closes.
pub fn close_and_extract(fields: &[VectorField], max_dim: usize) -> Result<VGLieAlgebra, LieError> {
    let mut basis: Vec<VectorField> = Vec::new();
    for f in fields {
        if !f.is_zero() && express_in_span(f, &basis).is_none() {
            basis.push(f.clone());
            if basis.len() > max_dim {
                return Err(LieError::NotFiniteDimensional { max_dim });
            }
        }
    }
    if basis.is_empty() {
        return Err(LieError::Empty);
    }
    let mut done: BTreeSet<(usize, usize)> = BTreeSet::new();
    loop {
        let n = basis.len();
        let mut grew = false;
        for a in 0..n {
            for b in a + 1..n {
                if !done.insert((a, b)) {
                    continue;
                }
                let br = basis[a].bracket(&basis[b])?;
                if !br.is_zero() && express_in_span(&br, &basis).is_none() {
                    basis.push(br);
                    grew = true;
                    if basis.len() > max_dim {
                        return Err(LieError::NotFiniteDimensional { max_dim });
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }
    VGLieAlgebra::new(basis)
}

/// Determinant witness for `dim V = dim N` and `V` spanning the tangent space.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalAutomorphy {
    pub locally_automorphic: bool,
    pub determinant: Option<RationalExpr>,
}

pub fn is_locally_automorphic(alg: &VGLieAlgebra) -> LocalAutomorphy {
    if alg.dim() != alg.chart().dim() {
        return LocalAutomorphy { locally_automorphic: false, determinant: None };
    }
    let det = det_f(&alg.frame_matrix());
    LocalAutomorphy { locally_automorphic: !det.is_zero(), determinant: Some(det) }
}

/// Generic rank of a list of fields over the rational-function field.
pub fn generic_rank(fields: &[VectorField]) -> usize {
    let m: FMatrix = fields.iter().map(|f| f.coeffs().to_vec()).collect();
    rank_f(&m)
}

/// All monomials in the first `n` variables of total degree at most `d`.
pub(crate) fn monomials_up_to(n: usize, d: u16) -> Vec<Monomial> {
    fn rec(var: usize, n: usize, left: u16, cur: &mut Vec<u16>, out: &mut Vec<Monomial>) {
        if var == n {
            out.push(Monomial::from_exponents(cur));
            return;
        }
        for e in 0..=left {
            cur[var] = e;
            rec(var + 1, n, left - e, cur, out);
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    rec(0, n, d, &mut vec![0; n], &mut out);
    out.sort();
    out
}

/// Polynomial fields `Y` of coefficient degree `≤ degree` with `[X_α, Y] = 0`
/// for every basis field. Returns a basis of the solution space, possibly empty.
pub fn solve_symmetries(alg: &VGLieAlgebra, degree: u16) -> Result<Vec<VectorField>, LieError> {
    let chart = alg.chart().clone();
    let n = chart.dim();
    let monos = monomials_up_to(n, degree);
    let nm = monos.len();
    let nunk = n * nm;
    let polys: Vec<RationalExpr> = monos.iter().map(|m| RationalExpr::from_poly(Poly::monomial(m.clone(), Q::one()))).collect();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for x in alg.basis() {
        // ∂_i Xᵏ for all i, k.
        let jac: Vec<Vec<RationalExpr>> = (0..n).map(|i| (0..n).map(|k| x.coeff(k).diff(i)).collect()).collect();
        let xp: Vec<RationalExpr> = polys.iter().map(|p| x.apply(p)).collect();
        for k in 0..n {
            // Unknown u = i * nm + mi stands for Y = x^m ∂_i:
            // [X, Y]ᵏ = δ_{ik} X(x^m) − x^m ∂_i Xᵏ.
            let mut exprs = Vec::new();
            for i in 0..n {
                for (mi, p) in polys.iter().enumerate() {
                    let mut e = p.mul(&jac[i][k]).neg();
                    if i == k {
                        e = e.add(&xp[mi]);
                    }
                    if !e.is_zero() {
                        exprs.push((i * nm + mi, e));
                    }
                }
            }
            rows.extend(split_by_monomials(&exprs, nunk));
        }
    }
    let ns = nullspace(&rows, nunk);
    ns.into_iter()
        .map(|v| {
            let coeffs = (0..n)
                .map(|i| {
                    let terms = (0..nm).filter(|&mi| !v[i * nm + mi].is_zero()).map(|mi| (monos[mi].clone(), v[i * nm + mi].clone()));
                    RationalExpr::from_poly(Poly::from_terms(terms))
                })
                .collect();
            Ok(VectorField::new(chart.clone(), coeffs)?)
        })
        .collect()
}

/// Whether two families of fields span the same Q-space.
pub fn same_span(a: &[VectorField], b: &[VectorField]) -> bool {
    let ra = independent_subset(a);
    let rb = independent_subset(b);
    ra.len() == rb.len() && a.iter().all(|f| express_in_span(f, &rb).is_some()) && b.iter().all(|f| express_in_span(f, &ra).is_some())
}

fn independent_subset(fields: &[VectorField]) -> Vec<VectorField> {
    let mut out: Vec<VectorField> = Vec::new();
    for f in fields {
        if !f.is_zero() && express_in_span(f, &out).is_none() {
            out.push(f.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::symexpr::Chart;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn single_field_is_abelian() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let x = VectorField::parse(c, &["1", "0"]).unwrap();
        let alg = close_and_extract(&[x], 4).unwrap();
        assert_eq!(alg.dim(), 1);
        assert!(alg.sc().is_abelian());
        assert!(!is_locally_automorphic(&alg).locally_automorphic);
    }

    #[test]
    fn line_sl2_closes() {
        let c = Arc::new(Chart::new(&["x"]).unwrap());
        let d = VectorField::parse(c.clone(), &["1"]).unwrap();
        let x2 = VectorField::parse(c, &["x^2"]).unwrap();
        let alg = close_and_extract(&[d, x2], 5).unwrap();
        assert_eq!(alg.dim(), 3);
        assert_eq!(generic_rank(alg.basis()), 1);
    }

    #[test]
    fn unbounded_closure_fails() {
        let c = Arc::new(Chart::new(&["x"]).unwrap());
        let d = VectorField::parse(c.clone(), &["1"]).unwrap();
        let x3 = VectorField::parse(c, &["x^3"]).unwrap();
        assert_eq!(close_and_extract(&[d, x3], 6), Err(LieError::NotFiniteDimensional { max_dim: 6 }));
    }

    #[test]
    fn translation_symmetries_on_line() {
        let c = Arc::new(Chart::new(&["x"]).unwrap());
        let d = VectorField::parse(c.clone(), &["1"]).unwrap();
        let alg = VGLieAlgebra::new(vec![d.clone()]).unwrap();
        let sym = solve_symmetries(&alg, 0).unwrap();
        assert_eq!(sym.len(), 1);
        assert!(same_span(&sym, &[d]));
    }

    #[test]
    fn span_membership() {
        let c = Arc::new(Chart::new(&["x", "y"]).unwrap());
        let a = VectorField::parse(c.clone(), &["1", "x"]).unwrap();
        let b = VectorField::parse(c.clone(), &["y", "0"]).unwrap();
        let t = VectorField::parse(c.clone(), &["2 - 3*y", "2*x"]).unwrap();
        assert_eq!(express_in_span(&t, &[a.clone(), b.clone()]), Some(vec![q(2), q(-3)]));
        let not = VectorField::parse(c, &["x", "0"]).unwrap();
        assert_eq!(express_in_span(&not, &[a, b]), None);
    }
}
