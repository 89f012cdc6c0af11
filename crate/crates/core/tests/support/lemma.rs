//! Random Lie algebras and tensor elements for the coalgebra property suite.

use mlsys::coalgebra::TensorElement;
use mlsys::liealgebra::linalg::inverse_q;
use mlsys::liealgebra::StructureConstants;
use mlsys::symexpr::Q;
use proptest::prelude::*;

/// Base algebras as sparse `[e_a, e_b] = k e_g` (0-based), with one free
/// integer parameter `p` used by the solvable families.
fn base(kind: usize, p: i64) -> (usize, Vec<(usize, usize, usize, i64)>) {
    match kind {
        0 => (1, vec![]),
        1 => (2, vec![(0, 1, 0, 1)]),
        2 => (3, vec![(0, 1, 0, 1), (0, 2, 1, 2), (1, 2, 2, 1)]),
        3 => (3, vec![(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1)]),
        4 => (3, vec![(0, 1, 2, 1)]),
        5 => (3, vec![(2, 0, 0, 1), (2, 1, 1, p)]),
        6 => (4, vec![(0, 1, 0, 1), (0, 2, 1, 2), (1, 2, 2, 1)]),
        7 => (4, vec![(0, 1, 2, 1), (3, 0, 1, 1), (3, 1, 0, -1)]),
        8 => (4, vec![(0, 1, 2, 1), (3, 0, 0, 1), (3, 1, 1, -1)]),
        9 => (4, vec![(3, 0, 0, 1), (3, 1, 1, p), (3, 2, 2, 1 - p)]),
        _ => (4, vec![]),
    }
}

pub const KINDS: usize = 11;

/// Structure constants of a base algebra in the basis `f_a = Σ_i P[a][i] e_i`.
pub fn transformed(kind: usize, p: i64, mat: &[Vec<i64>]) -> Option<StructureConstants> {
    let (r, entries) = base(kind, p);
    let pm: Vec<Vec<Q>> = mat.iter().take(r).map(|row| row.iter().take(r).map(|&x| Q::from_integer(x.into())).collect()).collect();
    let inv = inverse_q(&pm)?;
    let mut c = vec![vec![vec![Q::from_integer(0.into()); r]; r]; r];
    for &(i, j, k, v) in &entries {
        let v = Q::from_integer(v.into());
        for a in 0..r {
            for b in 0..r {
                let w = &pm[a][i] * &pm[b][j] - &pm[a][j] * &pm[b][i];
                if w == Q::from_integer(0.into()) {
                    continue;
                }
                for g in 0..r {
                    c[a][b][g] += &w * &v * &inv[k][g];
                }
            }
        }
    }
    Some(StructureConstants::from_table(c).expect("basis change preserves the Lie axioms"))
}

pub fn algebra() -> impl Strategy<Value = StructureConstants> {
    (0..KINDS, -2i64..=2, proptest::collection::vec(proptest::collection::vec(-2i64..=2, 4), 4))
        .prop_filter_map("singular basis change", |(kind, p, mat)| transformed(kind, p, &mat))
}

fn coeff() -> impl Strategy<Value = Q> {
    (-4i64..=4, 1i64..=3).prop_filter("nonzero", |(n, _)| *n != 0).prop_map(|(n, d)| Q::new(n.into(), d.into()))
}

/// A sum of up to three words of length at most four.
pub fn element(r: usize) -> impl Strategy<Value = TensorElement> {
    proptest::collection::vec((proptest::collection::vec(0..r, 0..=4), coeff()), 1..=3)
        .prop_map(move |ts| TensorElement::from_terms(r, 1, ts.into_iter().map(|(w, k)| (vec![w], k))).unwrap())
}

/// A sum of up to three words of one common length `1..=4`.
pub fn homogeneous(r: usize) -> impl Strategy<Value = TensorElement> {
    (1usize..=4).prop_flat_map(move |n| {
        proptest::collection::vec((proptest::collection::vec(0..r, n), coeff()), 1..=3)
            .prop_map(move |ts| TensorElement::from_terms(r, 1, ts.into_iter().map(|(w, k)| (vec![w], k))).unwrap())
    })
}

pub fn with_element() -> impl Strategy<Value = (StructureConstants, TensorElement)> {
    algebra().prop_flat_map(|sc| {
        let r = sc.dim();
        (Just(sc), element(r))
    })
}

pub fn with_homogeneous() -> impl Strategy<Value = (StructureConstants, TensorElement)> {
    algebra().prop_flat_map(|sc| {
        let r = sc.dim();
        (Just(sc), homogeneous(r))
    })
}

/// `Δ^(m)` preserves the symmetric and antisymmetric submodules.
pub fn preserves_symmetry(x: &TensorElement, m: usize) -> Result<(), String> {
    let s = x.symmetrize().map_err(|e| e.to_string())?;
    let a = x.antisymmetrize().map_err(|e| e.to_string())?;
    if !s.coproduct_m(m).unwrap().is_symmetric() {
        return Err(format!("Δ^({m}) of a symmetric element is not symmetric"));
    }
    if !a.coproduct_m(m).unwrap().is_antisymmetric() {
        return Err(format!("Δ^({m}) of an antisymmetric element is not antisymmetric"));
    }
    Ok(())
}

/// Coassociativity, counit laws, iterated-coproduct recursion and
/// multiplicativity of `Δ`.
pub fn coalgebra_axioms(x: &TensorElement, y: &TensorElement) -> Result<(), String> {
    let d = x.coproduct().unwrap();
    if d.coproduct_at(0).unwrap() != d.coproduct_at(1).unwrap() {
        return Err("coassociativity".into());
    }
    if d.counit_at(0).unwrap() != *x || d.counit_at(1).unwrap() != *x {
        return Err("counit".into());
    }
    for m in 1..=3 {
        if x.coproduct_m(m).unwrap() != x.coproduct_m(m - 1).unwrap().coproduct_at(0).unwrap() {
            return Err(format!("Δ^({m}) recursion"));
        }
    }
    let lhs = x.mul(y).unwrap().coproduct().unwrap();
    let rhs = x.coproduct().unwrap().mul(&y.coproduct().unwrap()).unwrap();
    if lhs != rhs {
        return Err("Δ is not multiplicative".into());
    }
    Ok(())
}

/// `ad_α ∘ Δ^(m) = Δ^(m) ∘ ad_α` for every generator.
pub fn ad_commutes(sc: &StructureConstants, x: &TensorElement, m: usize) -> Result<(), String> {
    for a in 0..sc.dim() {
        let lhs = x.coproduct_m(m).unwrap().ad(sc, a).unwrap();
        let rhs = x.ad(sc, a).unwrap().coproduct_m(m).unwrap();
        if lhs != rhs {
            return Err(format!("ad_{} does not commute with Δ^({m})", a + 1));
        }
    }
    Ok(())
}

/// `[ad_α, ad_β] = Σ_γ c_{αβ}^γ ad_γ`.
pub fn module_law(sc: &StructureConstants, x: &TensorElement) -> Result<(), String> {
    let r = sc.dim();
    for a in 0..r {
        for b in 0..r {
            let lhs = x.ad(sc, b).unwrap().ad(sc, a).unwrap().sub(&x.ad(sc, a).unwrap().ad(sc, b).unwrap()).unwrap();
            let mut rhs = TensorElement::zero(r, x.factors());
            for g in 0..r {
                rhs = rhs.add(&x.ad(sc, g).unwrap().scale(sc.get(a, b, g))).unwrap();
            }
            if lhs != rhs {
                return Err(format!("module law fails for ({}, {})", a + 1, b + 1));
            }
        }
    }
    Ok(())
}
