use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::symexpr::Q;

use super::linalg::inverse_q;
use super::LieError;

/// Structure constants `c_{αβ}^γ` with `[e_α, e_β] = Σ_γ c_{αβ}^γ e_γ`,
/// indices 0-based.
#[derive(Clone, PartialEq, Eq)]
pub struct StructureConstants {
    dim: usize,
    c: Vec<Q>,
}

/// One nonzero entry `(α, β, γ, value)` with `α < β`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScEntry {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub value: String,
}

impl fmt::Debug for StructureConstants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sc(dim={}", self.dim)?;
        for (a, b, g, v) in self.sparse() {
            write!(f, ", [{},{}]_{}={}", a + 1, b + 1, g + 1, v)?;
        }
        write!(f, ")")
    }
}

impl StructureConstants {
    fn idx(&self, a: usize, b: usize, g: usize) -> usize {
        (a * self.dim + b) * self.dim + g
    }

    pub fn zero(dim: usize) -> Self {
        StructureConstants { dim, c: vec![Q::zero(); dim * dim * dim] }
    }

    /// Build from entries with `α < β`; the `β > α` half is filled by
    /// antisymmetry. Rejects Jacobi violations.
    pub fn from_sparse(dim: usize, entries: &[(usize, usize, usize, Q)]) -> Result<Self, LieError> {
        let mut sc = Self::zero(dim);
        for (a, b, g, v) in entries {
            let (a, b, g) = (*a, *b, *g);
            if a >= dim || b >= dim || g >= dim {
                return Err(LieError::IndexOutOfRange { dim });
            }
            if a == b {
                if !v.is_zero() {
                    return Err(LieError::NotAntisymmetric { alpha: a, beta: b, gamma: g });
                }
                continue;
            }
            let (i, j) = (sc.idx(a, b, g), sc.idx(b, a, g));
            sc.c[i] = v.clone();
            sc.c[j] = -v.clone();
        }
        sc.check_jacobi()?;
        Ok(sc)
    }

    /// Build from a full table `c[α][β][γ]`, checking antisymmetry and Jacobi.
    pub fn from_table(table: Vec<Vec<Vec<Q>>>) -> Result<Self, LieError> {
        let dim = table.len();
        let mut sc = Self::zero(dim);
        for (a, row) in table.iter().enumerate() {
            if row.len() != dim || row.iter().any(|r| r.len() != dim) {
                return Err(LieError::DimensionMismatch);
            }
            for (b, col) in row.iter().enumerate() {
                for (g, v) in col.iter().enumerate() {
                    let i = sc.idx(a, b, g);
                    sc.c[i] = v.clone();
                }
            }
        }
        for a in 0..dim {
            for b in 0..dim {
                for g in 0..dim {
                    if *sc.get(a, b, g) != -sc.get(b, a, g) {
                        return Err(LieError::NotAntisymmetric { alpha: a, beta: b, gamma: g });
                    }
                }
            }
        }
        sc.check_jacobi()?;
        Ok(sc)
    }

    fn check_jacobi(&self) -> Result<(), LieError> {
        let n = self.dim;
        for a in 0..n {
            for b in a + 1..n {
                for g in b + 1..n {
                    for nu in 0..n {
                        let mut s = Q::zero();
                        for mu in 0..n {
                            s += self.get(a, b, mu) * self.get(mu, g, nu)
                                + self.get(b, g, mu) * self.get(mu, a, nu)
                                + self.get(g, a, mu) * self.get(mu, b, nu);
                        }
                        if !s.is_zero() {
                            return Err(LieError::JacobiViolation { alpha: a, beta: b, gamma: g });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize, g: usize) -> &Q {
        &self.c[self.idx(a, b, g)]
    }

    /// Nonzero entries with `α < β`, in lexicographic order.
    pub fn sparse(&self) -> Vec<(usize, usize, usize, Q)> {
        let mut out = Vec::new();
        for a in 0..self.dim {
            for b in a + 1..self.dim {
                for g in 0..self.dim {
                    let v = self.get(a, b, g);
                    if !v.is_zero() {
                        out.push((a, b, g, v.clone()));
                    }
                }
            }
        }
        out
    }

    /// Serializable form, 1-based.
    pub fn entries(&self) -> Vec<ScEntry> {
        self.sparse()
            .into_iter()
            .map(|(a, b, g, v)| ScEntry { alpha: a + 1, beta: b + 1, gamma: g + 1, value: v.to_string() })
            .collect()
    }

    pub fn negated(&self) -> Self {
        StructureConstants { dim: self.dim, c: self.c.iter().map(|x| -x.clone()).collect() }
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(Zero::is_zero)
    }

    /// Matrix of `ad_{e_α}`: entry `[γ][β] = c_{αβ}^γ`.
    pub fn ad_matrix(&self, a: usize) -> Vec<Vec<Q>> {
        (0..self.dim).map(|g| (0..self.dim).map(|b| self.get(a, b, g).clone()).collect()).collect()
    }

    /// `Tr(ad_{e_α}) = Σ_β c_{αβ}^β` for every α.
    pub fn adjoint_traces(&self) -> Vec<Q> {
        (0..self.dim).map(|a| (0..self.dim).map(|b| self.get(a, b, b).clone()).sum()).collect()
    }
}

/// Outcome of the unimodularity test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularReport {
    pub traces: Vec<Q>,
    pub unimodular: bool,
}

pub fn is_unimodular(sc: &StructureConstants) -> UnimodularReport {
    let traces = sc.adjoint_traces();
    let unimodular = traces.iter().all(Zero::is_zero);
    UnimodularReport { traces, unimodular }
}

/// Whether `φ(e_i) = Σ_j map[i][j] f_j` is a Lie-algebra isomorphism `a → b`.
pub fn verify_isomorphic_sc(a: &StructureConstants, b: &StructureConstants, map: &[Vec<Q>]) -> Result<bool, LieError> {
    let n = a.dim();
    if b.dim() != n || map.len() != n || map.iter().any(|r| r.len() != n) {
        return Err(LieError::DimensionMismatch);
    }
    if inverse_q(map).is_none() {
        return Err(LieError::SingularMap);
    }
    for i in 0..n {
        for j in i + 1..n {
            for l in 0..n {
                let lhs: Q = (0..n).map(|k| a.get(i, j, k) * &map[k][l]).sum();
                let mut rhs = Q::zero();
                for p in 0..n {
                    if map[i][p].is_zero() {
                        continue;
                    }
                    for q in 0..n {
                        if map[j][q].is_zero() {
                            continue;
                        }
                        rhs += &map[i][p] * &map[j][q] * b.get(p, q, l);
                    }
                }
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn sl2() -> StructureConstants {
        StructureConstants::from_sparse(3, &[(0, 1, 0, q(1)), (0, 2, 1, q(2)), (1, 2, 2, q(1))]).unwrap()
    }

    #[test]
    fn sl2_is_unimodular() {
        assert!(is_unimodular(&sl2()).unimodular);
    }

    #[test]
    fn affine_is_not_unimodular() {
        let sc = StructureConstants::from_sparse(2, &[(0, 1, 1, q(1))]).unwrap();
        let r = is_unimodular(&sc);
        assert!(!r.unimodular);
        assert_eq!(r.traces, vec![q(1), q(0)]);
    }

    #[test]
    fn jacobi_violation_rejected() {
        let bad = StructureConstants::from_sparse(3, &[(0, 1, 2, q(1)), (1, 2, 1, q(1))]);
        assert!(matches!(bad, Err(LieError::JacobiViolation { .. })));
    }

    #[test]
    fn identity_and_abelian_maps() {
        let id: Vec<Vec<Q>> = (0..3).map(|i| (0..3).map(|j| q((i == j) as i64)).collect()).collect();
        assert!(verify_isomorphic_sc(&sl2(), &sl2(), &id).unwrap());
        assert!(!verify_isomorphic_sc(&sl2(), &StructureConstants::zero(3), &id).unwrap());
        let sing = vec![vec![q(0); 3]; 3];
        assert_eq!(verify_isomorphic_sc(&sl2(), &sl2(), &sing), Err(LieError::SingularMap));
    }
}
