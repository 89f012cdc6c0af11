//! Gaussian elimination over Q and over the rational-function field.

use num_traits::{One, Zero};

use crate::symexpr::{poly_lcm, Monomial, Poly, RationalExpr, Q};

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(rows: &mut Vec<Vec<Q>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Q::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = &*x - &(&f * p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank_q(rows: &[Vec<Q>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{y : A y = 0}`.
pub fn nullspace(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// One solution of `A y = b`, or `None` when inconsistent.
pub fn solve_q(rows: &[Vec<Q>], rhs: &[Q], ncols: usize) -> Option<Vec<Q>> {
    let mut aug: Vec<Vec<Q>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug, ncols + 1);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut y = vec![Q::zero(); ncols];
    for (row, &p) in aug.iter().zip(&pivots) {
        y[p] = row[ncols].clone();
    }
    Some(y)
}

pub fn inverse_q(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, n);
    if pivots.len() != n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Linear equations `Σ_u e_u y_u = 0` with rational-function coefficients,
/// split into one equation over Q per monomial after clearing denominators.
pub fn split_by_monomials(exprs: &[(usize, RationalExpr)], nvars: usize) -> Vec<Vec<Q>> {
    let nonzero: Vec<&(usize, RationalExpr)> = exprs.iter().filter(|(_, e)| !e.is_zero()).collect();
    if nonzero.is_empty() {
        return Vec::new();
    }
    let den = poly_lcm(nonzero.iter().map(|(_, e)| e.denom()));
    let mut by_mono: std::collections::BTreeMap<Monomial, Vec<Q>> = Default::default();
    for (u, e) in nonzero {
        let p: Poly = e.monomial_coefficients_over(&den).expect("lcm clears denominators");
        for (m, c) in p.terms() {
            by_mono.entry(m.clone()).or_insert_with(|| vec![Q::zero(); nvars])[*u] += c;
        }
    }
    by_mono.into_values().collect()
}

/// Matrix over the rational-function field.
pub type FMatrix = Vec<Vec<RationalExpr>>;

/// Row echelon elimination over the function field; returns (rank, determinant
/// when square).
fn eliminate(m: &FMatrix) -> (usize, RationalExpr) {
    let mut a = m.clone();
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut det = RationalExpr::one();
    let mut r = 0;
    for c in 0..ncols {
        if r >= nrows {
            break;
        }
        // Prefer constant pivots to keep entries small.
        let cand: Vec<usize> = (r..nrows).filter(|&i| !a[i][c].is_zero()).collect();
        let Some(&p) = cand.iter().find(|&&i| a[i][c].is_constant()).or(cand.first()) else {
            det = RationalExpr::zero();
            continue;
        };
        if p != r {
            a.swap(r, p);
            det = det.neg();
        }
        let piv = a[r][c].clone();
        det = det.mul(&piv);
        let inv = piv.recip().expect("pivot nonzero");
        for i in r + 1..nrows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].mul(&inv);
            for j in c..ncols {
                if !a[r][j].is_zero() {
                    a[i][j] = a[i][j].sub(&f.mul(&a[r][j]));
                }
            }
        }
        r += 1;
    }
    if nrows != ncols || r < nrows {
        det = RationalExpr::zero();
    }
    (r, det)
}

pub fn rank_f(m: &FMatrix) -> usize {
    eliminate(m).0
}

pub fn det_f(m: &FMatrix) -> RationalExpr {
    eliminate(m).1
}

/// Inverse over the function field by Gauss–Jordan.
pub fn inverse_f(m: &FMatrix) -> Option<FMatrix> {
    let n = m.len();
    let mut a: FMatrix = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { RationalExpr::one() } else { RationalExpr::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let cand: Vec<usize> = (c..n).filter(|&i| !a[i][c].is_zero()).collect();
        let &p = cand.iter().find(|&&i| a[i][c].is_constant()).or(cand.first())?;
        a.swap(c, p);
        let inv = a[c][c].recip().ok()?;
        for x in a[c].iter_mut() {
            *x = x.mul(&inv);
        }
        let pivot_row = a[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == c || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = x.sub(&f.mul(p));
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solve `A y = b` over the function field for square nonsingular `A`.
pub fn solve_f(m: &FMatrix, rhs: &[RationalExpr]) -> Option<Vec<RationalExpr>> {
    let inv = inverse_f(m)?;
    Some(
        inv.iter()
            .map(|row| row.iter().zip(rhs).fold(RationalExpr::zero(), |acc, (a, b)| acc.add(&a.mul(b))))
            .collect(),
    )
}

/// Solve an overdetermined but consistent system `A y = b` over the function
/// field (`A` has full column rank). Returns `None` if inconsistent.
pub fn solve_f_rect(m: &FMatrix, rhs: &[RationalExpr]) -> Option<Vec<RationalExpr>> {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut a: FMatrix = m
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut r = r.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= nrows {
            break;
        }
        let cand: Vec<usize> = (r..nrows).filter(|&i| !a[i][c].is_zero()).collect();
        let Some(&p) = cand.iter().find(|&&i| a[i][c].is_constant()).or(cand.first()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip().ok()?;
        for x in a[r].iter_mut() {
            *x = x.mul(&inv);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = x.sub(&f.mul(p));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[ncols].is_zero()) {
        return None;
    }
    if pivots.len() != ncols {
        return None;
    }
    Some((0..ncols).map(|i| a[i][ncols].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]];
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            let s: Q = a[0].iter().zip(&v).map(|(x, y)| x * y).sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn solve_and_inverse() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let y = solve_q(&a, &[q(3), q(4)], 2).unwrap();
        assert_eq!(y, vec![q(1), q(1)]);
        let inv = inverse_q(&a).unwrap();
        assert_eq!(inv[0][0], Q::new(3.into(), 5.into()));
        assert!(solve_q(&[vec![q(1), q(1)], vec![q(1), q(1)]], &[q(1), q(2)], 2).is_none());
    }

    #[test]
    fn function_field_determinant() {
        let v = RationalExpr::var(0);
        let m = vec![vec![RationalExpr::zero(), v.clone()], vec![v.clone(), RationalExpr::one()]];
        assert_eq!(det_f(&m), v.mul(&v).neg());
        assert_eq!(rank_f(&m), 2);
        let inv = inverse_f(&m).unwrap();
        assert_eq!(inv[0][0], v.mul(&v).recip().unwrap().neg());
    }
}
