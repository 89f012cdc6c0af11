use std::collections::BTreeMap;
use std::fmt;

use crate::symexpr::{ChartRef, RationalExpr, Q};

use super::field::check_slot;
use super::{check_chart, product_chart, render_coeff, DiffForm, GeoError, VectorField};

/// Covariant tensor of rank r over arbitrary index tuples, no symmetry assumed.
#[derive(Clone, PartialEq, Eq)]
pub struct CovTensor {
    chart: ChartRef,
    rank: usize,
    terms: BTreeMap<Vec<usize>, RationalExpr>,
}

impl fmt::Debug for CovTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn accumulate(terms: &mut BTreeMap<Vec<usize>, RationalExpr>, key: Vec<usize>, value: RationalExpr) {
    if value.is_zero() {
        return;
    }
    match terms.get_mut(&key) {
        Some(existing) => {
            let s = existing.add(&value);
            if s.is_zero() {
                terms.remove(&key);
            } else {
                *existing = s;
            }
        }
        None => {
            terms.insert(key, value);
        }
    }
}

impl CovTensor {
    pub fn zero(chart: ChartRef, rank: usize) -> Self {
        CovTensor { chart, rank, terms: BTreeMap::new() }
    }

    pub fn scalar(chart: ChartRef, f: RationalExpr) -> Self {
        let mut t = Self::zero(chart, 0);
        accumulate(&mut t.terms, Vec::new(), f);
        t
    }

    pub fn from_terms(
        chart: ChartRef,
        rank: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, RationalExpr)>,
    ) -> Result<Self, GeoError> {
        let dim = chart.dim();
        let mut t = Self::zero(chart, rank);
        for (idx, c) in terms {
            if idx.len() != rank {
                return Err(GeoError::TupleLength { expected: rank, got: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(GeoError::IndexOutOfRange { index: bad, dim });
            }
            accumulate(&mut t.terms, idx, c);
        }
        Ok(t)
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, RationalExpr> {
        &self.terms
    }

    pub fn coeff(&self, idx: &[usize]) -> RationalExpr {
        self.terms.get(idx).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_scalar(&self) -> Option<RationalExpr> {
        (self.rank == 0).then(|| self.coeff(&[]))
    }

    fn map(&self, f: impl Fn(&RationalExpr) -> RationalExpr) -> Self {
        let mut t = Self::zero(self.chart.clone(), self.rank);
        for (k, c) in &self.terms {
            accumulate(&mut t.terms, k.clone(), f(c));
        }
        t
    }

    pub fn neg(&self) -> Self {
        self.map(RationalExpr::neg)
    }

    pub fn scale(&self, k: &Q) -> Self {
        self.map(|c| c.scale(k))
    }

    pub fn mul_fn(&self, f: &RationalExpr) -> Self {
        self.map(|c| c.mul(f))
    }

    pub fn add(&self, other: &CovTensor) -> Result<Self, GeoError> {
        check_chart(&self.chart, &other.chart)?;
        if self.rank != other.rank && !self.is_zero() && !other.is_zero() {
            return Err(GeoError::TupleLength { expected: self.rank, got: other.rank });
        }
        let rank = if self.is_zero() { other.rank } else { self.rank };
        let mut t = CovTensor { chart: self.chart.clone(), rank, terms: self.terms.clone() };
        for (k, c) in &other.terms {
            accumulate(&mut t.terms, k.clone(), c.clone());
        }
        Ok(t)
    }

    pub fn sub(&self, other: &CovTensor) -> Result<Self, GeoError> {
        self.add(&other.neg())
    }

    /// `(A ⊗ B)_{IJ} = A_I B_J`.
    pub fn tensor(&self, other: &CovTensor) -> Result<CovTensor, GeoError> {
        check_chart(&self.chart, &other.chart)?;
        let mut t = Self::zero(self.chart.clone(), self.rank + other.rank);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let key: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
                accumulate(&mut t.terms, key, a.mul(b));
            }
        }
        Ok(t)
    }

    /// Tensor product of forms through their covariant representation.
    pub fn tensor_forms(a: &DiffForm, b: &DiffForm) -> Result<CovTensor, GeoError> {
        a.to_tensor().tensor(&b.to_tensor())
    }

    /// Insert `Y` into the first slot.
    pub fn contract_first(&self, y: &VectorField) -> Result<CovTensor, GeoError> {
        check_chart(&self.chart, y.chart())?;
        if self.rank == 0 {
            return Err(GeoError::RankZero);
        }
        let mut t = Self::zero(self.chart.clone(), self.rank - 1);
        for (idx, c) in &self.terms {
            let yi = y.coeff(idx[0]);
            if yi.is_zero() {
                continue;
            }
            accumulate(&mut t.terms, idx[1..].to_vec(), c.mul(yi));
        }
        Ok(t)
    }

    /// `contract_first` applied for each field in order, left to right.
    pub fn contract_chain(&self, ys: &[&VectorField]) -> Result<CovTensor, GeoError> {
        let mut t = self.clone();
        for y in ys {
            t = t.contract_first(y)?;
        }
        Ok(t)
    }

    /// `T(Y₁, …, Y_r)` as a scalar.
    pub fn full_contraction(&self, ys: &[&VectorField]) -> Result<RationalExpr, GeoError> {
        if ys.len() != self.rank {
            return Err(GeoError::TupleLength { expected: self.rank, got: ys.len() });
        }
        Ok(self.contract_chain(ys)?.as_scalar().unwrap_or_default())
    }

    /// `(ℒ_X T)_I = X(T_I) + Σ_s Σ_j T_{I[s→j]} ∂_{i_s} Xʲ`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<CovTensor, GeoError> {
        check_chart(&self.chart, x.chart())?;
        let dim = self.chart.dim();
        // ∂_i Xʲ, computed once.
        let jac: Vec<Vec<RationalExpr>> =
            (0..dim).map(|i| (0..dim).map(|j| x.coeff(j).diff(i)).collect()).collect();
        let mut t = Self::zero(self.chart.clone(), self.rank);
        for (idx, c) in &self.terms {
            accumulate(&mut t.terms, idx.clone(), x.apply(c));
            for s in 0..idx.len() {
                let j = idx[s];
                for (i, row) in jac.iter().enumerate() {
                    if row[j].is_zero() {
                        continue;
                    }
                    let mut key = idx.clone();
                    key[s] = i;
                    accumulate(&mut t.terms, key, c.mul(&row[j]));
                }
            }
        }
        Ok(t)
    }

    pub fn lift(&self, target: &ChartRef, m: usize, slot: usize) -> Result<CovTensor, GeoError> {
        check_slot(slot, m)?;
        let n = self.chart.dim();
        if target.dim() != n * m {
            return Err(GeoError::ChartMismatch);
        }
        let mut t = Self::zero(target.clone(), self.rank);
        for (idx, c) in &self.terms {
            let key = idx.iter().map(|&i| (slot - 1) * n + i).collect();
            accumulate(&mut t.terms, key, self.chart.lift_expr(c, slot, m));
        }
        Ok(t)
    }

    pub fn prolong(&self, m: usize, slot: usize) -> Result<CovTensor, GeoError> {
        check_slot(slot, m)?;
        self.lift(&product_chart(&self.chart, m)?, m, slot)
    }

    /// Slot-wise sum `T^{[m]}` onto `target`.
    pub fn diagonal_on(&self, target: &ChartRef, m: usize) -> Result<CovTensor, GeoError> {
        let mut acc = CovTensor::zero(target.clone(), self.rank);
        for slot in 1..=m {
            acc = acc.add(&self.lift(target, m, slot)?)?;
        }
        Ok(acc)
    }

    pub fn diagonal(&self, m: usize) -> Result<CovTensor, GeoError> {
        self.diagonal_on(&product_chart(&self.chart, m)?, m)
    }

    /// Canonical text `c * dx(x)dv + ...`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(idx, c)| {
                if idx.is_empty() {
                    return crate::symexpr::render(c, &self.chart);
                }
                let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", self.chart.var_name(i))).collect();
                format!("{} * {}", render_coeff(c, &self.chart), basis.join("(x)"))
            })
            .collect();
        parts.join(" + ")
    }
}

impl From<&DiffForm> for CovTensor {
    fn from(w: &DiffForm) -> Self {
        w.to_tensor()
    }
}
