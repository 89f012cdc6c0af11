use std::collections::BTreeMap;
use std::fmt;

use crate::symexpr::{parse, ChartRef, RationalExpr, Q};

use super::field::check_slot;
use super::{check_chart, product_chart, render_coeff, CovTensor, GeoError, VectorField};

/// Differential k-form stored over strictly increasing index tuples.
#[derive(Clone, PartialEq, Eq)]
pub struct DiffForm {
    chart: ChartRef,
    degree: usize,
    terms: BTreeMap<Vec<usize>, RationalExpr>,
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Sort `idx` in place, returning the permutation sign, or `None` on a repeat.
pub(crate) fn sort_with_sign(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
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

impl DiffForm {
    pub fn zero(chart: ChartRef, degree: usize) -> Self {
        DiffForm { chart, degree, terms: BTreeMap::new() }
    }

    pub fn scalar(chart: ChartRef, f: RationalExpr) -> Self {
        let mut w = Self::zero(chart, 0);
        accumulate(&mut w.terms, Vec::new(), f);
        w
    }

    /// `dxⁱ`.
    pub fn dx(chart: ChartRef, i: usize) -> Result<Self, GeoError> {
        Self::from_terms(chart, 1, [(vec![i], RationalExpr::one())])
    }

    /// Build from arbitrary index tuples; tuples are sorted with sign and
    /// those with a repeated index vanish.
    pub fn from_terms(
        chart: ChartRef,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, RationalExpr)>,
    ) -> Result<Self, GeoError> {
        let dim = chart.dim();
        if degree > dim {
            return Err(GeoError::DegreeTooHigh { degree, dim });
        }
        let mut w = Self::zero(chart, degree);
        for (mut idx, c) in terms {
            if idx.len() != degree {
                return Err(GeoError::TupleLength { expected: degree, got: idx.len() });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(GeoError::IndexOutOfRange { index: bad, dim });
            }
            if let Some(sign) = sort_with_sign(&mut idx) {
                let c = if sign < 0 { c.neg() } else { c };
                accumulate(&mut w.terms, idx, c);
            }
        }
        Ok(w)
    }

    /// Terms given as (coordinate names, coefficient text).
    pub fn parse<S: AsRef<str>, T: AsRef<str>>(chart: ChartRef, degree: usize, terms: &[(Vec<S>, T)]) -> Result<Self, GeoError> {
        let mut out = Vec::with_capacity(terms.len());
        for (names, coeff) in terms {
            let idx = names.iter().map(|n| chart.coord_index(n.as_ref())).collect::<Result<Vec<_>, _>>()?;
            out.push((idx, parse(coeff.as_ref(), &chart)?));
        }
        Self::from_terms(chart, degree, out)
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, RationalExpr> {
        &self.terms
    }

    pub fn coeff(&self, idx: &[usize]) -> RationalExpr {
        let mut key = idx.to_vec();
        match sort_with_sign(&mut key) {
            None => RationalExpr::zero(),
            Some(s) => {
                let c = self.terms.get(&key).cloned().unwrap_or_default();
                if s < 0 {
                    c.neg()
                } else {
                    c
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The 0-form value, if this is a 0-form.
    pub fn as_scalar(&self) -> Option<RationalExpr> {
        (self.degree == 0).then(|| self.terms.get(&Vec::new()).cloned().unwrap_or_default())
    }

    fn map(&self, f: impl Fn(&RationalExpr) -> RationalExpr) -> Self {
        let mut w = Self::zero(self.chart.clone(), self.degree);
        for (k, c) in &self.terms {
            accumulate(&mut w.terms, k.clone(), f(c));
        }
        w
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

    fn check_same(&self, other: &DiffForm) -> Result<(), GeoError> {
        check_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(GeoError::TupleLength { expected: self.degree, got: other.degree });
        }
        Ok(())
    }

    pub fn add(&self, other: &DiffForm) -> Result<Self, GeoError> {
        self.check_same(other)?;
        let degree = if self.is_zero() { other.degree } else { self.degree };
        let mut w = DiffForm { chart: self.chart.clone(), degree, terms: self.terms.clone() };
        for (k, c) in &other.terms {
            accumulate(&mut w.terms, k.clone(), c.clone());
        }
        Ok(w)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<Self, GeoError> {
        self.add(&other.neg())
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm, GeoError> {
        check_chart(&self.chart, &other.chart)?;
        let degree = self.degree + other.degree;
        let dim = self.chart.dim();
        if degree > dim {
            return Err(GeoError::DegreeTooHigh { degree, dim });
        }
        let mut w = Self::zero(self.chart.clone(), degree);
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                let mut idx: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
                if let Some(sign) = sort_with_sign(&mut idx) {
                    let c = a.mul(b);
                    accumulate(&mut w.terms, idx, if sign < 0 { c.neg() } else { c });
                }
            }
        }
        Ok(w)
    }

    /// Exterior derivative; a top-degree form maps to zero.
    pub fn d(&self) -> DiffForm {
        let dim = self.chart.dim();
        let mut w = Self::zero(self.chart.clone(), self.degree + 1);
        if self.degree >= dim {
            return w;
        }
        for (idx, c) in &self.terms {
            for j in 0..dim {
                if idx.contains(&j) {
                    continue;
                }
                let dc = c.diff(j);
                if dc.is_zero() {
                    continue;
                }
                let pos = idx.iter().filter(|&&i| i < j).count();
                let mut key = idx.clone();
                key.insert(pos, j);
                accumulate(&mut w.terms, key, if pos % 2 == 1 { dc.neg() } else { dc });
            }
        }
        w
    }

    /// `ι_X ω`.
    pub fn interior(&self, x: &VectorField) -> Result<DiffForm, GeoError> {
        check_chart(&self.chart, x.chart())?;
        if self.degree == 0 {
            return Err(GeoError::DegreeZero);
        }
        let mut w = Self::zero(self.chart.clone(), self.degree - 1);
        for (idx, c) in &self.terms {
            for (s, &i) in idx.iter().enumerate() {
                let xi = x.coeff(i);
                if xi.is_zero() {
                    continue;
                }
                let mut key = idx.clone();
                key.remove(s);
                let v = c.mul(xi);
                accumulate(&mut w.terms, key, if s % 2 == 1 { v.neg() } else { v });
            }
        }
        Ok(w)
    }

    /// `ω(X₁, …, X_k)`.
    pub fn eval_on(&self, fields: &[&VectorField]) -> Result<RationalExpr, GeoError> {
        if fields.len() != self.degree {
            return Err(GeoError::TupleLength { expected: self.degree, got: fields.len() });
        }
        let mut w = self.clone();
        for x in fields {
            w = w.interior(x)?;
        }
        Ok(w.as_scalar().unwrap_or_default())
    }

    /// `ℒ_X ω = ι_X dω + d ι_X ω`.
    pub fn lie_derivative(&self, x: &VectorField) -> Result<DiffForm, GeoError> {
        check_chart(&self.chart, x.chart())?;
        let a = if self.degree < self.chart.dim() {
            self.d().interior(x)?
        } else {
            Self::zero(self.chart.clone(), self.degree)
        };
        if self.degree == 0 {
            return Ok(a);
        }
        a.add(&self.interior(x)?.d())
    }

    /// Covariant tensor with components `ω(∂_{i₁}, …, ∂_{i_k})`.
    pub fn to_tensor(&self) -> CovTensor {
        let mut terms = Vec::new();
        for (idx, c) in &self.terms {
            for (perm, sign) in permutations_with_sign(idx.len()) {
                let key: Vec<usize> = perm.iter().map(|&p| idx[p]).collect();
                terms.push((key, if sign < 0 { c.neg() } else { c.clone() }));
            }
        }
        CovTensor::from_terms(self.chart.clone(), self.degree, terms).expect("indices already validated")
    }

    pub fn lift(&self, target: &ChartRef, m: usize, slot: usize) -> Result<DiffForm, GeoError> {
        check_slot(slot, m)?;
        let n = self.chart.dim();
        if target.dim() != n * m {
            return Err(GeoError::ChartMismatch);
        }
        let mut w = Self::zero(target.clone(), self.degree);
        for (idx, c) in &self.terms {
            let key = idx.iter().map(|&i| (slot - 1) * n + i).collect();
            accumulate(&mut w.terms, key, self.chart.lift_expr(c, slot, m));
        }
        Ok(w)
    }

    pub fn prolong(&self, m: usize, slot: usize) -> Result<DiffForm, GeoError> {
        check_slot(slot, m)?;
        self.lift(&product_chart(&self.chart, m)?, m, slot)
    }

    /// `ω^{[m]} = Σ_a ω(x_(a))` onto `target`.
    pub fn diagonal_on(&self, target: &ChartRef, m: usize) -> Result<DiffForm, GeoError> {
        let mut acc = DiffForm::zero(target.clone(), self.degree);
        for slot in 1..=m {
            acc = acc.add(&self.lift(target, m, slot)?)?;
        }
        Ok(acc)
    }

    pub fn diagonal(&self, m: usize) -> Result<DiffForm, GeoError> {
        self.diagonal_on(&product_chart(&self.chart, m)?, m)
    }

    /// Canonical text `c * dx^dv + ...`.
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
                format!("{} * {}", render_coeff(c, &self.chart), basis.join("^"))
            })
            .collect();
        parts.join(" + ")
    }
}

/// All permutations of `0..k` with their signs (Heap's algorithm).
pub(crate) fn permutations_with_sign(k: usize) -> Vec<(Vec<usize>, i32)> {
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut sign = 1;
    out.push((a.clone(), sign));
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::symexpr::Chart;

    fn chart() -> ChartRef {
        Arc::new(Chart::new(&["x", "v", "a"]).unwrap().with_constraints(&["v"]).unwrap())
    }

    fn one_form(c: &ChartRef, comps: [&str; 3]) -> DiffForm {
        let names = ["x", "v", "a"];
        DiffForm::parse(c.clone(), 1, &names.iter().zip(comps).map(|(n, e)| (vec![*n], e)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn schwarz_volume() {
        let c = chart();
        let e1 = one_form(&c, ["a^2/(4*v^3)", "-a/v^2", "1/(2*v)"]);
        let e2 = one_form(&c, ["-a/v^2", "1/v", "0"]);
        let e3 = one_form(&c, ["1/v", "0", "0"]);
        let vol = e1.wedge(&e2).unwrap().wedge(&e3).unwrap();
        let expect = DiffForm::parse(c.clone(), 3, &[(vec!["a", "v", "x"], "1/(2*v^3)")]).unwrap();
        assert_eq!(vol, expect);
        assert_eq!(e3.d(), DiffForm::parse(c, 2, &[(vec!["v", "x"], "-1/v^2")]).unwrap());
    }

    #[test]
    fn odd_form_squares_to_zero() {
        let c = chart();
        let w = one_form(&c, ["x", "v^2", "1/v"]);
        assert!(w.wedge(&w).unwrap().is_zero());
    }

    #[test]
    fn interior_twice_vanishes() {
        let c = chart();
        let x = VectorField::parse(c.clone(), &["v", "a", "3*a^2/(2*v)"]).unwrap();
        let w = DiffForm::parse(c, 3, &[(vec!["a", "v", "x"], "1/(2*v^3)")]).unwrap();
        assert!(w.interior(&x).unwrap().interior(&x).unwrap().is_zero());
        assert!(w.lie_derivative(&x).unwrap().is_zero());
    }

    #[test]
    fn to_tensor_is_unnormalized() {
        let c = chart();
        let w = DiffForm::parse(c, 2, &[(vec!["x", "v"], "1")]).unwrap();
        let t = w.to_tensor();
        assert_eq!(t.coeff(&[0, 1]), RationalExpr::one());
        assert_eq!(t.coeff(&[1, 0]), RationalExpr::from_int(-1));
    }

    #[test]
    fn render_format() {
        let c = chart();
        let w = DiffForm::parse(c, 2, &[(vec!["v", "x"], "-1/v^2"), (vec!["x", "a"], "x + v")]).unwrap();
        assert_eq!(w.render(), "1/v^2 * dx^dv + (x + v) * dx^da");
    }

    #[test]
    fn permutation_signs() {
        let p = permutations_with_sign(3);
        assert_eq!(p.len(), 6);
        for (perm, s) in p {
            let mut q = perm.clone();
            assert_eq!(sort_with_sign(&mut q), Some(s));
        }
    }
}
