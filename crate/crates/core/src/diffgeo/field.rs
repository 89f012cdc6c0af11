use std::fmt;

use crate::symexpr::{parse, ChartRef, RationalExpr, Q};

use super::{check_chart, product_chart, render_coeff, GeoError};

/// `Σ Xⁱ ∂/∂xⁱ` on a chart.
#[derive(Clone, PartialEq, Eq)]
pub struct VectorField {
    chart: ChartRef,
    coeffs: Vec<RationalExpr>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl VectorField {
    pub fn new(chart: ChartRef, coeffs: Vec<RationalExpr>) -> Result<Self, GeoError> {
        if coeffs.len() != chart.dim() {
            return Err(GeoError::ComponentCount { expected: chart.dim(), got: coeffs.len() });
        }
        Ok(VectorField { chart, coeffs })
    }

    /// Components given in the expression grammar.
    pub fn parse<S: AsRef<str>>(chart: ChartRef, comps: &[S]) -> Result<Self, GeoError> {
        let coeffs = comps.iter().map(|s| parse(s.as_ref(), &chart)).collect::<Result<Vec<_>, _>>()?;
        Self::new(chart, coeffs)
    }

    pub fn zero(chart: ChartRef) -> Self {
        let n = chart.dim();
        VectorField { chart, coeffs: vec![RationalExpr::zero(); n] }
    }

    /// `∂/∂xⁱ`.
    pub fn coordinate(chart: ChartRef, i: usize) -> Result<Self, GeoError> {
        if i >= chart.dim() {
            return Err(GeoError::IndexOutOfRange { index: i, dim: chart.dim() });
        }
        let mut v = Self::zero(chart);
        v.coeffs[i] = RationalExpr::one();
        Ok(v)
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[RationalExpr] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &RationalExpr {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RationalExpr::is_zero)
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &RationalExpr) -> RationalExpr {
        let mut acc = RationalExpr::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let df = f.diff(i);
            if !df.is_zero() {
                acc = acc.add(&c.mul(&df));
            }
        }
        acc
    }

    /// `[X, Y]ⁱ = X(Yⁱ) − Y(Xⁱ)`.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField, GeoError> {
        check_chart(&self.chart, &other.chart)?;
        let coeffs = (0..self.dim()).map(|i| self.apply(&other.coeffs[i]).sub(&other.apply(&self.coeffs[i]))).collect();
        Ok(VectorField { chart: self.chart.clone(), coeffs })
    }

    /// `ℒ_X Y`, which is the bracket.
    pub fn lie_derivative(&self, other: &VectorField) -> Result<VectorField, GeoError> {
        self.bracket(other)
    }

    fn zip(&self, other: &VectorField, f: impl Fn(&RationalExpr, &RationalExpr) -> RationalExpr) -> Result<Self, GeoError> {
        check_chart(&self.chart, &other.chart)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect();
        Ok(VectorField { chart: self.chart.clone(), coeffs })
    }

    pub fn add(&self, other: &VectorField) -> Result<Self, GeoError> {
        self.zip(other, RationalExpr::add)
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self, GeoError> {
        self.zip(other, RationalExpr::sub)
    }

    pub fn neg(&self) -> Self {
        self.map(RationalExpr::neg)
    }

    pub fn scale(&self, k: &Q) -> Self {
        self.map(|c| c.scale(k))
    }

    /// Multiply by a function.
    pub fn mul_fn(&self, f: &RationalExpr) -> Self {
        self.map(|c| c.mul(f))
    }

    fn map(&self, f: impl Fn(&RationalExpr) -> RationalExpr) -> Self {
        VectorField { chart: self.chart.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Rational combination `Σ kᵢ Xᵢ`.
    pub fn combination(chart: ChartRef, terms: &[(Q, &VectorField)]) -> Result<Self, GeoError> {
        let mut acc = VectorField::zero(chart);
        for (k, x) in terms {
            acc = acc.add(&x.scale(k))?;
        }
        Ok(acc)
    }

    /// Copy into slot `slot` of the `m`-fold product chart `target`.
    pub fn lift(&self, target: &ChartRef, m: usize, slot: usize) -> Result<VectorField, GeoError> {
        check_slot(slot, m)?;
        let n = self.dim();
        if target.dim() != n * m {
            return Err(GeoError::ChartMismatch);
        }
        let mut coeffs = vec![RationalExpr::zero(); n * m];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(slot - 1) * n + i] = self.chart.lift_expr(c, slot, m);
        }
        Ok(VectorField { chart: target.clone(), coeffs })
    }

    /// Copy into one slot of a freshly built product chart.
    pub fn prolong(&self, m: usize, slot: usize) -> Result<VectorField, GeoError> {
        check_slot(slot, m)?;
        self.lift(&product_chart(&self.chart, m)?, m, slot)
    }

    /// Diagonal prolongation `X^{[m]} = Σ_a X(x_(a))` onto `target`.
    pub fn diagonal_on(&self, target: &ChartRef, m: usize) -> Result<VectorField, GeoError> {
        let mut acc = VectorField::zero(target.clone());
        for slot in 1..=m {
            acc = acc.add(&self.lift(target, m, slot)?)?;
        }
        Ok(acc)
    }

    pub fn diagonal(&self, m: usize) -> Result<VectorField, GeoError> {
        self.diagonal_on(&product_chart(&self.chart, m)?, m)
    }

    /// Canonical text `c * d/dx + ...`.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{} * d/d{}", render_coeff(c, &self.chart), self.chart.var_name(i)))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

pub(crate) fn check_slot(slot: usize, m: usize) -> Result<(), GeoError> {
    if slot == 0 || slot > m {
        Err(crate::symexpr::SymError::InvalidSlot { slot, m }.into())
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::symexpr::Chart;

    fn schwarz() -> (ChartRef, Vec<VectorField>) {
        let c = Arc::new(Chart::new(&["x", "v", "a"]).unwrap());
        let x1 = VectorField::parse(c.clone(), &["0", "0", "2*v"]).unwrap();
        let x2 = VectorField::parse(c.clone(), &["0", "v", "2*a"]).unwrap();
        let x3 = VectorField::parse(c.clone(), &["v", "a", "3*a^2/(2*v)"]).unwrap();
        (c, vec![x1, x2, x3])
    }

    #[test]
    fn schwarz_brackets() {
        let (_, x) = schwarz();
        assert_eq!(x[0].bracket(&x[1]).unwrap(), x[0]);
        assert_eq!(x[0].bracket(&x[2]).unwrap(), x[1].scale(&Q::from_integer(2.into())));
        assert_eq!(x[1].bracket(&x[2]).unwrap(), x[2]);
        assert!(x[2].bracket(&x[2]).unwrap().is_zero());
    }

    #[test]
    fn diagonal_prolongation() {
        let (_, x) = schwarz();
        let d = x[0].diagonal(2).unwrap();
        assert_eq!(d.render(), "2*v_1 * d/da_1 + 2*v_2 * d/da_2");
        assert!(x[0].prolong(2, 3).is_err());
    }

    #[test]
    fn chart_mismatch() {
        let (_, x) = schwarz();
        let other = Arc::new(Chart::new(&["p", "q", "r"]).unwrap());
        assert_eq!(x[0].bracket(&VectorField::zero(other)), Err(GeoError::ChartMismatch));
    }
}
