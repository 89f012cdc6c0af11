use std::collections::HashSet;
use std::sync::Arc;

use super::{parse, RationalExpr, SymError};

/// Coordinate chart: ordered coordinate names, optional symbolic parameters
/// (constants with no dynamics, e.g. the alpha_i of the DBH system), and
/// expressions that must stay nonzero on the domain.
///
/// Expression variable indices run over `names` first, then `params`.
#[derive(Clone, Debug)]
pub struct Chart {
    names: Vec<String>,
    params: Vec<String>,
    constraints: Vec<RationalExpr>,
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.params == other.params
    }
}

impl Eq for Chart {}

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, SymError> {
        Self::with_params(names, &[] as &[&str])
    }

    pub fn with_params<S: AsRef<str>, P: AsRef<str>>(names: &[S], params: &[P]) -> Result<Self, SymError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let params: Vec<String> = params.iter().map(|s| s.as_ref().to_string()).collect();
        let mut seen = HashSet::new();
        for n in names.iter().chain(params.iter()) {
            if !is_identifier(n) {
                return Err(SymError::BadIdentifier(n.clone()));
            }
            if !seen.insert(n.clone()) {
                return Err(SymError::DuplicateName(n.clone()));
            }
        }
        Ok(Chart { names, params, constraints: Vec::new() })
    }

    /// Attach domain constraints, given as expressions in this chart's grammar.
    pub fn with_constraints<S: AsRef<str>>(mut self, exprs: &[S]) -> Result<Self, SymError> {
        for e in exprs {
            let c = parse(e.as_ref(), &self)?;
            self.push_constraint(c)?;
        }
        Ok(self)
    }

    pub fn push_constraint(&mut self, c: RationalExpr) -> Result<(), SymError> {
        if c.is_zero() {
            return Err(SymError::ZeroConstraint);
        }
        if !self.constraints.contains(&c) {
            self.constraints.push(c);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Coordinates plus parameters.
    pub fn num_vars(&self) -> usize {
        self.names.len() + self.params.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn constraints(&self) -> &[RationalExpr] {
        &self.constraints
    }

    pub fn var_name(&self, index: usize) -> &str {
        if index < self.names.len() {
            &self.names[index]
        } else {
            &self.params[index - self.names.len()]
        }
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .or_else(|| self.params.iter().position(|n| n == name).map(|p| p + self.names.len()))
    }

    pub fn coord_index(&self, name: &str) -> Result<usize, SymError> {
        self.names.iter().position(|n| n == name).ok_or_else(|| SymError::UnknownIdentifier(name.to_string()))
    }

    pub fn var(&self, name: &str) -> Result<RationalExpr, SymError> {
        self.index_of(name).map(RationalExpr::var).ok_or_else(|| SymError::UnknownIdentifier(name.to_string()))
    }

    /// `m` suffixed copies of the coordinates (`x_1, v_1, ..., x_2, ...`),
    /// parameters shared. Constraints are copied into every slot.
    pub fn product(&self, m: usize) -> Result<Chart, SymError> {
        if m == 0 {
            return Err(SymError::InvalidSlot { slot: 0, m });
        }
        let mut names = Vec::with_capacity(self.dim() * m);
        for slot in 1..=m {
            for n in &self.names {
                names.push(format!("{n}_{slot}"));
            }
        }
        let mut chart = Chart::with_params(&names, &self.params)?;
        for slot in 1..=m {
            for c in &self.constraints {
                chart.push_constraint(c.remap(&|i| self.slot_var(i, slot, m)))?;
            }
        }
        Ok(chart)
    }

    /// Index of variable `i` of this chart inside the `m`-fold product, in
    /// slot `slot` (1-based). Parameters map to the shared tail.
    pub fn slot_var(&self, i: usize, slot: usize, m: usize) -> usize {
        let n = self.dim();
        if i < n {
            (slot - 1) * n + i
        } else {
            m * n + (i - n)
        }
    }

    /// Rename an expression of this chart into slot `slot` of the `m`-fold product.
    pub fn lift_expr(&self, e: &RationalExpr, slot: usize, m: usize) -> RationalExpr {
        e.remap(&|i| self.slot_var(i, slot, m))
    }
}

pub type ChartRef = Arc<Chart>;

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_rejected() {
        assert!(matches!(Chart::new(&["x", "x"]), Err(SymError::DuplicateName(_))));
        assert!(matches!(Chart::new(&["1x"]), Err(SymError::BadIdentifier(_))));
    }

    #[test]
    fn product_names_and_params() {
        let c = Chart::with_params(&["x", "v"], &["k"]).unwrap();
        let p = c.product(2).unwrap();
        assert_eq!(p.names(), &["x_1", "v_1", "x_2", "v_2"]);
        assert_eq!(p.params(), &["k"]);
        assert_eq!(c.slot_var(2, 2, 2), 4);
        assert_eq!(c.slot_var(1, 2, 2), 3);
    }

    #[test]
    fn zero_constraint_rejected() {
        let c = Chart::new(&["x", "v"]).unwrap();
        assert!(matches!(c.with_constraints(&["v - v"]), Err(SymError::ZeroConstraint)));
    }
}
