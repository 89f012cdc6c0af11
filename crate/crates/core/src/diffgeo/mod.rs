//! Coordinate calculus: vector fields, differential forms and covariant tensors.

mod field;
mod form;
mod tensor;

pub use field::VectorField;
pub use form::DiffForm;
pub(crate) use form::permutations_with_sign;
pub use tensor::CovTensor;

use std::sync::Arc;

use thiserror::Error;

use crate::symexpr::{render, Chart, ChartRef, RationalExpr, SymError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeoError {
    #[error("objects live on different charts")]
    ChartMismatch,
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("degree {degree} exceeds dimension {dim}")]
    DegreeTooHigh { degree: usize, dim: usize },
    #[error("interior product of a 0-form")]
    DegreeZero,
    #[error("contraction of a rank-0 tensor")]
    RankZero,
    #[error("index tuple has length {got}, expected {expected}")]
    TupleLength { expected: usize, got: usize },
    #[error(transparent)]
    Sym(#[from] SymError),
}

pub(crate) fn same_chart(a: &ChartRef, b: &ChartRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

pub(crate) fn check_chart(a: &ChartRef, b: &ChartRef) -> Result<(), GeoError> {
    if same_chart(a, b) {
        Ok(())
    } else {
        Err(GeoError::ChartMismatch)
    }
}

/// `m`-fold product chart, shared by everything prolonged to it.
pub fn product_chart(chart: &Chart, m: usize) -> Result<ChartRef, GeoError> {
    Ok(Arc::new(chart.product(m)?))
}

/// Coefficient text used by the `coeff * basis` renderers.
pub(crate) fn render_coeff(c: &RationalExpr, chart: &Chart) -> String {
    let s = render(c, chart);
    if c.numer().num_terms() > 1 && c.denom().is_one() {
        format!("({s})")
    } else {
        s
    }
}
