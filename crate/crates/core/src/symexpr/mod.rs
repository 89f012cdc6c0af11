//! Exact multivariate rational functions over Q.

mod chart;
mod parse;
pub mod poly;
mod rational;

pub use chart::{is_identifier, Chart, ChartRef};
pub use parse::{parse, render};
pub use poly::{gcd, Monomial, Poly, Q};
pub use rational::{poly_lcm, q_f64, RationalExpr};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("constraint is the zero polynomial")]
    ZeroConstraint,
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by zero at offset {0}")]
    DivisionByZeroAt(usize),
    #[error("denominator vanishes at the evaluation point")]
    Pole,
    #[error("no value assigned to variable {0}")]
    MissingAssignment(usize),
    #[error("slot {slot} out of range for a {m}-fold product")]
    InvalidSlot { slot: usize, m: usize },
}
