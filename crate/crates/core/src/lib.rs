//! Symbolic-numeric toolkit for multisymplectic Lie systems.

pub mod symexpr;
pub mod diffgeo;
pub mod liealgebra;
pub mod coalgebra;
pub mod multisymplectic;
pub mod prolong_invariants;
pub mod numeric;
pub mod system;
pub mod catalog;
