//! Lie algebras of vector fields and abstract structure constants.

mod algebra;
pub mod linalg;
mod sc;

pub use algebra::{
    close_and_extract, express_in_span, generic_rank, is_locally_automorphic, same_span, solve_symmetries,
    LocalAutomorphy, VGLieAlgebra,
};
pub use sc::{is_unimodular, verify_isomorphic_sc, ScEntry, StructureConstants, UnimodularReport};

use thiserror::Error;

use crate::diffgeo::GeoError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("structure-constant index out of range for dimension {dim}")]
    IndexOutOfRange { dim: usize },
    #[error("c[{alpha}][{beta}][{gamma}] breaks antisymmetry")]
    NotAntisymmetric { alpha: usize, beta: usize, gamma: usize },
    #[error("Jacobi identity fails for ({alpha}, {beta}, {gamma})")]
    JacobiViolation { alpha: usize, beta: usize, gamma: usize },
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("map is singular")]
    SingularMap,
    #[error("closure exceeds {max_dim} dimensions")]
    NotFiniteDimensional { max_dim: usize },
    #[error("bracket of fields {alpha} and {beta} leaves the span with constant coefficients")]
    NotClosed { alpha: usize, beta: usize },
    #[error("basis field {0} depends linearly on the previous ones")]
    DependentBasis(usize),
    #[error("empty list of fields")]
    Empty,
    #[error(transparent)]
    Geo(#[from] GeoError),
}
