//! Exact facet-class enumeration for symmetric 0/1 polytopes.
//!
//! The library works on polytopes given by their vertices (V-representation)
//! together with a symmetry group acting as permutations of the vertex list.
//! Facets are enumerated either completely (double description, adjacency
//! decomposition) or by adjacency sampling, and reduced to equivalence
//! classes under the group.
//!
//! All arithmetic is exact: coordinates are arbitrary-precision rationals and
//! inequalities are normalized integer functionals, so tightness and facet
//! identity are decided by equality, never by tolerance.

pub mod dd;
pub mod exact;
pub mod generators;
pub mod io;
pub mod model;
pub mod pivot;
pub mod sampler;
pub mod symmetry;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vertex index {index} out of range (n = {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("inequality is identically zero")]
    ZeroInequality,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("construction bug: {0}")]
    ConstructionBug(String),
    #[error("degenerate face: {0}")]
    DegenerateFace(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal invariant violation: {0}")]
    InvariantViolation(String),
    #[error("time limit exceeded")]
    Timeout,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
