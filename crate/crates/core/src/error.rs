//! Error type shared by all engine modules.

use thiserror::Error;

use crate::weil::{Tag, TagSet};

#[derive(Debug, Error)]
pub enum Error {
    /// A tag index outside the 64-tag capacity of the bitmask representation.
    #[error("tag index {0} exceeds the capacity of 64 nilpotent tags")]
    TagCapacity(usize),

    /// No free tags left in the allocation pool.
    #[error("tag budget exhausted: all 64 nilpotent tags are in use")]
    TagBudget,

    /// A fresh-tag requirement was violated (the tag already occurs in the data).
    #[error("tag ε{} collides with tags already present in the input", .0.index())]
    TagCollision(Tag),

    #[error("arity mismatch: expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },

    #[error("degree mismatch: expected {expected}, got {got}")]
    Degree { expected: usize, got: usize },

    /// A value to be extracted as a coefficient table contained tags other
    /// than the declared cube tags.
    #[error("value contains foreign tags {0:?}")]
    ForeignTags(TagSet),

    /// Two microsquares that should agree away from the top coefficient do not.
    #[error("microsquares disagree on D(2) at {slot}: gap {gap:.3e}")]
    D2Disagreement { slot: String, gap: f64 },

    /// Relativized strong difference: a coefficient that must agree differs.
    #[error("relativized strong difference: cubes disagree at {slot}: gap {gap:.3e}")]
    RelAgreement { slot: String, gap: f64 },

    /// One of the six admissibility constraints of the Jacobi residual failed.
    #[error("jacobi admissibility violated in expression {expr}: {source}")]
    JacobiAdmissibility {
        expr: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("tangent base points differ by {gap:.3e}")]
    BaseMismatch { gap: f64 },

    #[error("index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },

    #[error("permutation on {got} letters applied to degree-{expected} data")]
    PermSize { expected: usize, got: usize },

    #[error("not a permutation: {0:?}")]
    NotAPermutation(Vec<usize>),

    /// Validation of a supplied polynomial inverse failed.
    #[error("inverse map validation failed: max gap {gap:.3e}")]
    InverseValidation { gap: f64 },

    #[error("operation requires a symmetric connection")]
    NotSymmetric,

    /// Interior derivation is defined for form arguments of degree >= 1.
    #[error("interior derivation requires degrees k+1 >= 1 and l >= 1 (got k+1={k1}, l={l})")]
    InteriorDegree { k1: usize, l: usize },

    /// An agreement that holds structurally for well-formed inputs failed;
    /// this signals an engine bug, not a user error.
    #[error("internal agreement assertion failed in {context}: gap {gap:.3e}")]
    InternalAgreement { context: &'static str, gap: f64 },

    /// Malformed form / connection specification data.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// Symbolic inversion and connection pullback need unitriangular maps.
    #[error("map is not unitriangular; symbolic inversion is not supported")]
    NotTriangular,
}
