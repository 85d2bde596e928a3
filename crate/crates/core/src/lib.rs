//! Executable synthetic calculus of tangent-vector-valued differential forms
//! on model spaces `R^m`.
//!
//! The engine represents infinitesimals exactly: every evaluation happens in
//! the square-free nilpotent algebra `R[ε₁..ε₆₄]/(εᵢ²)` ([`weil`]), microcubes
//! are Kock–Lawvere coefficient tables ([`microcube`]), and the classical
//! operators — the Frölicher–Nijenhuis bracket, interior derivations and Lie
//! derivations — are built operationally from star composition and strong
//! differences ([`forms`], [`calculus`]). An independent coordinate-formula
//! implementation lives in [`oracle`] and is used to cross-check the engine.

pub mod calculus;
pub mod error;
pub mod forms;
pub mod microcube;
pub mod oracle;
pub mod weil;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Default absolute tolerance for agreement checks (strong-difference
/// admissibility, internal assertions). Generated inputs agree exactly; the
/// tolerance only absorbs float noise in composed pipelines.
pub const DEFAULT_TOL: f64 = 1e-9;

/// n! as a float; the alternation weights are reciprocals of these.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
