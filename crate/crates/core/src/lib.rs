//! Simulation and analysis of the 1→3 phase-covariant cloning attack on BB84.
//!
//! The crate is organized around the attack pipeline:
//!
//! - [`quantum`] — dense complex linear algebra for small qubit systems:
//!   pure states, density operators, POVMs, partial trace, fidelity,
//!   entropy and the Holevo bound.
//! - [`cloner`] — the analytic cloner model: equatorial input states, the
//!   post-selected three-qubit output state, success probability, the
//!   closed-form fidelities and the disturbance they imply.
//! - [`fock`] — a first-principles bosonic simulation of the linear-optics
//!   cloning circuit (three beam splitters on dual-rail qubits) used as an
//!   independent check of the analytic model.
//! - [`eavesdrop`] — what Eve extracts: QBER with dark counts, her two-state
//!   ensembles, mutual information of a measurement, the conventional and
//!   the closed-form optimal measurements.
//! - [`optimizer`] — seeded numerical maximization of accessible information
//!   over POVMs, cross-validating the closed-form optimum.
//! - [`sweep`] — grid helpers; data-parallel with the `parallel` feature
//!   (default), sequential otherwise.
//!
//! All computations are pure functions of their inputs; values are immutable
//! after construction and safe to share across threads.

pub mod cloner;
pub mod eavesdrop;
pub mod fock;
pub mod optimizer;
pub mod quantum;
pub mod sweep;

pub use num_complex::Complex64 as C64;

// Matrix types appear in the public API; re-export the crate they come from.
pub use nalgebra;

/// Tolerance for structural invariants (positivity, completeness, trace).
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for algebraic identities checked on dimensions at most 8.
pub const ALGEBRAIC_TOL: f64 = 1e-12;

/// Errors produced by state construction and the analysis operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("amplitude vector has length {got}, expected {expected}")]
    InvalidLength { expected: usize, got: usize },
    #[error("qubit slot {slot} out of range for {n_qubits} qubits")]
    SlotOutOfRange { slot: usize, n_qubits: usize },
    #[error("value contains a non-finite entry")]
    NonFinite,
    #[error("matrix deviates from Hermitian by {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("operator has eigenvalue {min_eigenvalue:e} below tolerance")]
    NotPositive { min_eigenvalue: f64 },
    #[error("POVM elements deviate from completeness by {max_deviation:e}")]
    IncompletePovm { max_deviation: f64 },
    #[error("ensemble priors sum to {sum}, expected 1")]
    BadPriors { sum: f64 },
    #[error("{name} = {value} outside [{min}, {max}]")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    #[error("cannot normalize a zero-norm state")]
    ZeroNorm,
    #[error("empty input")]
    EmptyInput,
    #[error("slot assignment is not a permutation")]
    InvalidPermutation,
    #[error("degenerate channel: Bob never detects and dark counts are zero")]
    DegenerateChannel,
    #[error("POVM projection failed: element sum is singular")]
    SingularElementSum,
    #[error("invalid circuit topology: {0}")]
    InvalidTopology(String),
}

pub type Result<T> = std::result::Result<T, Error>;
