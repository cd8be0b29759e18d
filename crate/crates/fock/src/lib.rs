//! Brute-force truncated Fock-space simulator.
//!
//! Each mode keeps its lowest `d` number states, so an `n`-mode state costs
//! `d^n` amplitudes (pure) or `d^(2n)` entries (mixed). Quadratures follow
//! the engine's convention `q = a + a^dag`, `p = -i(a - a^dag)`. Nothing here
//! reuses the engine's `(A, G)` formulas: gates are exponentials of
//! quadratic Hamiltonians, loss and amplification are dilations with a
//! vacuum ancilla, and moments are operator expectation values.

pub mod circuit;
pub mod compare;
pub mod corpus;
mod error;
mod layout;
pub mod linalg;
pub mod ops;
pub mod state;

pub use compare::{compare, ComparisonReport, Verdict};
pub use error::{FockError, Result};
pub use state::{FockState, Generator, Moments};

/// Largest Hilbert-space dimension `d^n` accepted.
pub const MAX_DIM: usize = 8000;

/// Largest dimension for which a density matrix is materialized.
pub const MAX_MIXED_DIM: usize = 3000;

/// Top-level population above which a truncation is considered too small.
pub const TRUNCATION_TOL: f64 = 1e-10;
