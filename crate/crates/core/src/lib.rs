//! Simulation of Gaussian quantum-optical circuits.
//!
//! A Gaussian state on `n` modes is tracked through its `2n` means and its
//! `2n x 2n` covariance matrix; every operation is a Gaussian semigroup
//! element `T(alpha, A, G)` acting as `xi -> xi A + alpha`,
//! `gamma -> A^T gamma A + G`. The cost of a simulation is therefore
//! polynomial in the number of modes, see [`ResourceCount`].
//!
//! Conventions: coordinates are `(q_1..q_n, p_1..p_n)`, hbar = 2 so the
//! vacuum covariance is the identity, and means are row vectors.
//!
//! ```
//! use gaussim::{GaussianMap, GaussianState};
//!
//! let vac = GaussianState::vacuum(1).unwrap();
//! let out = GaussianMap::squeeze(0.5).unwrap()
//!     .then(&GaussianMap::loss(0.5).unwrap()).unwrap()
//!     .apply(&vac).unwrap();
//! assert!((out.covariance()[(0, 0)] - ((-1.0f64).exp() + 1.0) / 2.0).abs() < 1e-15);
//! ```

pub mod bench;
pub mod circuit;
pub mod error;
pub mod maps;
pub mod measurement;
pub mod phase_space;
pub mod state;

pub use circuit::{Circuit, Instruction};
pub use error::{Error, Result};
pub use maps::{compose, CpReport, GaussianMap};
pub use measurement::{Feedforward, MeasurementRecord, Quadrature, RandomSource};
pub use state::{GaussianState, ResourceCount};
