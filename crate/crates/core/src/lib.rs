//! First-order simulation of circuits built from spontaneous parametric
//! down-conversion crystals, path alignment and linear optics.
//!
//! Paths are qutrits (`0`, `H`, `V`). Crystal gates create at most one photon
//! pair, so every amplitude is a truncated series `c00 + c10·κ + c01·κ̄`
//! ([`PerturbAmp`]) with `κ = gα`. On top of the unitary picture the crate
//! provides:
//!
//! - [`effective`]: the vacuum-free superposer picture with its direct-sum
//!   block storage and 5×5 translation matrix,
//! - [`fock`]: a brute-force truncated Fock-space simulator of the full
//!   down-conversion Hamiltonian, used as an independent oracle,
//! - [`experiments`]: builders for the standard circuits and the modular
//!   superposition synthesizer,
//! - [`analysis`]: post-selected probabilities, reduced density matrices and
//!   sweeps,
//! - [`dsl`]: a line-oriented circuit language with a formatter and
//!   diagnostics.

pub mod amp;
pub mod analysis;
pub mod circuit;
pub mod decompose;
pub mod dsl;
pub mod effective;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod gates;
pub mod linalg;
pub mod report;
pub mod state;

pub use amp::{amp_mul, unit_phase, Order, PerturbAmp};
pub use circuit::{Circuit, Execution, Probe, Program};
pub use error::{Error, Result};
pub use gates::{BsConvention, Gate};
pub use state::{extract_order, vacuum_state, Ket, KetState, Qutrit};
