//! Exact amplitudes for linear and single-mode non-linear Boson Sampling,
//! synthesis of post-selected linear-optical gadgets, and the enlarged-network
//! simulation built from them.
//!
//! Conventions used throughout:
//! - Mode indices in public interfaces are 1-based.
//! - A network `U` maps `a_i† → Σ_j U[i][j] a_j†`; the transition amplitude is
//!   `per(U[S,T]) / √(∏s! ∏t!)` with rows taken from the input.
//! - "`A` then `B`" is the matrix product `A · B`.

pub mod analysis;
pub mod error;
pub mod fock;
pub mod gadget;
pub mod io;
pub mod linalg;
pub mod linear_bs;
pub mod nonlinear_bs;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use fock::{enumerate_states, FockState, StateSpace};
pub use gadget::GadgetSpec;
pub use linalg::ComplexMatrix;
pub use linear_bs::Distribution;
