//! Numerical toolkit for the one-dimensional Kitaev-Heisenberg spin chain.
//!
//! The crate covers exact Pauli-string algebra, Hamiltonian construction,
//! exact and iterative diagonalization, a free-fermion oracle at the Kitaev
//! point, and real-time dynamics of sampled product states.

pub mod dynamics;
pub mod error;
pub mod fermion;
pub mod hamiltonian;
pub mod operator;
pub mod pauli;
pub mod spectral;
pub mod zeromode;

pub use error::{Error, PauliError, Result};
pub use pauli::{Axis, Pauli, PauliString, PauliSum};
