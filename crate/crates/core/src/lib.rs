//! Resonant graviton-photon three-wave mixing in a rectangular microwave
//! cavity: TE modes, gravitational-wave overlap integrals and couplings,
//! resonance search, and exact Fock-space dynamics of the trilinear
//! Hamiltonian.

pub mod analytics;
pub mod cavity;
pub mod constants;
pub mod error;
pub mod fock;
pub mod gw;
pub mod output;
pub mod quadrature;
pub mod resonance;
pub mod scenario;

pub use error::{Error, Result};
