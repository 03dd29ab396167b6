//! Exact Lie-theoretic machinery for quasi-Hamiltonian BKS pairings.
//!
//! The crate builds root systems for all compact simple simply-connected
//! group types over exact rationals, enumerates Weyl groups, classifies
//! alcove points, implements the half-density calculus used by the pairing
//! formula, and evaluates the pairing itself together with independent
//! brute-force oracles for every derived quantity.

pub mod alcove;
pub mod cli;
pub mod density;
pub mod error;
pub mod oracle;
pub mod pairing;
pub mod rat;
pub mod rootsys;
pub mod verify;
pub mod weyl;

pub use error::Error;
