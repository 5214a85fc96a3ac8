//! Simulation of bipartite qudit purification driven by the hermitian
//! generalized XOR gate.
//!
//! - [`qlinalg`]: dense operators, kets and density matrices on composite spaces.
//! - [`gates`]: GXOR, discrete Fourier gate, generalized Bell basis, teleportation.
//! - [`nonlinear_map`]: the GXOR-induced nonlinear map and its brute-force oracle.
//! - [`purification`]: Werner states, the twirl and depolarizing protocols,
//!   efficiency accounting and convergence-radius search.

pub mod error;
pub mod gates;
pub mod nonlinear_map;
pub mod purification;
pub mod qlinalg;

pub use error::{Error, Result};
