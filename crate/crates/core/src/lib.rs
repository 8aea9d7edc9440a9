//! Reduced control systems on the Schmidt sphere.
//!
//! A bipartite pure state under fast local unitary control is steered only
//! through its (quasi-)singular values. This crate computes the induced linear
//! vector fields on those values, integrates the reduced and the full
//! Schrödinger dynamics, builds exact lifts via compensating local
//! Hamiltonians and checks that both pictures agree.

pub mod cli;
pub mod error;
pub mod factor;
pub mod fields;
pub mod io;
pub mod lift;
pub mod linalg;
pub mod operators;
pub mod reduced;
pub mod sampling;
pub mod states;
pub mod symlie;

pub use error::{Error, Result};
pub use operators::{CouplingHamiltonian, LocalHamiltonian, LocalUnitary};
pub use states::{BipartiteState, Kind, SchmidtPoint, Shape, WeylElement};
