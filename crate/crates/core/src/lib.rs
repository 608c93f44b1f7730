//! Desk-scale toolkit for near-term quantum simulation experiments: Pauli algebra,
//! exact simulators, Heisenberg-chain Trotterization, sparse Pauli-Lindblad noise,
//! probabilistic error cancellation, zero-noise extrapolation, wire-cut circuit
//! knitting, variational time evolution and fault-tolerance cost fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod circuit_io;
pub mod error;
pub mod estimate;
pub mod hamiltonian;
pub mod knit;
pub mod noise;
pub mod pauli;
pub mod pec;
pub mod rng;
pub mod simulator;
pub mod varqte;

mod linalg;

pub use circuit::{Gate, Instruction, Layer, LayerKind, QuantumCircuit};
pub use error::{Error, ErrorCategory, ParseError, Result};
pub use noise::PauliLindbladModel;
pub use pauli::{Observable, Pauli, PauliString, Phase};
pub use simulator::{DensityMatrix, Statevector};

/// Crate version, embedded in every command-line result.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
