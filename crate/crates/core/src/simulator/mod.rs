//! Exact state-vector and density-matrix execution of layered circuits.

mod density;
mod exact;
mod kernel;
mod statevector;

pub use density::{density_run, DensityMatrix, MAX_DENSITY_QUBITS};
pub use exact::{evolve_exact, ExactPropagator, MAX_EXACT_QUBITS};
pub use statevector::{bitstring, run, unitary, Statevector, MAX_STATEVECTOR_QUBITS};
