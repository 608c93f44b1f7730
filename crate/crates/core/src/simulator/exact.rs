use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::statevector::Statevector;
use crate::error::{check_size, Error, Result};
use crate::pauli::Observable;

pub const MAX_EXACT_QUBITS: usize = 12;

/// Spectral decomposition `H = V diag(E) V†`, reusable for many times `t`.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    n_qubits: usize,
    energies: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

impl ExactPropagator {
    pub fn new(h: &Observable) -> Result<Self> {
        let n = h.n_qubits();
        if n > MAX_EXACT_QUBITS {
            return Err(Error::TooManyQubits {
                n,
                max: MAX_EXACT_QUBITS,
                what: "exact evolution",
            });
        }
        let dim = 1usize << n;
        let dense = h.to_dense();
        let m = DMatrix::from_fn(dim, dim, |r, c| dense[r * dim + c]);
        let eig = nalgebra::SymmetricEigen::new(m);
        Ok(Self {
            n_qubits: n,
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn energies(&self) -> &[f64] {
        self.energies.as_slice()
    }

    /// `e^{-iHt}|ψ⟩`.
    pub fn evolve(&self, state: &Statevector, t: f64) -> Result<Statevector> {
        check_size(self.n_qubits, state.n_qubits())?;
        let psi = DVector::from_column_slice(state.amplitudes());
        let mut coeffs = self.vectors.adjoint() * psi;
        for (c, e) in coeffs.iter_mut().zip(self.energies.iter()) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        let out = &self.vectors * coeffs;
        Ok(Statevector::from_raw(self.n_qubits, out.as_slice().to_vec()))
    }

    /// Dense `e^{-iHt}`.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let phases = DMatrix::from_diagonal(&DVector::from_iterator(
            self.energies.len(),
            self.energies
                .iter()
                .map(|e| Complex64::from_polar(1.0, -e * t)),
        ));
        &self.vectors * phases * self.vectors.adjoint()
    }
}

/// `e^{-iHt}|ψ⟩` for `n ≤ 12`.
pub fn evolve_exact(h: &Observable, state: &Statevector, t: f64) -> Result<Statevector> {
    check_size(h.n_qubits(), state.n_qubits())?;
    ExactPropagator::new(h)?.evolve(state, t)
}
