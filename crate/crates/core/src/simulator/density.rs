use num_complex::Complex64;

use super::kernel::{apply_1q, apply_2q, conj1, conj2};
use super::statevector::Statevector;
use crate::circuit::{LayerKind, QuantumCircuit};
use crate::error::{check_size, Error, Result};
use crate::noise::PauliLindbladModel;
use crate::pauli::{Observable, PauliString};

pub const MAX_DENSITY_QUBITS: usize = 10;

const TRACE_TOLERANCE: f64 = 1e-10;

/// Mixed state stored row-major; entry `(r, c)` sits at flat index `r·2ⁿ + c`.
///
/// Seen as a `2n`-qubit vector, the row index occupies the high `n` bits and the
/// column index the low `n` bits, so `UρU†` is `U` on the high half and `conj(U)`
/// on the low half.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    fn check_width(n_qubits: usize) -> Result<()> {
        if n_qubits > MAX_DENSITY_QUBITS {
            return Err(Error::TooManyQubits {
                n: n_qubits,
                max: MAX_DENSITY_QUBITS,
                what: "density matrix",
            });
        }
        Ok(())
    }

    pub fn from_statevector(psi: &Statevector) -> Result<Self> {
        Self::check_width(psi.n_qubits())?;
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = a[r] * a[c].conj();
            }
        }
        Ok(Self {
            n_qubits: psi.n_qubits(),
            data,
        })
    }

    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::from_statevector(&Statevector::zero(n_qubits)?)
    }

    /// Validates Hermiticity, unit trace and (up to `1e-9`) positivity.
    pub fn from_matrix(n_qubits: usize, data: Vec<Complex64>) -> Result<Self> {
        Self::check_width(n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(Error::invalid("density matrix has wrong number of entries"));
        }
        let rho = Self { n_qubits, data };
        if rho.hermiticity_error() > TRACE_TOLERANCE {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        if (rho.trace().re - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::invalid("density matrix trace is not 1"));
        }
        if rho.min_eigenvalue() < -1e-9 {
            return Err(Error::invalid("density matrix is not positive semidefinite"));
        }
        Ok(rho)
    }

    /// `Σ wᵢ |ψᵢ⟩⟨ψᵢ|` for nonnegative weights summing to one.
    pub fn mixture(parts: &[(f64, &Statevector)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("empty mixture"))?;
        let n = first.1.n_qubits();
        Self::check_width(n)?;
        let dim = 1usize << n;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (w, psi) in parts {
            check_size(n, psi.n_qubits())?;
            let a = psi.amplitudes();
            for r in 0..dim {
                for c in 0..dim {
                    data[r * dim + c] += a[r] * a[c].conj() * *w;
                }
            }
        }
        Self::from_matrix(n, data)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let dim = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| {
            // Symmetrize so the solver sees an exactly Hermitian input.
            (self.get(r, c) + self.get(c, r).conj()) * 0.5
        });
        nalgebra::SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    fn debug_check_trace(&self) {
        debug_assert!(
            (self.trace().re - 1.0).abs() < TRACE_TOLERANCE,
            "trace drifted to {}",
            self.trace()
        );
    }

    pub fn apply_instruction(&mut self, op: &crate::circuit::Instruction) -> Result<()> {
        let n = self.n_qubits;
        for &q in &op.qubits {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits: n });
            }
        }
        if let Some(m) = op.gate.matrix1() {
            let q = op.qubits[0];
            apply_1q(&mut self.data, n + q, &m);
            apply_1q(&mut self.data, q, &conj1(&m));
        } else if let Some(m) = op.gate.matrix2() {
            let (a, b) = (op.qubits[0], op.qubits[1]);
            apply_2q(&mut self.data, n + a, n + b, &m);
            apply_2q(&mut self.data, a, b, &conj2(&m));
        }
        self.debug_check_trace();
        Ok(())
    }

    /// `ρ ↦ PρP`.
    pub fn conjugate_by_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.mix_with_pauli(p, 0.0)
    }

    /// `ρ ↦ wρ + (1-w)PρP`, the single-generator Pauli channel.
    pub fn mix_with_pauli(&mut self, p: &PauliString, w: f64) -> Result<()> {
        check_size(self.n_qubits, p.n_qubits())?;
        let (x, z) = p.masks();
        let (x, z) = (x as usize, z as usize);
        let dim = self.dim();
        let old = self.data.clone();
        for r in 0..dim {
            let rs = r ^ x;
            for c in 0..dim {
                let cs = c ^ x;
                let flips = ((rs & z).count_ones() + (cs & z).count_ones()) % 2;
                let v = old[rs * dim + cs];
                let conj = if flips == 1 { -v } else { v };
                self.data[r * dim + c] = old[r * dim + c] * w + conj * (1.0 - w);
            }
        }
        self.debug_check_trace();
        Ok(())
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        check_size(self.n_qubits, p.n_qubits())?;
        let (x, z) = p.masks();
        let dim = self.dim();
        // Tr(Pρ) = Σ_b ⟨b|ρ|b'⟩⟨b'|P|b⟩ with P|b⟩ = phase(b)|b^x⟩.
        let acc: Complex64 = (0..dim)
            .map(|b| PauliString::basis_phase(x, z, b) * self.get(b, b ^ x as usize))
            .sum();
        Ok(acc.re)
    }

    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        check_size(self.n_qubits, obs.n_qubits())?;
        obs.terms()
            .iter()
            .map(|(c, p)| Ok(c * self.pauli_expectation(p)?))
            .sum()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Matrix square `ρ²` without normalization.
    pub(crate) fn square(&self) -> Vec<Complex64> {
        let dim = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.data[r * dim + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..dim {
                    out[r * dim + c] += a * self.data[k * dim + c];
                }
            }
        }
        out
    }

    /// Reduced state on `keep` (listed order becomes the new qubit order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        for &q in keep {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        let traced: Vec<usize> = (0..self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let (k, dim) = (keep.len(), self.dim());
        let kd = 1usize << k;
        let embed = |local: usize, env: usize| {
            let mut full = 0usize;
            for (i, &q) in keep.iter().enumerate() {
                full |= ((local >> i) & 1) << q;
            }
            for (i, &q) in traced.iter().enumerate() {
                full |= ((env >> i) & 1) << q;
            }
            full
        };
        let mut data = vec![Complex64::new(0.0, 0.0); kd * kd];
        for r in 0..kd {
            for c in 0..kd {
                data[r * kd + c] = (0..1usize << traced.len())
                    .map(|e| self.data[embed(r, e) * dim + embed(c, e)])
                    .sum();
            }
        }
        Ok(DensityMatrix { n_qubits: k, data })
    }

    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Runs `circuit` on `rho0`, applying `noise[k]` exactly after the `k`-th
/// two-qubit layer. An empty `noise` slice means a noiseless run.
pub fn density_run(
    circuit: &QuantumCircuit,
    noise: &[PauliLindbladModel],
    rho0: &DensityMatrix,
) -> Result<DensityMatrix> {
    check_size(circuit.n_qubits(), rho0.n_qubits())?;
    let layers = circuit.two_qubit_layer_count();
    if !noise.is_empty() && noise.len() != layers {
        return Err(Error::LayerModelMismatch {
            layers,
            models: noise.len(),
        });
    }
    let mut rho = rho0.clone();
    let mut k = 0;
    for layer in circuit.layers() {
        if layer.kind() == LayerKind::Measurement {
            continue;
        }
        for op in layer.ops() {
            rho.apply_instruction(op)?;
        }
        if layer.kind() == LayerKind::TwoQubit {
            if let Some(model) = noise.get(k) {
                crate::noise::apply_channel(&mut rho, model)?;
            }
            k += 1;
        }
    }
    Ok(rho)
}
