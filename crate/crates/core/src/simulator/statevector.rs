use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::exact::MAX_EXACT_QUBITS;
use super::kernel::{apply_1q, apply_2q};
use crate::circuit::{Gate, Instruction, LayerKind, QuantumCircuit};
use crate::error::{check_size, Error, Result};
use crate::pauli::{Observable, PauliString};
use crate::rng;

/// Largest register the state-vector backend accepts.
pub const MAX_STATEVECTOR_QUBITS: usize = 24;

const NORM_TOLERANCE: f64 = 1e-10;

/// Pure state over `n` qubits. Basis index `b` holds qubit `k` in bit `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_STATEVECTOR_QUBITS {
            return Err(Error::TooManyQubits {
                n: n_qubits,
                max: MAX_STATEVECTOR_QUBITS,
                what: "state vector",
            });
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::invalid("amplitude count must be a power of two"));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        let sv = Self { n_qubits, amps };
        let norm = sv.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(sv)
    }

    pub(crate) fn from_raw(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn debug_check_norm(&self) {
        debug_assert!(
            (self.norm() - 1.0).abs() < NORM_TOLERANCE,
            "norm drifted to {}",
            self.norm()
        );
    }

    pub fn apply_gate(&mut self, gate: &Gate, qubits: &[usize]) -> Result<()> {
        if qubits.len() != gate.arity() {
            return Err(Error::invalid(format!(
                "gate {} takes {} qubit(s)",
                gate.name(),
                gate.arity()
            )));
        }
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        if let Some(m) = gate.matrix1() {
            apply_1q(&mut self.amps, qubits[0], &m);
        } else if let Some(m) = gate.matrix2() {
            if qubits[0] == qubits[1] {
                return Err(Error::QubitCollision { qubit: qubits[0] });
            }
            apply_2q(&mut self.amps, qubits[0], qubits[1], &m);
        }
        self.debug_check_norm();
        Ok(())
    }

    pub fn apply(&mut self, op: &Instruction) -> Result<()> {
        self.apply_gate(&op.gate, &op.qubits)
    }

    /// Applies the Pauli operator itself (no phase beyond its matrix).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        check_size(self.n_qubits, p.n_qubits())?;
        let (x, z) = p.masks();
        if x == 0 {
            if z != 0 {
                for (b, a) in self.amps.iter_mut().enumerate() {
                    if (b as u64 & z).count_ones() % 2 == 1 {
                        *a = -*a;
                    }
                }
            }
            return Ok(());
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            out[b ^ x as usize] = PauliString::basis_phase(x, z, b) * a;
        }
        self.amps = out;
        Ok(())
    }

    /// Applies `exp(-iθP/2)`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        let mut rotated = self.clone();
        rotated.apply_pauli(p)?;
        let (s, c) = (theta / 2.0).sin_cos();
        let f = Complex64::new(0.0, -s);
        for (a, pa) in self.amps.iter_mut().zip(&rotated.amps) {
            *a = *a * c + f * pa;
        }
        self.debug_check_norm();
        Ok(())
    }

    /// Applies every layer in order. Terminal measurement layers are markers and
    /// leave the state untouched.
    pub fn run(&mut self, circuit: &QuantumCircuit) -> Result<()> {
        check_size(circuit.n_qubits(), self.n_qubits)?;
        for layer in circuit.layers() {
            if layer.kind() == LayerKind::Measurement {
                continue;
            }
            for op in layer.ops() {
                self.apply(op)?;
            }
        }
        Ok(())
    }

    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        check_size(self.n_qubits, other.n_qubits)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `⟨ψ|P|ψ⟩`, real for any Pauli.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        check_size(self.n_qubits, p.n_qubits())?;
        let (x, z) = p.masks();
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            acc += self.amps[b ^ x as usize].conj() * PauliString::basis_phase(x, z, b) * a;
        }
        if acc.im.abs() > 1e-10 {
            return Err(Error::NonFinite(format!(
                "Pauli expectation has imaginary residue {}",
                acc.im
            )));
        }
        Ok(acc.re)
    }

    pub fn expectation(&self, obs: &Observable) -> Result<f64> {
        check_size(self.n_qubits, obs.n_qubits())?;
        obs.terms()
            .iter()
            .map(|(c, p)| Ok(c * self.pauli_expectation(p)?))
            .sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Draws `shots` computational-basis outcomes, keyed by basis index.
    pub fn sample_counts(&self, shots: usize, seed: u64) -> Result<BTreeMap<usize, usize>> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut cumulative = Vec::with_capacity(self.amps.len());
        let mut total = 0.0;
        for p in self.probabilities() {
            total += p;
            cumulative.push(total);
        }
        let mut rng = rng::stream(seed, 0);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let r: f64 = rng.random::<f64>() * total;
            let idx = cumulative
                .partition_point(|&c| c <= r)
                .min(self.amps.len() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// CSV dump with header `index,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,re,im\n");
        for (i, a) in self.amps.iter().enumerate() {
            let _ = writeln!(s, "{i},{},{}", a.re, a.im);
        }
        s
    }
}

/// Bitstring of a basis index with qubit 0 as the leftmost character.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|k| if (index >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Runs `circuit` on a copy of `initial`.
pub fn run(circuit: &QuantumCircuit, initial: &Statevector) -> Result<Statevector> {
    let mut state = initial.clone();
    state.run(circuit)?;
    Ok(state)
}

/// Dense unitary of a measurement-free circuit, column `j` being the image of
/// basis state `j`.
pub fn unitary(circuit: &QuantumCircuit) -> Result<DMatrix<Complex64>> {
    let n = circuit.n_qubits();
    if n > MAX_EXACT_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_EXACT_QUBITS,
            what: "dense unitary",
        });
    }
    let dim = 1usize << n;
    let mut u = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let col = run(circuit, &Statevector::basis(n, j)?)?;
        u.column_mut(j).copy_from_slice(col.amplitudes());
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply_gate(&Gate::H, &[0]).unwrap();
        assert!(close(s.amplitudes()[0], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[1], FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn cx_flips_target() {
        // |10⟩ in label order: qubit 0 set.
        let mut s = Statevector::basis(2, 0b01).unwrap();
        s.apply_gate(&Gate::Cx, &[0, 1]).unwrap();
        assert!(close(s.amplitudes()[0b11], 1.0, 0.0));
        assert_eq!(
            s.apply_gate(&Gate::Cx, &[1, 1]),
            Err(Error::QubitCollision { qubit: 1 })
        );
    }

    #[test]
    fn rzz_phase_on_zero() {
        let theta = 0.731;
        let mut s = Statevector::zero(2).unwrap();
        s.apply_gate(&Gate::Rzz(theta), &[0, 1]).unwrap();
        let expected = Complex64::from_polar(1.0, -theta / 2.0);
        assert!((s.amplitudes()[0] - expected).norm() < 1e-12);
    }

    #[test]
    fn bell_state_expectations() {
        let mut c = QuantumCircuit::new(2);
        c.push(&[(Gate::H, &[0])]).unwrap();
        c.push(&[(Gate::Cx, &[0, 1])]).unwrap();
        let s = run(&c, &Statevector::zero(2).unwrap()).unwrap();
        assert!(close(s.amplitudes()[0], FRAC_1_SQRT_2, 0.0));
        assert!(close(s.amplitudes()[3], FRAC_1_SQRT_2, 0.0));
        let zz = Observable::from_labels(2, &[(1.0, "ZZ")]).unwrap();
        let z0 = Observable::from_labels(2, &[(1.0, "ZI")]).unwrap();
        assert!((s.expectation(&zz).unwrap() - 1.0).abs() < 1e-12);
        assert!(s.expectation(&z0).unwrap().abs() < 1e-12);
        let z = Observable::from_labels(1, &[(1.0, "Z")]).unwrap();
        assert!((Statevector::zero(1).unwrap().expectation(&z).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let s = Statevector::basis(3, 5).unwrap();
        assert_eq!(run(&QuantumCircuit::new(3), &s).unwrap(), s);
        assert!(matches!(
            run(&QuantumCircuit::new(2), &s),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn pauli_rotation_matches_gate() {
        let p = PauliString::parse("ZZ", 2).unwrap();
        let mut a = Statevector::zero(2).unwrap();
        a.apply_gate(&Gate::H, &[0]).unwrap();
        let mut b = a.clone();
        a.apply_pauli_rotation(&p, PI / 3.0).unwrap();
        b.apply_gate(&Gate::Rzz(PI / 3.0), &[0, 1]).unwrap();
        assert!(a.fidelity(&b).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(Statevector::zero(3).unwrap().sample_counts(0, 1), Err(Error::ZeroShots));
        let only = Statevector::zero(3).unwrap().sample_counts(500, 1).unwrap();
        assert_eq!(only.len(), 1);
        assert_eq!(only[&0], 500);
        let mut s = Statevector::zero(2).unwrap();
        s.apply_gate(&Gate::H, &[1]).unwrap();
        assert_eq!(s.sample_counts(1000, 9).unwrap(), s.sample_counts(1000, 9).unwrap());
        assert_eq!(bitstring(0b01, 2), "10");
    }

    #[test]
    fn csv_dump() {
        let s = Statevector::zero(1).unwrap();
        assert_eq!(s.to_csv(), "index,re,im\n0,1,0\n1,0,0\n");
    }
}
