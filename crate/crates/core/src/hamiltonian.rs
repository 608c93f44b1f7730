//! Heisenberg chain `H = Σ_j σ⃗_j·σ⃗_{j+1} + Σ_j h_j Z_j` and its product-formula circuits.

use rand::Rng;

use crate::circuit::{Gate, Instruction, QuantumCircuit};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::{Observable, Pauli, PauliString};
use crate::rng;
use crate::simulator::{self, ExactPropagator};

/// CNOTs in the compiled bond exponential `exp(-iθ(XX+YY+ZZ))`.
pub const CNOTS_PER_BOND: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinChainHamiltonian {
    fields: Vec<f64>,
}

/// Product-formula order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrotterOrder {
    First,
    /// Symmetric arrangement: consecutive steps mirror each other, so each pair of
    /// steps forms a palindromic second-order formula.
    Second,
}

impl TryFrom<u32> for TrotterOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            1 => Ok(TrotterOrder::First),
            2 => Ok(TrotterOrder::Second),
            k => Err(Error::invalid(format!("unsupported Trotter order {k}"))),
        }
    }
}

impl TrotterOrder {
    pub fn as_u32(self) -> u32 {
        match self {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
        }
    }
}

impl SpinChainHamiltonian {
    pub fn new(fields: Vec<f64>) -> Result<Self> {
        if fields.len() < 2 {
            return Err(Error::invalid("chain needs at least 2 sites"));
        }
        if let Some(h) = fields.iter().find(|h| !(h.abs() <= 1.0)) {
            return Err(Error::invalid(format!("field {h} outside [-1, 1]")));
        }
        Ok(Self { fields })
    }

    /// Fields drawn uniformly from `[-1, 1]` with RNG stream 0 of `seed`.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, 0);
        Self::new((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn bonds(&self) -> Vec<(usize, usize)> {
        (1..self.n()).map(|j| (j - 1, j)).collect()
    }

    /// Pauli expansion: `XX, YY, ZZ` per bond then `h_j Z_j` per site.
    /// Zero fields vanish under normalization.
    pub fn observable(&self) -> Observable {
        let n = self.n();
        let mut terms = Vec::with_capacity(4 * n);
        for (a, b) in self.bonds() {
            for op in [Pauli::X, Pauli::Y, Pauli::Z] {
                let p = PauliString::from_sparse(n, &[(a, op), (b, op)]).expect("in range");
                terms.push((1.0, p));
            }
        }
        for (j, &h) in self.fields.iter().enumerate() {
            terms.push((h, PauliString::single(n, j, Pauli::Z).expect("in range")));
        }
        Observable::new(n, terms).expect("consistent widths")
    }

    /// Local pieces the product formula exponentiates one at a time: one entry per
    /// bond (`XX+YY+ZZ`) and per nonzero field.
    pub fn local_terms(&self) -> Vec<Vec<(f64, PauliString)>> {
        let n = self.n();
        let mut out: Vec<Vec<(f64, PauliString)>> = self
            .bonds()
            .into_iter()
            .map(|(a, b)| {
                [Pauli::X, Pauli::Y, Pauli::Z]
                    .into_iter()
                    .map(|op| {
                        (1.0, PauliString::from_sparse(n, &[(a, op), (b, op)]).expect("in range"))
                    })
                    .collect()
            })
            .collect();
        for (j, &h) in self.fields.iter().enumerate() {
            if h != 0.0 {
                out.push(vec![(h, PauliString::single(n, j, Pauli::Z).expect("in range"))]);
            }
        }
        out
    }

    fn bond_block(&self, c: &mut QuantumCircuit, parity: usize, theta: f64) -> Result<()> {
        let bonds: Vec<(usize, usize)> = self
            .bonds()
            .into_iter()
            .filter(|(a, _)| a % 2 == parity)
            .collect();
        if bonds.is_empty() {
            return Ok(());
        }
        // exp(-iθ(XX+YY+ZZ)) = CX·[RZ_b(2θ) RX_a(2θ) H_b]·CX·[H_b RX_a(−2θ) S_a S_b]·CX·Sdg_b,
        // exact including global phase.
        let layer = |f: &dyn Fn(usize, usize) -> Vec<Instruction>| -> Vec<Instruction> {
            bonds.iter().flat_map(|&(a, b)| f(a, b)).collect()
        };
        let cx = |a: usize, b: usize| vec![Instruction::new(Gate::Cx, &[a, b])];
        c.push_layer(layer(&|_, b| vec![Instruction::new(Gate::Sdg, &[b])]))?;
        c.push_layer(layer(&cx))?;
        c.push_layer(layer(&|a, b| {
            vec![Instruction::new(Gate::S, &[a]), Instruction::new(Gate::S, &[b])]
        }))?;
        c.push_layer(layer(&|a, b| {
            vec![
                Instruction::new(Gate::Rx(-2.0 * theta), &[a]),
                Instruction::new(Gate::H, &[b]),
            ]
        }))?;
        c.push_layer(layer(&cx))?;
        c.push_layer(layer(&|a, b| {
            vec![
                Instruction::new(Gate::Rx(2.0 * theta), &[a]),
                Instruction::new(Gate::H, &[b]),
            ]
        }))?;
        c.push_layer(layer(&|_, b| vec![Instruction::new(Gate::Rz(2.0 * theta), &[b])]))?;
        c.push_layer(layer(&cx))?;
        Ok(())
    }

    fn field_block(&self, c: &mut QuantumCircuit, dt: f64) -> Result<()> {
        c.push_layer(
            self.fields
                .iter()
                .enumerate()
                .filter(|(_, &h)| h != 0.0)
                .map(|(j, &h)| Instruction::new(Gate::Rz(2.0 * h * dt), &[j]))
                .collect(),
        )
    }

    /// Product-formula circuit for `e^{-iHt}` with `steps` steps.
    pub fn trotter_circuit(&self, t: f64, steps: usize, order: TrotterOrder) -> Result<QuantumCircuit> {
        if steps == 0 {
            return Err(Error::invalid("Trotter steps must be at least 1"));
        }
        if !t.is_finite() {
            return Err(Error::NonFinite("evolution time".into()));
        }
        let dt = t / steps as f64;
        let mut c = QuantumCircuit::new(self.n());
        for step in 0..steps {
            match order {
                TrotterOrder::First => {
                    self.bond_block(&mut c, 0, dt)?;
                    self.bond_block(&mut c, 1, dt)?;
                    self.field_block(&mut c, dt)?;
                }
                TrotterOrder::Second => {
                    let (first, second) = if step % 2 == 0 { (0, 1) } else { (1, 0) };
                    self.field_block(&mut c, dt / 2.0)?;
                    self.bond_block(&mut c, first, dt)?;
                    self.bond_block(&mut c, second, dt)?;
                    self.field_block(&mut c, dt / 2.0)?;
                }
            }
        }
        Ok(c)
    }

    /// Two-qubit layers in one step of either order.
    pub fn two_qubit_layers_per_step(&self) -> usize {
        if self.n() > 2 {
            2 * CNOTS_PER_BOND
        } else {
            CNOTS_PER_BOND
        }
    }

    /// `Σ_{j<k} ‖[H_j, H_k]‖` over [`local_terms`](Self::local_terms). Only terms with
    /// overlapping supports contribute; each norm is taken on the joint support.
    pub fn commutator_sum(&self) -> f64 {
        let terms = self.local_terms();
        let supports: Vec<Vec<usize>> = terms.iter().map(|t| support_of(t)).collect();
        let mut total = 0.0;
        for j in 0..terms.len() {
            for k in j + 1..terms.len() {
                if supports[j].iter().any(|q| supports[k].contains(q)) {
                    total += commutator_norm(&terms[j], &terms[k]);
                }
            }
        }
        total
    }

    /// First-order bound `(t²/2r)·Σ_{j<k} ‖[H_j,H_k]‖` on `‖U_trotter − e^{-iHt}‖`.
    pub fn trotter_bound_order1(&self, t: f64, steps: usize) -> f64 {
        t * t / (2.0 * steps as f64) * self.commutator_sum()
    }

    /// `‖U_circuit − e^{-iHt}‖₂` for small chains.
    pub fn operator_error(&self, circuit: &QuantumCircuit, t: f64) -> Result<f64> {
        crate::error::check_size(self.n(), circuit.n_qubits())?;
        let exact = ExactPropagator::new(&self.observable())?.unitary(t);
        let diff = simulator::unitary(circuit)? - exact;
        Ok(diff.singular_values().max())
    }

    /// Smallest step count whose first-order bound is at most `epsilon`.
    pub fn choose_steps(&self, t: f64, epsilon: f64) -> Result<usize> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("target error must be positive"));
        }
        let c = self.commutator_sum() * t * t / 2.0;
        if c <= epsilon {
            return Ok(1);
        }
        let mut r = (c / epsilon).ceil().max(1.0) as usize;
        while self.trotter_bound_order1(t, r) > epsilon {
            r += 1;
        }
        while r > 1 && self.trotter_bound_order1(t, r - 1) <= epsilon {
            r -= 1;
        }
        Ok(r)
    }
}

/// Number of CX gates.
pub fn cnot_count(circuit: &QuantumCircuit) -> usize {
    circuit.count_gates(|g| *g == Gate::Cx)
}

fn support_of(term: &[(f64, PauliString)]) -> Vec<usize> {
    let mut s: Vec<usize> = term.iter().flat_map(|(_, p)| p.support()).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// Spectral norm of `[A, B]` for Pauli sums, evaluated densely on the joint support.
pub fn commutator_norm(a: &[(f64, PauliString)], b: &[(f64, PauliString)]) -> f64 {
    let mut support = support_of(a);
    support.extend(support_of(b));
    support.sort_unstable();
    support.dedup();
    // i[A,B] = Σ 2i·a·b·phase·R over anticommuting pairs (PQ = phase·R); real coefficients.
    let mut terms = Vec::new();
    for (ca, pa) in a {
        for (cb, pb) in b {
            if !pa.commutes_unchecked(pb) {
                let (r, phase) = pa.multiply(pb).expect("same width");
                let coeff = (num_complex::Complex64::new(0.0, 2.0 * ca * cb) * phase.to_complex()).re;
                terms.push((coeff, r.restrict(&support)));
            }
        }
    }
    if terms.is_empty() {
        return 0.0;
    }
    let local = Observable::new(support.len(), terms).expect("consistent widths");
    if local.is_empty() {
        return 0.0;
    }
    linalg::hermitian_norm(&local.to_dense(), 1 << support.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{evolve_exact, run, Statevector};

    #[test]
    fn construction_counts() {
        let h2 = SpinChainHamiltonian::new(vec![0.0, 0.0]).unwrap();
        let labels: Vec<String> = h2.observable().terms().iter().map(|(_, p)| p.to_string()).collect();
        assert_eq!(labels, ["XX", "YY", "ZZ"]);
        let h3 = SpinChainHamiltonian::new(vec![0.1, -0.2, 0.3]).unwrap();
        assert_eq!(h3.observable().len(), 9);
        let h7 = SpinChainHamiltonian::random(7, 11).unwrap();
        assert_eq!(h7.observable().len(), 4 * 7 - 3);
        assert_eq!(h7, SpinChainHamiltonian::random(7, 11).unwrap());
        assert!(SpinChainHamiltonian::new(vec![0.0]).is_err());
        assert!(SpinChainHamiltonian::new(vec![0.0, 1.5]).is_err());
        assert!(SpinChainHamiltonian::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn operator_error_vanishes_for_one_bond_and_respects_bound() {
        let h = SpinChainHamiltonian::new(vec![0.0, 0.0]).unwrap();
        let c = h.trotter_circuit(0.8, 1, TrotterOrder::First).unwrap();
        assert!(h.operator_error(&c, 0.8).unwrap() < 1e-12);
        let h4 = SpinChainHamiltonian::random(4, 2).unwrap();
        let c = h4.trotter_circuit(0.5, 3, TrotterOrder::First).unwrap();
        let err = h4.operator_error(&c, 0.5).unwrap();
        assert!(err > 0.0 && err <= h4.trotter_bound_order1(0.5, 3));
    }

    #[test]
    fn single_bond_is_exact() {
        let h = SpinChainHamiltonian::new(vec![0.0, 0.0]).unwrap();
        let mut psi = Statevector::zero(2).unwrap();
        psi.apply_gate(&Gate::Ry(0.9), &[0]).unwrap();
        psi.apply_gate(&Gate::Rx(0.3), &[1]).unwrap();
        for (t, r) in [(0.4, 1), (1.7, 3), (-2.2, 2)] {
            for order in [TrotterOrder::First, TrotterOrder::Second] {
                let c = h.trotter_circuit(t, r, order).unwrap();
                let a = run(&c, &psi).unwrap();
                let b = evolve_exact(&h.observable(), &psi, t).unwrap();
                // Global phase included: amplitudes agree, not just fidelity.
                assert!((a.inner(&b).unwrap() - 1.0).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn cnot_accounting() {
        let h3 = SpinChainHamiltonian::random(3, 1).unwrap();
        assert_eq!(cnot_count(&h3.trotter_circuit(0.5, 1, TrotterOrder::First).unwrap()), 6);
        assert_eq!(cnot_count(&QuantumCircuit::new(3)), 0);
        let h = SpinChainHamiltonian::random(100, 5).unwrap();
        let c1 = h.trotter_circuit(100.0, 100, TrotterOrder::First).unwrap();
        assert_eq!(cnot_count(&c1), 29_700);
        let c2 = h.trotter_circuit(100.0, 100, TrotterOrder::Second).unwrap();
        assert_eq!(cnot_count(&c2), 29_700);
        assert!(c2.depth() > c1.depth());
        assert_eq!(c1.two_qubit_layer_count(), 100 * h.two_qubit_layers_per_step());
    }

    #[test]
    fn cnot_count_is_additive() {
        let h = SpinChainHamiltonian::random(5, 2).unwrap();
        let a = h.trotter_circuit(1.0, 2, TrotterOrder::First).unwrap();
        let b = h.trotter_circuit(0.3, 3, TrotterOrder::Second).unwrap();
        let mut ab = a.clone();
        ab.append(&b).unwrap();
        assert_eq!(cnot_count(&ab), cnot_count(&a) + cnot_count(&b));
    }

    #[test]
    fn order_validation() {
        assert!(TrotterOrder::try_from(3).is_err());
        assert_eq!(TrotterOrder::try_from(2).unwrap(), TrotterOrder::Second);
        let h = SpinChainHamiltonian::random(3, 0).unwrap();
        assert!(h.trotter_circuit(1.0, 0, TrotterOrder::First).is_err());
    }

    #[test]
    fn bound_scaling() {
        let h2 = SpinChainHamiltonian::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(h2.trotter_bound_order1(1.0, 1), 0.0);
        let h = SpinChainHamiltonian::random(6, 3).unwrap();
        let b4 = h.trotter_bound_order1(1.0, 4);
        let b8 = h.trotter_bound_order1(1.0, 8);
        assert!(b4 > 0.0);
        assert!((b4 / b8 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bond_pair_commutator_norm() {
        // Two Heisenberg bonds sharing a site: ‖[σ_0·σ_1, σ_1·σ_2]‖ = 2‖σ_0·(σ_1×σ_2)‖ = 4√3.
        let h = SpinChainHamiltonian::new(vec![0.0; 3]).unwrap();
        let terms = h.local_terms();
        let norm = commutator_norm(&terms[0], &terms[1]);
        assert!((norm - 4.0 * 3f64.sqrt()).abs() < 1e-10, "{norm}");
    }

    #[test]
    fn choose_steps_matches_scan() {
        let h = SpinChainHamiltonian::random(4, 9).unwrap();
        let r = h.choose_steps(1.0, 0.01).unwrap();
        let scanned = (1..100_000)
            .find(|&k| h.trotter_bound_order1(1.0, k) <= 0.01)
            .unwrap();
        assert_eq!(r, scanned);
        assert_eq!(h.choose_steps(1.0, 1e9).unwrap(), 1);
        assert!(h.choose_steps(1.0, 0.0).is_err());
        let mut prev = 0;
        for k in 0..12 {
            let r = h.choose_steps(1.0, 0.5 / 2f64.powi(k)).unwrap();
            assert!(r >= prev);
            prev = r;
        }
    }
}
