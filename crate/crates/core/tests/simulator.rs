use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use qcsc::simulator::{self, unitary, Statevector};
use qcsc::{Gate, Instruction, QuantumCircuit};

/// Full `2^n` matrix of one instruction, built entry by entry from its local matrix.
fn embed(op: &Instruction, n: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n;
    let qs = &op.qubits;
    let mask: usize = qs.iter().map(|q| 1 << q).sum();
    let local = |b: usize| qs.iter().enumerate().map(|(k, q)| ((b >> q) & 1) << k).sum::<usize>();
    DMatrix::from_fn(dim, dim, |i, j| {
        if i & !mask != j & !mask {
            return Complex64::new(0.0, 0.0);
        }
        match qs.len() {
            1 => op.gate.matrix1().unwrap()[local(i)][local(j)],
            _ => op.gate.matrix2().unwrap()[local(i)][local(j)],
        }
    })
}

fn dense_oracle(c: &QuantumCircuit) -> DMatrix<Complex64> {
    let n = c.n_qubits();
    let mut u = DMatrix::identity(1 << n, 1 << n);
    for layer in c.layers() {
        for op in layer.ops() {
            u = embed(op, n) * u;
        }
    }
    u
}

fn arb_circuit() -> impl Strategy<Value = QuantumCircuit> {
    (1usize..=4).prop_flat_map(|n| {
        let layer = proptest::collection::vec((0usize..14, -4.0f64..4.0, any::<u64>()), 1..4);
        proptest::collection::vec(layer, 0..6).prop_map(move |layers| {
            let mut c = QuantumCircuit::new(n);
            for spec in layers {
                let mut free: Vec<usize> = (0..n).collect();
                let mut ops = Vec::new();
                for (kind, t, pick) in spec {
                    let g = [
                        Gate::H, Gate::S, Gate::Sdg, Gate::X, Gate::Y, Gate::Z,
                        Gate::Rx(t), Gate::Ry(t), Gate::Rz(t),
                        Gate::Cx, Gate::Rxx(t), Gate::Ryy(t), Gate::Rzz(t), Gate::Swap,
                    ][kind];
                    if free.len() < g.arity() {
                        continue;
                    }
                    let mut qs = Vec::new();
                    for k in 0..g.arity() {
                        let idx = ((pick >> (8 * k)) as usize) % free.len();
                        qs.push(free.swap_remove(idx));
                    }
                    ops.push(Instruction::new(g, &qs));
                }
                if !ops.is_empty() {
                    c.push_layer(ops).unwrap();
                }
            }
            c
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_matches_dense_oracle(c in arb_circuit()) {
        let got = unitary(&c).unwrap();
        let want = dense_oracle(&c);
        prop_assert!((got - want).camax() < 1e-12);
    }

    #[test]
    fn adjoint_undoes_circuit(c in arb_circuit(), seed in 0usize..16) {
        let n = c.n_qubits();
        let start = Statevector::basis(n, seed % (1 << n)).unwrap();
        let mid = simulator::run(&c, &start).unwrap();
        let back = simulator::run(&c.adjoint().unwrap(), &mid).unwrap();
        prop_assert!((back.fidelity(&start).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn bell_sampling_frequencies() {
    let mut c = QuantumCircuit::new(2);
    c.push(&[(Gate::H, &[0])]).unwrap();
    c.push(&[(Gate::Cx, &[0, 1])]).unwrap();
    let psi = simulator::run(&c, &Statevector::zero(2).unwrap()).unwrap();
    let shots = 20_000;
    let counts = psi.sample_counts(shots, 17).unwrap();
    assert_eq!(counts.keys().copied().collect::<Vec<_>>(), vec![0, 3]);
    let p = counts[&0] as f64 / shots as f64;
    let sigma = (0.25 / shots as f64).sqrt();
    assert!((p - 0.5).abs() < 5.0 * sigma, "{p}");
}

#[test]
fn ghz_expectations() {
    let mut c = QuantumCircuit::new(3);
    c.push(&[(Gate::H, &[0])]).unwrap();
    c.push(&[(Gate::Cx, &[0, 1])]).unwrap();
    c.push(&[(Gate::Cx, &[1, 2])]).unwrap();
    let psi = simulator::run(&c, &Statevector::zero(3).unwrap()).unwrap();
    let obs = qcsc::Observable::from_labels(3, &[(1.0, "XXX"), (1.0, "ZZI"), (1.0, "ZII")]).unwrap();
    assert!((psi.expectation(&obs).unwrap() - 2.0).abs() < 1e-12);
}
