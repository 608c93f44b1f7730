use qcsc::hamiltonian::{cnot_count, SpinChainHamiltonian, TrotterOrder};
use qcsc::simulator::{self, evolve_exact, Statevector};

fn infidelity(h: &SpinChainHamiltonian, steps: usize, order: TrotterOrder) -> f64 {
    let start = Statevector::basis(h.n(), 0b0101 % (1 << h.n())).unwrap();
    let exact = evolve_exact(&h.observable(), &start, 1.0).unwrap();
    let c = h.trotter_circuit(1.0, steps, order).unwrap();
    let approx = simulator::run(&c, &start).unwrap();
    1.0 - approx.fidelity(&exact).unwrap()
}

#[test]
fn fidelity_improves_with_steps() {
    let h = SpinChainHamiltonian::random(6, 3).unwrap();
    let errs: Vec<f64> = [1, 2, 4, 8, 16]
        .into_iter()
        .map(|r| infidelity(&h, r, TrotterOrder::First))
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn second_order_beats_first() {
    for seed in 0..3 {
        let h = SpinChainHamiltonian::random(4 + seed as usize, seed).unwrap();
        for r in [8, 16] {
            let a = h.operator_error(&h.trotter_circuit(1.0, r, TrotterOrder::First).unwrap(), 1.0).unwrap();
            let b = h.operator_error(&h.trotter_circuit(1.0, r, TrotterOrder::Second).unwrap(), 1.0).unwrap();
            assert!(b <= a, "seed {seed} r {r}: {b} > {a}");
        }
    }
}

#[test]
fn second_order_converges_quadratically() {
    let h = SpinChainHamiltonian::random(4, 11).unwrap();
    let e = |r| h.operator_error(&h.trotter_circuit(1.0, r, TrotterOrder::Second).unwrap(), 1.0).unwrap();
    let ratio = e(8) / e(16);
    assert!(ratio > 3.0, "{ratio}");
}

#[test]
fn cnot_counts_follow_bonds() {
    for n in [2, 3, 7] {
        let h = SpinChainHamiltonian::random(n, 1).unwrap();
        for r in [1, 3] {
            let first = cnot_count(&h.trotter_circuit(0.5, r, TrotterOrder::First).unwrap());
            let second = cnot_count(&h.trotter_circuit(0.5, r, TrotterOrder::Second).unwrap());
            assert_eq!(first, 3 * (n - 1) * r);
            assert_eq!(second, first);
        }
    }
}

#[test]
fn chosen_steps_match_linear_scan() {
    let h = SpinChainHamiltonian::random(4, 2).unwrap();
    let r = h.choose_steps(1.0, 0.01).unwrap();
    let scan = (1..).find(|&k| h.trotter_bound_order1(1.0, k) <= 0.01).unwrap();
    assert_eq!(r, scan);
}
