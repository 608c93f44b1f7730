use nalgebra::Matrix2;
use num_complex::Complex64;

use qcsc::knit::{execute_plan, plan_wire_cut, CutPoint, KnitMode, PreparedState, WIRE_CUT_TERMS};
use qcsc::simulator::{self, Statevector};
use qcsc::{Gate, Observable, Pauli, QuantumCircuit};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(p: Pauli) -> Matrix2<Complex64> {
    match p {
        Pauli::I => Matrix2::identity(),
        Pauli::X => Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        Pauli::Y => Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        Pauli::Z => Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    }
}

fn projector(s: PreparedState) -> Matrix2<Complex64> {
    let (p, sign) = match s {
        PreparedState::Zero => (Pauli::Z, 1.0),
        PreparedState::One => (Pauli::Z, -1.0),
        PreparedState::Plus => (Pauli::X, 1.0),
        PreparedState::Minus => (Pauli::X, -1.0),
        PreparedState::PlusI => (Pauli::Y, 1.0),
        PreparedState::MinusI => (Pauli::Y, -1.0),
    };
    (Matrix2::identity() + pauli(p) * c(sign, 0.0)) * c(0.5, 0.0)
}

#[test]
fn terms_reconstruct_identity_channel() {
    let inputs = [
        Matrix2::new(c(0.7, 0.0), c(0.1, -0.2), c(0.1, 0.2), c(0.3, 0.0)),
        pauli(Pauli::X),
        pauli(Pauli::Y),
        pauli(Pauli::Z),
        Matrix2::identity(),
    ];
    for rho in inputs {
        let mut out = Matrix2::zeros();
        for t in WIRE_CUT_TERMS {
            let measured = (pauli(t.measure) * rho).trace();
            out += projector(t.prepare) * measured * c(t.coeff, 0.0);
        }
        assert!((out - rho).camax() < 1e-14);
    }
    let total: f64 = WIRE_CUT_TERMS.iter().map(|t| t.coeff.abs()).sum();
    assert_eq!(total, 4.0);
}

/// Three-qubit chain where wire 1 carries all entanglement across two boundaries.
fn chain() -> QuantumCircuit {
    let mut k = QuantumCircuit::new(3);
    k.push(&[(Gate::Ry(0.9), &[0]), (Gate::Rx(0.4), &[1]), (Gate::H, &[2])]).unwrap();
    k.push(&[(Gate::Cx, &[0, 1])]).unwrap();
    k.push(&[(Gate::Ry(-0.5), &[1])]).unwrap();
    k.push(&[(Gate::Rzz(1.1), &[1, 2])]).unwrap();
    k.push(&[(Gate::Rx(0.3), &[1]), (Gate::Ry(0.2), &[2])]).unwrap();
    k
}

#[test]
fn one_and_two_cuts_agree_with_uncut() {
    let k = chain();
    let obs = Observable::from_labels(3, &[(1.0, "ZZZ"), (0.5, "XIY"), (0.25, "IZI")]).unwrap();
    let want = simulator::run(&k, &Statevector::zero(3).unwrap()).unwrap().expectation(&obs).unwrap();
    let one = plan_wire_cut(&k, &[CutPoint { qubit: 1, boundary: 3 }]).unwrap();
    let two = plan_wire_cut(
        &k,
        &[CutPoint { qubit: 1, boundary: 2 }, CutPoint { qubit: 1, boundary: 3 }],
    )
    .unwrap();
    assert_eq!(one.term_count(), 8);
    assert_eq!(two.term_count(), 64);
    assert_eq!(two.gamma_cut(), 16.0);
    for plan in [&one, &two] {
        let got = execute_plan(plan, &obs, KnitMode::ExactEnumeration, 0).unwrap();
        assert!((got.value - want).abs() < 1e-12, "{} vs {want}", got.value);
    }
}

#[test]
fn sampled_knitting_is_unbiased_and_worker_independent() {
    let k = chain();
    let obs = Observable::from_labels(3, &[(1.0, "ZZZ")]).unwrap();
    let want = simulator::run(&k, &Statevector::zero(3).unwrap()).unwrap().expectation(&obs).unwrap();
    let plan = plan_wire_cut(&k, &[CutPoint { qubit: 1, boundary: 3 }]).unwrap();
    let mode = KnitMode::Sampled { samples: 20_000, seed: 8 };
    let a = execute_plan(&plan, &obs, mode, 1).unwrap();
    let b = execute_plan(&plan, &obs, mode, 4).unwrap();
    assert_eq!(a, b);
    assert!((a.value - want).abs() < 5.0 * a.std_error.unwrap());
}

#[test]
fn cut_that_leaves_graph_connected_is_rejected() {
    let mut k = QuantumCircuit::new(2);
    k.push(&[(Gate::Cx, &[0, 1])]).unwrap();
    k.push(&[(Gate::Cx, &[0, 1])]).unwrap();
    assert!(plan_wire_cut(&k, &[CutPoint { qubit: 1, boundary: 1 }]).is_err());
}
