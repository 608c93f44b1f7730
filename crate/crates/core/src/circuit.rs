//! Layered circuits. A layer is a set of simultaneous operations on disjoint qubits.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

/// A validated 2×2 unitary, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(pub(crate) [[Complex64; 2]; 2]);

impl Unitary2 {
    pub const TOLERANCE: f64 = 1e-8;

    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let mut deviation: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let dot: Complex64 = (0..2).map(|k| m[k][i].conj() * m[k][j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((dot - expected).norm());
            }
        }
        if !deviation.is_finite() || deviation > Self::TOLERANCE {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.0
    }

    fn dagger(&self) -> Self {
        let m = self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }
}

/// Gate set. Rotations follow `R_P(θ) = exp(-iθP/2)`; `Cx` takes `[control, target]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cx,
    Rzz(f64),
    Rxx(f64),
    Ryy(f64),
    Swap,
    U(Unitary2),
    /// Terminal computational-basis measurement marker.
    Measure,
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cx | Gate::Rzz(_) | Gate::Rxx(_) | Gate::Ryy(_) | Gate::Swap => 2,
            _ => 1,
        }
    }

    pub fn param(&self) -> Option<f64> {
        match *self {
            Gate::Rx(t) | Gate::Ry(t) | Gate::Rz(t) | Gate::Rzz(t) | Gate::Rxx(t) | Gate::Ryy(t) => {
                Some(t)
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X => "x",
            Gate::Y => "y",
            Gate::Z => "z",
            Gate::H => "h",
            Gate::S => "s",
            Gate::Sdg => "sdg",
            Gate::Rx(_) => "rx",
            Gate::Ry(_) => "ry",
            Gate::Rz(_) => "rz",
            Gate::Cx => "cx",
            Gate::Rzz(_) => "rzz",
            Gate::Rxx(_) => "rxx",
            Gate::Ryy(_) => "ryy",
            Gate::Swap => "swap",
            Gate::U(_) => "u",
            Gate::Measure => "measure",
        }
    }

    /// Builds a gate from its text name and optional angle.
    pub fn from_name(name: &str, param: Option<f64>) -> Option<Gate> {
        let g = match (name, param) {
            ("x", None) => Gate::X,
            ("y", None) => Gate::Y,
            ("z", None) => Gate::Z,
            ("h", None) => Gate::H,
            ("s", None) => Gate::S,
            ("sdg", None) => Gate::Sdg,
            ("cx", None) => Gate::Cx,
            ("swap", None) => Gate::Swap,
            ("measure", None) => Gate::Measure,
            ("rx", Some(t)) => Gate::Rx(t),
            ("ry", Some(t)) => Gate::Ry(t),
            ("rz", Some(t)) => Gate::Rz(t),
            ("rzz", Some(t)) => Gate::Rzz(t),
            ("rxx", Some(t)) => Gate::Rxx(t),
            ("ryy", Some(t)) => Gate::Ryy(t),
            _ => return None,
        };
        Some(g)
    }

    pub fn takes_param(name: &str) -> bool {
        matches!(name, "rx" | "ry" | "rz" | "rzz" | "rxx" | "ryy")
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S => Gate::Sdg,
            Gate::Sdg => Gate::S,
            Gate::Rx(t) => Gate::Rx(-t),
            Gate::Ry(t) => Gate::Ry(-t),
            Gate::Rz(t) => Gate::Rz(-t),
            Gate::Rzz(t) => Gate::Rzz(-t),
            Gate::Rxx(t) => Gate::Rxx(-t),
            Gate::Ryy(t) => Gate::Ryy(-t),
            Gate::U(u) => Gate::U(u.dagger()),
            g => g,
        }
    }

    /// Single-qubit matrix, or `None` for two-qubit gates and measurement.
    pub fn matrix1(&self) -> Option<[[Complex64; 2]; 2]> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let z = c(0.0, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = match *self {
            Gate::X => [[z, c(1.0, 0.0)], [c(1.0, 0.0), z]],
            Gate::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            Gate::Z => [[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]],
            Gate::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
            Gate::S => [[c(1.0, 0.0), z], [z, c(0.0, 1.0)]],
            Gate::Sdg => [[c(1.0, 0.0), z], [z, c(0.0, -1.0)]],
            Gate::Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
            }
            Gate::Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            Gate::Rz(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                [[c(co, -s), z], [z, c(co, s)]]
            }
            Gate::U(u) => u.0,
            _ => return None,
        };
        Some(m)
    }

    /// Two-qubit matrix in the local basis `l = bit(q0) + 2·bit(q1)`.
    pub fn matrix2(&self) -> Option<[[Complex64; 4]; 4]> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut m = [[zero; 4]; 4];
        match *self {
            Gate::Cx => {
                for (l, row) in [0usize, 3, 2, 1].into_iter().enumerate() {
                    m[row][l] = one;
                }
            }
            Gate::Swap => {
                for (l, row) in [0usize, 2, 1, 3].into_iter().enumerate() {
                    m[row][l] = one;
                }
            }
            Gate::Rzz(t) => return Some(pauli_rotation_matrix(Pauli::Z, t)),
            Gate::Rxx(t) => return Some(pauli_rotation_matrix(Pauli::X, t)),
            Gate::Ryy(t) => return Some(pauli_rotation_matrix(Pauli::Y, t)),
            _ => return None,
        }
        Some(m)
    }
}

fn pauli_rotation_matrix(p: Pauli, theta: f64) -> [[Complex64; 4]; 4] {
    let pp = PauliString::from_sparse(2, &[(0, p), (1, p)]).expect("two qubits");
    let dense = pp.to_dense();
    let (s, c) = (theta / 2.0).sin_cos();
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let id = if i == j { c } else { 0.0 };
            *v = Complex64::new(id, 0.0) + Complex64::new(0.0, -s) * dense[i * 4 + j];
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub gate: Gate,
    pub qubits: Vec<usize>,
}

impl Instruction {
    pub fn new(gate: Gate, qubits: &[usize]) -> Self {
        Self {
            gate,
            qubits: qubits.to_vec(),
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gate.name())?;
        for (i, q) in self.qubits.iter().enumerate() {
            write!(f, "{}{q}", if i == 0 { " " } else { ", " })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayerKind {
    SingleQubit,
    TwoQubit,
    Measurement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    kind: LayerKind,
    ops: Vec<Instruction>,
}

impl Layer {
    pub fn kind(&self) -> LayerKind {
        self.kind
    }

    pub fn ops(&self) -> &[Instruction] {
        &self.ops
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCircuit {
    n_qubits: usize,
    layers: Vec<Layer>,
}

impl QuantumCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            layers: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn two_qubit_layer_count(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.kind == LayerKind::TwoQubit)
            .count()
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(|l| l.ops.len()).sum()
    }

    /// Appends a layer after checking arity, index range and disjointness.
    /// Empty layers are ignored.
    pub fn push_layer(&mut self, ops: Vec<Instruction>) -> Result<()> {
        if ops.is_empty() {
            return Ok(());
        }
        let mut used = vec![false; self.n_qubits];
        for op in &ops {
            if op.qubits.len() != op.gate.arity() {
                return Err(Error::invalid(format!(
                    "gate {} takes {} qubit(s), got {}",
                    op.gate.name(),
                    op.gate.arity(),
                    op.qubits.len()
                )));
            }
            if let Some(t) = op.gate.param() {
                if !t.is_finite() {
                    return Err(Error::NonFinite(format!("parameter of {}", op.gate.name())));
                }
            }
            for &q in &op.qubits {
                if q >= self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        qubit: q,
                        n_qubits: self.n_qubits,
                    });
                }
                if std::mem::replace(&mut used[q], true) {
                    return Err(Error::QubitCollision { qubit: q });
                }
            }
        }
        let measures = ops.iter().filter(|o| o.gate == Gate::Measure).count();
        let kind = if measures == ops.len() {
            LayerKind::Measurement
        } else if measures > 0 {
            return Err(Error::invalid("measurement mixed with gates in one layer"));
        } else if ops.iter().any(|o| o.gate.arity() == 2) {
            LayerKind::TwoQubit
        } else {
            LayerKind::SingleQubit
        };
        if kind != LayerKind::Measurement
            && self.layers.last().map(|l| l.kind) == Some(LayerKind::Measurement)
        {
            return Err(Error::invalid("gates after terminal measurement"));
        }
        self.layers.push(Layer { kind, ops });
        Ok(())
    }

    /// Convenience for building a layer from `(gate, qubits)` pairs.
    pub fn push(&mut self, ops: &[(Gate, &[usize])]) -> Result<()> {
        self.push_layer(ops.iter().map(|(g, q)| Instruction::new(*g, q)).collect())
    }

    /// Appends all layers of `other`, which must have the same width.
    pub fn append(&mut self, other: &QuantumCircuit) -> Result<()> {
        crate::error::check_size(self.n_qubits, other.n_qubits)?;
        for layer in &other.layers {
            self.push_layer(layer.ops.clone())?;
        }
        Ok(())
    }

    /// The inverse circuit: layers reversed and every gate inverted.
    pub fn adjoint(&self) -> Result<QuantumCircuit> {
        let mut out = QuantumCircuit::new(self.n_qubits);
        for layer in self.layers.iter().rev() {
            if layer.kind == LayerKind::Measurement {
                return Err(Error::invalid("a measured circuit has no adjoint"));
            }
            out.push_layer(
                layer
                    .ops
                    .iter()
                    .map(|op| Instruction::new(op.gate.inverse(), &op.qubits))
                    .collect(),
            )?;
        }
        Ok(out)
    }

    pub fn count_gates(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.layers
            .iter()
            .flat_map(|l| &l.ops)
            .filter(|op| pred(&op.gate))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_validation() {
        let mut c = QuantumCircuit::new(3);
        assert_eq!(
            c.push(&[(Gate::Cx, &[0, 1]), (Gate::H, &[1])]),
            Err(Error::QubitCollision { qubit: 1 })
        );
        assert!(matches!(
            c.push(&[(Gate::H, &[3])]),
            Err(Error::QubitOutOfRange { qubit: 3, .. })
        ));
        assert!(c.push(&[(Gate::Cx, &[0])]).is_err());
        c.push(&[(Gate::H, &[0]), (Gate::X, &[2])]).unwrap();
        c.push(&[(Gate::Cx, &[0, 1])]).unwrap();
        assert_eq!(c.layers()[0].kind(), LayerKind::SingleQubit);
        assert_eq!(c.layers()[1].kind(), LayerKind::TwoQubit);
        c.push(&[(Gate::Measure, &[0])]).unwrap();
        assert!(c.push(&[(Gate::H, &[0])]).is_err());
        assert!(c.adjoint().is_err());
    }

    #[test]
    fn unitary_validation() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert!(Unitary2::new([[one, zero], [zero, one]]).is_ok());
        assert!(matches!(
            Unitary2::new([[one, one], [zero, one]]),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn adjoint_reverses_layers() {
        let mut c = QuantumCircuit::new(2);
        c.push(&[(Gate::S, &[0]), (Gate::Rx(0.3), &[1])]).unwrap();
        c.push(&[(Gate::Cx, &[0, 1])]).unwrap();
        let a = c.adjoint().unwrap();
        assert_eq!(a.layers()[0].ops()[0].gate, Gate::Cx);
        assert_eq!(a.layers()[1].ops()[0].gate, Gate::Sdg);
        assert_eq!(a.layers()[1].ops()[1].gate, Gate::Rx(-0.3));
    }
}
