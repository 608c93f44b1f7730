//! Variational real-time evolution of parameterized states.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{Gate, Instruction};
use crate::error::{check_size, Error, Result};
use crate::linalg;
use crate::pauli::{Observable, PauliString};
use crate::simulator::{ExactPropagator, Statevector, MAX_EXACT_QUBITS};

#[derive(Debug, Clone, PartialEq)]
pub enum AnsatzOp {
    /// `exp(-iθ_p G/2)`.
    Rotation { generator: PauliString, param: usize },
    Fixed(Instruction),
}

/// `|φ(θ)⟩ = U(θ)|0ⁿ⟩` built from Pauli rotations and fixed gates. Several
/// rotations may share one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    n_qubits: usize,
    ops: Vec<AnsatzOp>,
    n_params: usize,
}

impl Ansatz {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            n_params: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn ops(&self) -> &[AnsatzOp] {
        &self.ops
    }

    pub fn fixed(&mut self, gate: Gate, qubits: &[usize]) -> Result<&mut Self> {
        if gate.param().is_some() || gate == Gate::Measure {
            return Err(Error::invalid(format!("gate {} cannot be a fixed ansatz gate", gate.name())));
        }
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
        }
        if qubits.len() != gate.arity() || (qubits.len() == 2 && qubits[0] == qubits[1]) {
            return Err(Error::invalid(format!("bad operands for {}", gate.name())));
        }
        self.ops.push(AnsatzOp::Fixed(Instruction::new(gate, qubits)));
        Ok(self)
    }

    /// Adds a rotation with a fresh parameter and returns its index.
    pub fn rotation(&mut self, generator: PauliString) -> Result<usize> {
        let p = self.n_params;
        self.tied_rotation(generator, p)?;
        Ok(p)
    }

    /// Adds a rotation driven by an existing parameter `param` (or the next new one).
    pub fn tied_rotation(&mut self, generator: PauliString, param: usize) -> Result<&mut Self> {
        check_size(self.n_qubits, generator.n_qubits())?;
        if generator.is_identity() {
            return Err(Error::invalid("rotation generator must not be the identity"));
        }
        if param > self.n_params {
            return Err(Error::invalid(format!("parameter {param} skips unused indices")));
        }
        self.n_params = self.n_params.max(param + 1);
        self.ops.push(AnsatzOp::Rotation { generator, param });
        Ok(self)
    }

    /// Layers of `RY`, `RZ` on every qubit, each followed by a CX ladder, then a
    /// closing `RY`, `RZ` layer.
    pub fn hardware_efficient(n_qubits: usize, entangling_layers: usize) -> Result<Self> {
        let mut a = Ansatz::new(n_qubits);
        let rot_layer = |a: &mut Ansatz| -> Result<()> {
            for q in 0..n_qubits {
                a.rotation(PauliString::single(n_qubits, q, crate::pauli::Pauli::Y)?)?;
                a.rotation(PauliString::single(n_qubits, q, crate::pauli::Pauli::Z)?)?;
            }
            Ok(())
        };
        for _ in 0..entangling_layers {
            rot_layer(&mut a)?;
            for q in 0..n_qubits.saturating_sub(1) {
                a.fixed(Gate::Cx, &[q, q + 1])?;
            }
        }
        rot_layer(&mut a)?;
        Ok(a)
    }

    fn check_params(&self, theta: &[f64]) -> Result<()> {
        if self.n_params == 0 {
            return Err(Error::invalid("ansatz has no parameters"));
        }
        check_size(self.n_params, theta.len())?;
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("ansatz parameter".into()));
        }
        Ok(())
    }

    fn apply_op(&self, state: &mut Statevector, op: &AnsatzOp, theta: &[f64]) -> Result<()> {
        match op {
            AnsatzOp::Rotation { generator, param } => state.apply_pauli_rotation(generator, theta[*param]),
            AnsatzOp::Fixed(inst) => state.apply(inst),
        }
    }

    pub fn state(&self, theta: &[f64]) -> Result<Statevector> {
        self.check_params(theta)?;
        let mut s = Statevector::zero(self.n_qubits)?;
        for op in &self.ops {
            self.apply_op(&mut s, op, theta)?;
        }
        Ok(s)
    }
}

/// `|φ(θ)⟩` and `∂_p|φ⟩` for every parameter, by inserting `-iG/2` after each
/// rotation (summed over rotations sharing a parameter).
pub fn state_and_derivatives(ansatz: &Ansatz, theta: &[f64]) -> Result<(Statevector, Vec<Vec<Complex64>>)> {
    ansatz.check_params(theta)?;
    let dim = 1usize << ansatz.n_qubits;
    let mut derivs = vec![vec![Complex64::new(0.0, 0.0); dim]; ansatz.n_params];
    let mut prefix = Statevector::zero(ansatz.n_qubits)?;
    let half = Complex64::new(0.0, -0.5);
    for (k, op) in ansatz.ops.iter().enumerate() {
        ansatz.apply_op(&mut prefix, op, theta)?;
        if let AnsatzOp::Rotation { generator, param } = op {
            let mut branch = prefix.clone();
            branch.apply_pauli(generator)?;
            for later in &ansatz.ops[k + 1..] {
                ansatz.apply_op(&mut branch, later, theta)?;
            }
            for (d, a) in derivs[*param].iter_mut().zip(branch.amplitudes()) {
                *d += half * a;
            }
        }
    }
    Ok((prefix, derivs))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn apply_observable(h: &Observable, state: &Statevector) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes().len()];
    for (c, p) in h.terms() {
        let mut s = state.clone();
        s.apply_pauli(p)?;
        for (o, a) in out.iter_mut().zip(s.amplitudes()) {
            *o += *c * a;
        }
    }
    Ok(out)
}

/// `M_pq = Im⟨∂_pφ|∂_qφ⟩`.
pub fn compute_m(derivs: &[Vec<Complex64>]) -> DMatrix<f64> {
    let k = derivs.len();
    DMatrix::from_fn(k, k, |p, q| dot(&derivs[p], &derivs[q]).im)
}

/// `V_p = -Re⟨∂_pφ|H|φ⟩`.
pub fn compute_v(derivs: &[Vec<Complex64>], state: &Statevector, h: &Observable) -> Result<DVector<f64>> {
    let hphi = apply_observable(h, state)?;
    Ok(DVector::from_iterator(
        derivs.len(),
        derivs.iter().map(|d| -dot(d, &hphi).re),
    ))
}

/// Phase-corrected McLachlan system `A θ̇ = C`:
/// `A_pq = Re(⟨∂_p|∂_q⟩ - ⟨∂_p|φ⟩⟨φ|∂_q⟩)`, `C_p = Im(⟨∂_p|H|φ⟩ - ⟨∂_p|φ⟩⟨H⟩)`.
pub fn compute_mclachlan(
    derivs: &[Vec<Complex64>],
    state: &Statevector,
    h: &Observable,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let phi = state.amplitudes();
    let hphi = apply_observable(h, state)?;
    let energy = dot(phi, &hphi).re;
    let overlaps: Vec<Complex64> = derivs.iter().map(|d| dot(d, phi)).collect();
    let k = derivs.len();
    let a = DMatrix::from_fn(k, k, |p, q| {
        (dot(&derivs[p], &derivs[q]) - overlaps[p] * overlaps[q].conj()).re
    });
    let c = DVector::from_iterator(
        k,
        (0..k).map(|p| (dot(&derivs[p], &hphi) - overlaps[p] * energy).im),
    );
    Ok((a, c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarQteMethod {
    /// `M θ̇ = V` with the imaginary Gram matrix.
    Tdvp,
    /// Phase-corrected McLachlan system.
    McLachlan,
}

impl std::str::FromStr for VarQteMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mclachlan" => Ok(VarQteMethod::McLachlan),
            "tdvp" => Ok(VarQteMethod::Tdvp),
            other => Err(Error::invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub t_final: f64,
    pub dt: f64,
    pub method: VarQteMethod,
    /// Added to the diagonal before solving.
    pub regularization: f64,
    /// Relative singular-value cutoff of the pseudo-inverse.
    pub cutoff: f64,
    /// Abort when `‖Aθ̇ − C‖` exceeds this.
    pub max_residual: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            dt: 1e-2,
            method: VarQteMethod::McLachlan,
            regularization: 1e-6,
            cutoff: 1e-10,
            max_residual: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarQteTrajectory {
    pub times: Vec<f64>,
    pub thetas: Vec<Vec<f64>>,
    /// Residual of the linear solve at the start of each step; the last entry
    /// is evaluated at the final point.
    pub residuals: Vec<f64>,
    /// `|⟨ψ_exact(t)|φ(θ(t))⟩|²`, present for small systems.
    pub fidelities: Option<Vec<f64>>,
}

fn theta_dot(
    ansatz: &Ansatz,
    theta: &[f64],
    h: &Observable,
    cfg: &EvolveConfig,
) -> Result<(DVector<f64>, f64)> {
    let (state, derivs) = state_and_derivatives(ansatz, theta)?;
    let (a, c) = match cfg.method {
        VarQteMethod::McLachlan => compute_mclachlan(&derivs, &state, h)?,
        VarQteMethod::Tdvp => (compute_m(&derivs), compute_v(&derivs, &state, h)?),
    };
    let k = a.nrows();
    let regularized = &a + DMatrix::identity(k, k) * cfg.regularization;
    let x = linalg::pinv_solve(&regularized, &c, cfg.cutoff);
    let residual = (&a * &x - &c).norm();
    if !residual.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("parameter derivative".into()));
    }
    if residual > cfg.max_residual {
        return Err(Error::SolverResidual {
            residual,
            threshold: cfg.max_residual,
        });
    }
    Ok((x, residual))
}

/// Integrates `θ(t)` with fixed-step RK4 from `theta0` to `t_final`.
pub fn evolve(ansatz: &Ansatz, theta0: &[f64], h: &Observable, cfg: &EvolveConfig) -> Result<VarQteTrajectory> {
    check_size(ansatz.n_qubits, h.n_qubits())?;
    ansatz.check_params(theta0)?;
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(Error::invalid("time step must be positive"));
    }
    if !(cfg.t_final >= 0.0) || !cfg.t_final.is_finite() {
        return Err(Error::invalid("final time must be nonnegative"));
    }
    if !(cfg.regularization >= 0.0) {
        return Err(Error::invalid("regularization must be nonnegative"));
    }
    let steps = (cfg.t_final / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let exact = if ansatz.n_qubits <= MAX_EXACT_QUBITS {
        Some((ExactPropagator::new(h)?, ansatz.state(theta0)?))
    } else {
        None
    };
    let fidelity = |theta: &[f64], t: f64| -> Result<f64> {
        let (prop, psi0) = exact.as_ref().expect("exact reference");
        let reference = prop.evolve(psi0, t)?;
        ansatz.state(theta)?.fidelity(&reference)
    };

    let mut theta = DVector::from_column_slice(theta0);
    let mut t = 0.0;
    let mut out = VarQteTrajectory {
        times: vec![0.0],
        thetas: vec![theta0.to_vec()],
        residuals: Vec::with_capacity(steps + 1),
        fidelities: exact.as_ref().map(|_| vec![1.0]),
    };
    for step in 0..steps {
        let t_next = if step + 1 == steps {
            cfg.t_final
        } else {
            (step + 1) as f64 * cfg.dt
        };
        let h_step = t_next - t;
        let (k1, residual) = theta_dot(ansatz, theta.as_slice(), h, cfg)?;
        let (k2, _) = theta_dot(ansatz, (&theta + &k1 * (h_step / 2.0)).as_slice(), h, cfg)?;
        let (k3, _) = theta_dot(ansatz, (&theta + &k2 * (h_step / 2.0)).as_slice(), h, cfg)?;
        let (k4, _) = theta_dot(ansatz, (&theta + &k3 * h_step).as_slice(), h, cfg)?;
        theta += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h_step / 6.0);
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameters at t = {t_next}")));
        }
        t = t_next;
        out.residuals.push(residual);
        out.times.push(t);
        out.thetas.push(theta.as_slice().to_vec());
        if let Some(f) = out.fidelities.as_mut() {
            f.push(fidelity(theta.as_slice(), t)?);
        }
    }
    out.residuals.push(theta_dot(ansatz, theta.as_slice(), h, cfg)?.1);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    fn rx_ansatz() -> Ansatz {
        let mut a = Ansatz::new(1);
        a.rotation(PauliString::single(1, 0, Pauli::X).unwrap()).unwrap();
        a
    }

    fn x_hamiltonian() -> Observable {
        Observable::from_labels(1, &[(1.0, "X")]).unwrap()
    }

    fn random_ansatz() -> Ansatz {
        let mut a = Ansatz::new(2);
        a.fixed(Gate::H, &[0]).unwrap();
        a.rotation(PauliString::parse("YI", 2).unwrap()).unwrap();
        a.rotation(PauliString::parse("ZZ", 2).unwrap()).unwrap();
        a.fixed(Gate::Cx, &[0, 1]).unwrap();
        a.rotation(PauliString::parse("IX", 2).unwrap()).unwrap();
        a.rotation(PauliString::parse("XY", 2).unwrap()).unwrap();
        a
    }

    #[test]
    fn single_qubit_derivative_norm() {
        let (_, d) = state_and_derivatives(&rx_ansatz(), &[0.37]).unwrap();
        assert!((dot(&d[0], &d[0]).re - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fixed_gates_add_no_parameters() {
        let a = random_ansatz();
        assert_eq!(a.n_params(), 4);
        let (_, d) = state_and_derivatives(&a, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(d.len(), 4);
        assert!(state_and_derivatives(&a, &[0.1]).is_err());
    }

    #[test]
    fn tdvp_form_is_degenerate_for_one_real_parameter() {
        let (s, d) = state_and_derivatives(&rx_ansatz(), &[0.0]).unwrap();
        let m = compute_m(&d);
        let v = compute_v(&d, &s, &x_hamiltonian()).unwrap();
        assert!(m[(0, 0)].abs() < 1e-15 && v[0].abs() < 1e-15);
    }

    #[test]
    fn mclachlan_single_qubit() {
        let (s, d) = state_and_derivatives(&rx_ansatz(), &[0.0]).unwrap();
        let (a, c) = compute_mclachlan(&d, &s, &x_hamiltonian()).unwrap();
        assert!((a[(0, 0)] - 0.25).abs() < 1e-14);
        assert!((c[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gram_symmetries() {
        let a = random_ansatz();
        let h = Observable::from_labels(2, &[(1.0, "XX"), (0.4, "ZI"), (-0.3, "YZ")]).unwrap();
        let (s, d) = state_and_derivatives(&a, &[0.3, -1.1, 0.8, 2.0]).unwrap();
        let m = compute_m(&d);
        assert!((&m + m.transpose()).amax() < 1e-12);
        let (am, _) = compute_mclachlan(&d, &s, &h).unwrap();
        assert!((&am - am.transpose()).amax() < 1e-12);
        let eig = nalgebra::SymmetricEigen::new(am).eigenvalues;
        assert!(eig.iter().all(|&e| e >= -1e-10));
    }

    #[test]
    fn zero_time_trajectory() {
        let cfg = EvolveConfig { t_final: 0.0, ..Default::default() };
        let tr = evolve(&rx_ansatz(), &[0.2], &x_hamiltonian(), &cfg).unwrap();
        assert_eq!(tr.times, vec![0.0]);
        assert_eq!(tr.thetas, vec![vec![0.2]]);
        assert_eq!(tr.fidelities, Some(vec![1.0]));
    }

    #[test]
    fn single_qubit_trajectory_is_linear() {
        let cfg = EvolveConfig { t_final: 1.0, dt: 1e-3, ..Default::default() };
        let tr = evolve(&rx_ansatz(), &[0.0], &x_hamiltonian(), &cfg).unwrap();
        assert_eq!(tr.times.len(), 1001);
        let err = tr
            .times
            .iter()
            .zip(&tr.thetas)
            .map(|(t, th)| (th[0] - 2.0 * t).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        assert!(tr.fidelities.unwrap().iter().all(|f| *f > 1.0 - 1e-6 && *f <= 1.0 + 1e-9));
    }

    #[test]
    fn invalid_configs() {
        let a = rx_ansatz();
        let h = x_hamiltonian();
        let bad_dt = EvolveConfig { dt: 0.0, ..Default::default() };
        assert!(evolve(&a, &[0.0], &h, &bad_dt).is_err());
        let bad_reg = EvolveConfig { regularization: -1.0, ..Default::default() };
        assert!(evolve(&a, &[0.0], &h, &bad_reg).is_err());
        assert!(evolve(&a, &[f64::NAN], &h, &EvolveConfig::default()).is_err());
    }
}
