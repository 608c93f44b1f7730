//! Python bindings for the `qcsc` simulation and error-mitigation toolkit.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qcsc::hamiltonian::{self, SpinChainHamiltonian, TrotterOrder};
use qcsc::knit::{self, CutPoint, KnitMode};
use qcsc::pec::{self, EstimatorMode, SamplingConfig};
use qcsc::simulator::{self, Statevector};
use qcsc::varqte::{self, Ansatz, EvolveConfig, VarQteMethod};
use qcsc::{circuit_io, estimate, ErrorCategory, Observable, PauliString};

fn to_py(e: qcsc::Error) -> PyErr {
    match e.category() {
        ErrorCategory::Numeric => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for qcsc::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// A layered quantum circuit.
#[pyclass(name = "Circuit", frozen)]
struct PyCircuit {
    inner: qcsc::QuantumCircuit,
}

#[pymethods]
impl PyCircuit {
    /// Parses circuit text (`qubits N;` header, one gate per line, blank lines between layers).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: circuit_io::parse(text).py()?,
        })
    }

    fn to_text(&self) -> PyResult<String> {
        circuit_io::serialize(&self.inner).py()
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn cnot_count(&self) -> usize {
        hamiltonian::cnot_count(&self.inner)
    }

    /// Noiseless expectation of an observable such as `"ZZ,0.5*XX"`.
    fn expectation(&self, observable: &str) -> PyResult<f64> {
        let obs = Observable::parse(observable, self.inner.n_qubits()).py()?;
        let psi = simulator::run(&self.inner, &Statevector::zero(self.inner.n_qubits()).py()?).py()?;
        psi.expectation(&obs).py()
    }

    /// Computational-basis counts keyed by bitstring (qubit 0 leftmost).
    #[pyo3(signature = (shots, seed=0))]
    fn sample(&self, shots: usize, seed: u64) -> PyResult<BTreeMap<String, usize>> {
        let n = self.inner.n_qubits();
        let psi = simulator::run(&self.inner, &Statevector::zero(n).py()?).py()?;
        Ok(psi
            .sample_counts(shots, seed)
            .py()?
            .into_iter()
            .map(|(b, c)| (simulator::bitstring(b, n), c))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Circuit(n_qubits={}, depth={})", self.inner.n_qubits(), self.inner.depth())
    }
}

/// Sparse Pauli-Lindblad noise channel.
#[pyclass(name = "NoiseModel", frozen)]
struct PyNoiseModel {
    inner: qcsc::PauliLindbladModel,
}

#[pymethods]
impl PyNoiseModel {
    #[new]
    fn new(n_qubits: usize, generators: Vec<(String, f64)>) -> PyResult<Self> {
        let gens: Vec<(&str, f64)> = generators.iter().map(|(l, r)| (l.as_str(), *r)).collect();
        Ok(Self {
            inner: qcsc::PauliLindbladModel::from_labels(n_qubits, &gens).py()?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: qcsc::PauliLindbladModel::from_json(text).py()?,
        })
    }

    /// Random line-local model with `count` generators.
    #[staticmethod]
    #[pyo3(signature = (n_qubits, count, max_rate, seed=0))]
    fn planted(n_qubits: usize, count: usize, max_rate: f64, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: qcsc::noise::planted_line_model(n_qubits, count, max_rate, seed).py()?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn generators(&self) -> Vec<(String, f64)> {
        self.inner
            .generators()
            .iter()
            .map(|(p, r)| (p.to_string(), *r))
            .collect()
    }

    #[getter]
    fn total_rate(&self) -> f64 {
        self.inner.total_rate()
    }

    fn fidelity(&self, pauli: &str) -> PyResult<f64> {
        let q = PauliString::parse(pauli, self.inner.n_qubits()).py()?;
        self.inner.pauli_fidelity(&q).py()
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.scaled(factor).py()?,
        })
    }

    /// Rates recovered from synthesized decay curves (`shots=0` for exact data).
    #[pyo3(signature = (shots=0, seed=0))]
    fn relearn(&self, shots: usize, seed: u64) -> PyResult<Self> {
        let n = self.inner.n_qubits();
        let probes = qcsc::noise::default_probe_set(n, &qcsc::noise::line_edges(n)).py()?;
        let mode = match shots {
            0 => qcsc::noise::DecayMode::Exact,
            s => qcsc::noise::DecayMode::Shots { shots: s, seed },
        };
        let data = qcsc::noise::synthesize_decay(&self.inner, &probes, &qcsc::noise::DEFAULT_DEPTHS, mode).py()?;
        let candidates: Vec<PauliString> = self.inner.generators().iter().map(|(p, _)| p.clone()).collect();
        Ok(Self {
            inner: qcsc::noise::learn_rates(&data, &candidates).py()?.model,
        })
    }
}

/// Result of a sampled estimator.
#[pyclass(name = "Estimate", frozen, get_all)]
struct PyEstimate {
    value: f64,
    std_error: f64,
    samples: usize,
    gamma: f64,
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "Estimate(value={}, std_error={}, samples={}, gamma={})",
            self.value, self.std_error, self.samples, self.gamma
        )
    }
}

fn layer_models(circuit: &PyCircuit, noise: Vec<PyRef<'_, PyNoiseModel>>) -> Vec<qcsc::PauliLindbladModel> {
    let layers = circuit.inner.two_qubit_layer_count();
    match noise.as_slice() {
        [one] => vec![one.inner.clone(); layers],
        many => many.iter().map(|m| m.inner.clone()).collect(),
    }
}

/// Probabilistic error cancellation; `noise` holds one model per two-qubit layer or a
/// single model for all of them.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (circuit, noise, observable, samples=100_000, seed=0, mode="analytic", workers=0))]
fn pec_estimate(
    py: Python<'_>,
    circuit: PyRef<'_, PyCircuit>,
    noise: Vec<PyRef<'_, PyNoiseModel>>,
    observable: &str,
    samples: usize,
    seed: u64,
    mode: &str,
    workers: usize,
) -> PyResult<PyEstimate> {
    let models = layer_models(&circuit, noise);
    let obs = Observable::parse(observable, circuit.inner.n_qubits()).py()?;
    let cfg = SamplingConfig {
        samples,
        seed,
        mode: mode.parse::<EstimatorMode>().py()?,
        workers,
    };
    let c = circuit.inner.clone();
    let est = py.detach(|| pec::pec_estimate(&c, &models, &obs, &cfg)).py()?;
    Ok(PyEstimate {
        value: est.value,
        std_error: est.std_error,
        samples: est.samples,
        gamma: est.gamma_total,
    })
}

/// Zero-noise extrapolation; returns `(extrapolated, noisy_values)`.
#[pyfunction]
#[pyo3(signature = (circuit, noise, observable, scales=vec![1.0, 2.0, 3.0], order=1))]
fn zne_estimate(
    circuit: PyRef<'_, PyCircuit>,
    noise: Vec<PyRef<'_, PyNoiseModel>>,
    observable: &str,
    scales: Vec<f64>,
    order: usize,
) -> PyResult<(f64, Vec<f64>)> {
    let models = layer_models(&circuit, noise);
    let obs = Observable::parse(observable, circuit.inner.n_qubits()).py()?;
    let z = pec::zne_estimate(&circuit.inner, &models, &obs, &scales, order).py()?;
    Ok((z.value, z.noisy_values))
}

/// Wire-cut knitting with cuts given as `"qubit@layer"`; exact unless `samples` is set.
#[pyfunction]
#[pyo3(signature = (circuit, cuts, observable, samples=None, seed=0, workers=0))]
fn knit_estimate(
    circuit: PyRef<'_, PyCircuit>,
    cuts: Vec<String>,
    observable: &str,
    samples: Option<usize>,
    seed: u64,
    workers: usize,
) -> PyResult<PyEstimate> {
    let points = cuts
        .iter()
        .map(|c| c.parse::<CutPoint>())
        .collect::<qcsc::Result<Vec<_>>>()
        .py()?;
    let plan = knit::plan_wire_cut(&circuit.inner, &points).py()?;
    let obs = Observable::parse(observable, circuit.inner.n_qubits()).py()?;
    let mode = match samples {
        Some(samples) => KnitMode::Sampled { samples, seed },
        None => KnitMode::ExactEnumeration,
    };
    let r = knit::execute_plan(&plan, &obs, mode, workers).py()?;
    Ok(PyEstimate {
        value: r.value,
        std_error: r.std_error.unwrap_or(0.0),
        samples: r.samples.unwrap_or(r.terms),
        gamma: r.gamma_cut,
    })
}

/// Trotter circuit for the Heisenberg chain with seeded fields.
#[pyfunction]
#[pyo3(signature = (n, time, steps, order=1, seed=0))]
fn trotter_circuit(n: usize, time: f64, steps: usize, order: u32, seed: u64) -> PyResult<PyCircuit> {
    let h = SpinChainHamiltonian::random(n, seed).py()?;
    let order = TrotterOrder::try_from(order).py()?;
    Ok(PyCircuit {
        inner: h.trotter_circuit(time, steps, order).py()?,
    })
}

/// First-order Trotter error bound for the seeded Heisenberg chain.
#[pyfunction]
#[pyo3(signature = (n, time, steps, seed=0))]
fn trotter_bound(n: usize, time: f64, steps: usize, seed: u64) -> PyResult<f64> {
    Ok(SpinChainHamiltonian::random(n, seed).py()?.trotter_bound_order1(time, steps))
}

/// Variational evolution of a product of Pauli rotations from `|0…0⟩`;
/// returns `(times, thetas)`.
#[pyfunction]
#[pyo3(signature = (generators, hamiltonian, time=1.0, dt=0.01, method="mclachlan"))]
fn varqte_evolve(
    generators: Vec<String>,
    hamiltonian: &str,
    time: f64,
    dt: f64,
    method: &str,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = generators
        .first()
        .map(|g| g.len())
        .ok_or_else(|| PyValueError::new_err("at least one generator is required"))?;
    let mut ansatz = Ansatz::new(n);
    for g in &generators {
        ansatz.rotation(PauliString::parse(g, n).py()?).py()?;
    }
    let h = Observable::parse(hamiltonian, n).py()?;
    let cfg = EvolveConfig {
        t_final: time,
        dt,
        method: method.parse::<VarQteMethod>().py()?,
        ..EvolveConfig::default()
    };
    let tr = varqte::evolve(&ansatz, &vec![0.0; ansatz.n_params()], &h, &cfg).py()?;
    Ok((tr.times, tr.thetas))
}

#[pyfunction]
fn cnot_volume(n: f64) -> PyResult<f64> {
    estimate::cnot_volume(n).py()
}

#[pyfunction]
fn t_volume(n: f64) -> PyResult<f64> {
    estimate::t_volume(n).py()
}

/// Runtime of a PEC experiment in seconds.
#[pyfunction]
fn runtime_estimate(n: usize, depth: usize, lambda_bar: f64, beta: f64) -> PyResult<f64> {
    pec::runtime_estimate(n, depth, lambda_bar, beta).py()
}

#[pyfunction]
#[pyo3(signature = (q, m=1, l=1, t=1, p=1))]
fn modular_scale(q: u64, m: u64, l: u64, t: u64, p: u64) -> PyResult<u64> {
    estimate::modular_scale(&estimate::ModularSystem { q, m, l, t, p }).py()
}

#[pymodule]
fn pyqcsc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", qcsc::VERSION)?;
    m.add_class::<PyCircuit>()?;
    m.add_class::<PyNoiseModel>()?;
    m.add_class::<PyEstimate>()?;
    m.add_function(wrap_pyfunction!(pec_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(zne_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(knit_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(trotter_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(trotter_bound, m)?)?;
    m.add_function(wrap_pyfunction!(varqte_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(cnot_volume, m)?)?;
    m.add_function(wrap_pyfunction!(t_volume, m)?)?;
    m.add_function(wrap_pyfunction!(runtime_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(modular_scale, m)?)?;
    Ok(())
}
