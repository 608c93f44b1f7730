//! Probabilistic error cancellation for layered circuits with Pauli-Lindblad noise
//! after every two-qubit layer, plus the related cost calculators and zero-noise
//! extrapolation.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{LayerKind, QuantumCircuit};
use crate::error::{check_size, Error, Result};
use crate::linalg;
use crate::noise::PauliLindbladModel;
use crate::pauli::{Observable, PauliString};
use crate::rng::{self, Moments};
use crate::simulator::{density_run, DensityMatrix, Statevector};

/// Circuits per day at one circuit per millisecond, used as a feasibility line.
pub const DAILY_CIRCUIT_BUDGET: f64 = 1e8;
/// Repetition time assumed for [`DAILY_CIRCUIT_BUDGET`], in seconds.
pub const REPETITION_TIME_S: f64 = 1e-3;

/// Inverse of one generator's channel: `aρ + bPρP` with `a + b = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseTerm {
    pub pauli: PauliString,
    pub a: f64,
    pub b: f64,
}

impl InverseTerm {
    pub fn gamma(&self) -> f64 {
        self.a.abs() + self.b.abs()
    }

    /// Probability of inserting the Pauli when sampling the inverse.
    pub fn insert_probability(&self) -> f64 {
        self.b.abs() / self.gamma()
    }
}

/// Signed quasi-probability representation of the inverse noise of every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiProbabilityDecomposition {
    pub layers: Vec<Vec<InverseTerm>>,
}

impl QuasiProbabilityDecomposition {
    pub fn new(models: &[PauliLindbladModel]) -> Self {
        Self {
            layers: models.iter().map(invert_channel).collect(),
        }
    }

    pub fn layer_gamma(&self, layer: usize) -> f64 {
        self.layers[layer].iter().map(InverseTerm::gamma).product()
    }

    pub fn gamma_total(&self) -> f64 {
        (0..self.layers.len()).map(|k| self.layer_gamma(k)).product()
    }
}

/// Exact inverse: `a = (1 + e^{2λ})/2`, `b = (1 − e^{2λ})/2` per generator.
pub fn invert_channel(model: &PauliLindbladModel) -> Vec<InverseTerm> {
    model
        .generators()
        .iter()
        .map(|(p, rate)| {
            let g = (2.0 * rate).exp();
            InverseTerm {
                pauli: p.clone(),
                a: 0.5 * (1.0 + g),
                b: 0.5 * (1.0 - g),
            }
        })
        .collect()
}

/// `exp(2 Σ λ)` for one layer.
pub fn layer_gamma(model: &PauliLindbladModel) -> f64 {
    (2.0 * model.total_rate()).exp()
}

/// Applies the signed inverse map exactly.
pub fn apply_inverse_exact(rho: &DensityMatrix, inverse: &[InverseTerm]) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    for term in inverse {
        out.mix_with_pauli(&term.pauli, term.a)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorMode {
    /// Each sample contributes `sign · ⟨O⟩` of its pure final state.
    AnalyticTrajectory,
    /// Each sample contributes `sign · Σ_t c_t·(±1)`, one simulated shot per term.
    Shot,
}

impl std::str::FromStr for EstimatorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic-trajectory" | "analytic" => Ok(EstimatorMode::AnalyticTrajectory),
            "shot" => Ok(EstimatorMode::Shot),
            other => Err(Error::invalid(format!("unknown estimator mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub samples: usize,
    pub seed: u64,
    pub mode: EstimatorMode,
    /// Worker threads; `0` means one per processor. Results do not depend on it.
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MitigatedEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub gamma_total: f64,
    pub mode: EstimatorMode,
    pub seed: u64,
    /// Sample variance of the rescaled per-sample estimator `γ·s·x`.
    pub sample_variance: f64,
}

fn check_models(circuit: &QuantumCircuit, models: &[PauliLindbladModel]) -> Result<()> {
    let layers = circuit.two_qubit_layer_count();
    if models.len() != layers {
        return Err(Error::LayerModelMismatch {
            layers,
            models: models.len(),
        });
    }
    for m in models {
        check_size(circuit.n_qubits(), m.n_qubits())?;
    }
    Ok(())
}

/// One trajectory: noise after each two-qubit layer, then (optionally) one draw
/// from the quasi-probability inverse. Returns the sign product and the final state.
fn trajectory(
    circuit: &QuantumCircuit,
    models: &[PauliLindbladModel],
    inverse: Option<&QuasiProbabilityDecomposition>,
    rng: &mut rng::StreamRng,
) -> Result<(f64, Statevector)> {
    let mut state = Statevector::zero(circuit.n_qubits())?;
    let mut sign = 1.0;
    let mut k = 0;
    for layer in circuit.layers() {
        if layer.kind() == LayerKind::Measurement {
            continue;
        }
        for op in layer.ops() {
            state.apply(op)?;
        }
        if layer.kind() == LayerKind::TwoQubit {
            models[k].apply_stochastic(&mut state, rng)?;
            if let Some(qpd) = inverse {
                for term in &qpd.layers[k] {
                    if term.b != 0.0 && rng.random::<f64>() < term.insert_probability() {
                        state.apply_pauli(&term.pauli)?;
                        sign = -sign;
                    }
                }
            }
            k += 1;
        }
    }
    Ok((sign, state))
}

fn readout(
    state: &Statevector,
    obs: &Observable,
    mode: EstimatorMode,
    rng: &mut rng::StreamRng,
) -> Result<f64> {
    match mode {
        EstimatorMode::AnalyticTrajectory => state.expectation(obs),
        EstimatorMode::Shot => obs
            .terms()
            .iter()
            .map(|(c, p)| {
                let e = state.pauli_expectation(p)?;
                let up = rng.random::<f64>() < 0.5 * (1.0 + e);
                Ok(if up { *c } else { -*c })
            })
            .sum(),
    }
}

fn sample_estimator(
    circuit: &QuantumCircuit,
    models: &[PauliLindbladModel],
    obs: &Observable,
    cfg: &SamplingConfig,
    inverse: Option<&QuasiProbabilityDecomposition>,
) -> Result<MitigatedEstimate> {
    check_models(circuit, models)?;
    check_size(circuit.n_qubits(), obs.n_qubits())?;
    if cfg.samples == 0 {
        return Err(Error::invalid("samples must be at least 1"));
    }
    let gamma = inverse.map_or(1.0, QuasiProbabilityDecomposition::gamma_total);
    let ranges = rng::chunks(cfg.samples);
    let partial: Vec<Result<Moments>> = rng::with_pool(cfg.workers, || {
        ranges
            .par_iter()
            .enumerate()
            .map(|(k, range)| {
                let mut rng = rng::stream(cfg.seed, k as u64);
                let mut m = Moments::default();
                for _ in range.clone() {
                    let (sign, state) = trajectory(circuit, models, inverse, &mut rng)?;
                    m.push(gamma * sign * readout(&state, obs, cfg.mode, &mut rng)?);
                }
                Ok(m)
            })
            .collect()
    });
    let mut total = Moments::default();
    for m in partial {
        total = total.merge(m?);
    }
    Ok(MitigatedEstimate {
        value: total.mean,
        std_error: total.std_error(),
        samples: cfg.samples,
        gamma_total: gamma,
        mode: cfg.mode,
        seed: cfg.seed,
        sample_variance: total.variance(),
    })
}

/// Unbiased PEC estimate of `⟨O⟩` for the noiseless circuit.
pub fn pec_estimate(
    circuit: &QuantumCircuit,
    models: &[PauliLindbladModel],
    obs: &Observable,
    cfg: &SamplingConfig,
) -> Result<MitigatedEstimate> {
    let qpd = QuasiProbabilityDecomposition::new(models);
    sample_estimator(circuit, models, obs, cfg, Some(&qpd))
}

/// The same trajectories without the inverse: an estimate of the noisy value.
pub fn noisy_estimate(
    circuit: &QuantumCircuit,
    models: &[PauliLindbladModel],
    obs: &Observable,
    cfg: &SamplingConfig,
) -> Result<MitigatedEstimate> {
    sample_estimator(circuit, models, obs, cfg, None)
}

/// Largest number of (layer, generator) slots [`signed_enumeration`] accepts.
pub const MAX_ENUMERATION_SLOTS: usize = 10;

/// Sums every noise-and-inverse insertion pattern weighted by its signed
/// probability. Equals the noiseless expectation when the inverse is exact.
pub fn signed_enumeration(
    circuit: &QuantumCircuit,
    models: &[PauliLindbladModel],
    obs: &Observable,
) -> Result<f64> {
    check_models(circuit, models)?;
    let slots: usize = models.iter().map(|m| m.generators().len()).sum();
    if slots > MAX_ENUMERATION_SLOTS {
        return Err(Error::invalid(format!(
            "{slots} generator slots exceed the enumeration limit of {MAX_ENUMERATION_SLOTS}"
        )));
    }
    let qpd = QuasiProbabilityDecomposition::new(models);
    let layers: Vec<_> = circuit
        .layers()
        .iter()
        .filter(|l| l.kind() != LayerKind::Measurement)
        .collect();
    enumerate_from(
        &layers,
        0,
        0,
        models,
        &qpd,
        Statevector::zero(circuit.n_qubits())?,
        1.0,
        obs,
    )
}

#[allow(clippy::too_many_arguments)]
fn enumerate_from(
    layers: &[&crate::circuit::Layer],
    index: usize,
    noisy_k: usize,
    models: &[PauliLindbladModel],
    qpd: &QuasiProbabilityDecomposition,
    mut state: Statevector,
    weight: f64,
    obs: &Observable,
) -> Result<f64> {
    let Some(layer) = layers.get(index) else {
        return Ok(weight * state.expectation(obs)?);
    };
    for op in layer.ops() {
        state.apply(op)?;
    }
    if layer.kind() != LayerKind::TwoQubit {
        return enumerate_from(layers, index + 1, noisy_k, models, qpd, state, weight, obs);
    }
    let gens = models[noisy_k].generators();
    let inv = &qpd.layers[noisy_k];
    let mut total = 0.0;
    // Each generator slot: (noise fires?, inverse inserts?), four branches.
    for pattern in 0..(1usize << (2 * gens.len())) {
        let mut branch = state.clone();
        let mut w = weight;
        for (i, (p, rate)) in gens.iter().enumerate() {
            let fire = (pattern >> (2 * i)) & 1 == 1;
            let undo = (pattern >> (2 * i + 1)) & 1 == 1;
            let q = crate::noise::insertion_probability(*rate);
            w *= if fire { q } else { 1.0 - q };
            w *= if undo { inv[i].b } else { inv[i].a };
            if fire ^ undo {
                branch.apply_pauli(p)?;
            }
        }
        if w != 0.0 {
            total += enumerate_from(layers, index + 1, noisy_k + 1, models, qpd, branch, w, obs)?;
        }
    }
    Ok(total)
}

/// Samples needed for precision `ε`: `(Π_layers γ)² / ε²`.
pub fn sampling_overhead(models: &[PauliLindbladModel], epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("target precision must be positive"));
    }
    let log_gamma: f64 = models.iter().map(|m| 2.0 * m.total_rate()).sum();
    Ok((2.0 * log_gamma).exp() / (epsilon * epsilon))
}

/// Runtime `J = d·γ̄^{dn}·β` with `γ̄ = exp(4λ̄)`, where `λ̄` is the per-qubit rate
/// averaged over layers and `β` the time per layer (seconds in, seconds out).
pub fn runtime_estimate(n: usize, depth: usize, lambda_bar: f64, beta: f64) -> Result<f64> {
    if !(lambda_bar >= 0.0) || !(beta >= 0.0) {
        return Err(Error::invalid("rate and layer time must be nonnegative"));
    }
    let exponent = 4.0 * lambda_bar * depth as f64 * n as f64;
    Ok(depth as f64 * exponent.exp() * beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverheadRow {
    pub lambda: f64,
    pub steps: usize,
    pub layers: usize,
    pub instances: f64,
}

/// Circuit instances for PEC of `steps × layers_per_step` layers on `n` qubits,
/// each layer carrying per-qubit rate `λ` (so `Σλ = nλ` per layer).
pub fn overhead_table(
    n: usize,
    steps_list: &[usize],
    lambda_grid: &[f64],
    layers_per_step: usize,
    epsilon: f64,
) -> Result<Vec<OverheadRow>> {
    if steps_list.is_empty() || lambda_grid.is_empty() {
        return Err(Error::invalid("overhead table needs nonempty step and rate grids"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::invalid("target precision must be positive"));
    }
    if let Some(l) = lambda_grid.iter().find(|l| !(**l >= 0.0)) {
        return Err(Error::invalid(format!("rate {l} must be nonnegative")));
    }
    let mut rows = Vec::with_capacity(steps_list.len() * lambda_grid.len());
    for &steps in steps_list {
        let layers = steps * layers_per_step;
        for &lambda in lambda_grid {
            let exponent = 4.0 * lambda * n as f64 * layers as f64;
            rows.push(OverheadRow {
                lambda,
                steps,
                layers,
                instances: exponent.exp() / (epsilon * epsilon),
            });
        }
    }
    Ok(rows)
}

/// Per-qubit rate at which the instance count reaches `budget`.
pub fn crossing_lambda(n: usize, layers: usize, epsilon: f64, budget: f64) -> f64 {
    (budget * epsilon * epsilon).ln().max(0.0) / (4.0 * n as f64 * layers as f64)
}

/// Noise-scaled expectations and their extrapolation to zero noise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZneResult {
    pub value: f64,
    pub scale_factors: Vec<f64>,
    pub noisy_values: Vec<f64>,
    pub order: usize,
}

/// Richardson extrapolation: fits a degree-`order` polynomial in the scale factor
/// and returns its value at zero.
pub fn richardson_extrapolate(scale_factors: &[f64], values: &[f64], order: usize) -> Result<f64> {
    if scale_factors.len() != values.len() {
        return Err(Error::invalid("scale factors and values differ in length"));
    }
    if scale_factors.len() < order + 1 {
        return Err(Error::invalid(format!(
            "degree {order} fit needs at least {} points, got {}",
            order + 1,
            scale_factors.len()
        )));
    }
    Ok(linalg::polyfit(scale_factors, values, order)[0])
}

/// Exact noisy expectations at each rate scale (density-matrix evolution), then
/// Richardson extrapolation.
pub fn zne_estimate(
    circuit: &QuantumCircuit,
    models: &[PauliLindbladModel],
    obs: &Observable,
    scale_factors: &[f64],
    order: usize,
) -> Result<ZneResult> {
    check_models(circuit, models)?;
    check_size(circuit.n_qubits(), obs.n_qubits())?;
    if scale_factors.iter().any(|&c| !(c >= 1.0) || !c.is_finite()) {
        return Err(Error::invalid("scale factors must be finite and at least 1"));
    }
    if !scale_factors.contains(&1.0) {
        return Err(Error::invalid("scale factors must include 1"));
    }
    let mut sorted = scale_factors.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("scale factors must be distinct"));
    }
    if scale_factors.len() < order + 1 {
        return Err(Error::invalid(format!(
            "degree {order} fit needs at least {} scale factors",
            order + 1
        )));
    }
    let rho0 = DensityMatrix::zero(circuit.n_qubits())?;
    let noisy_values = scale_factors
        .iter()
        .map(|&c| {
            let scaled = models
                .iter()
                .map(|m| m.scaled(c))
                .collect::<Result<Vec<_>>>()?;
            density_run(circuit, &scaled, &rho0)?.expectation(obs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZneResult {
        value: richardson_extrapolate(scale_factors, &noisy_values, order)?,
        scale_factors: scale_factors.to_vec(),
        noisy_values,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::noise::apply_exact;
    use crate::simulator::run;

    fn model(gens: &[(&str, f64)]) -> PauliLindbladModel {
        let n = gens[0].0.len();
        PauliLindbladModel::from_labels(n, gens).unwrap()
    }

    fn small_circuit() -> QuantumCircuit {
        let mut c = QuantumCircuit::new(2);
        c.push(&[(Gate::Ry(0.7), &[0]), (Gate::Rx(0.4), &[1])]).unwrap();
        c.push(&[(Gate::Cx, &[0, 1])]).unwrap();
        c.push(&[(Gate::Ry(-0.5), &[1])]).unwrap();
        c.push(&[(Gate::Rzz(0.9), &[0, 1])]).unwrap();
        c
    }

    #[test]
    fn inversion_values() {
        let zero = invert_channel(&model(&[("X", 0.0)]));
        assert_eq!((zero[0].a, zero[0].b, zero[0].gamma()), (1.0, 0.0, 1.0));
        let t = &invert_channel(&model(&[("X", 0.05)]))[0];
        assert!((t.a - 1.052585).abs() < 1e-6);
        assert!((t.b + 0.052585).abs() < 1e-6);
        assert!((t.gamma() - 1.105171).abs() < 1e-6);
        assert!((t.a + t.b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_undoes_channel() {
        let m = model(&[("XI", 0.03), ("ZZ", 0.05), ("IY", 0.01)]);
        let mut psi = Statevector::zero(2).unwrap();
        psi.apply_gate(&Gate::H, &[0]).unwrap();
        psi.apply_gate(&Gate::Ry(0.3), &[1]).unwrap();
        psi.apply_gate(&Gate::Cx, &[0, 1]).unwrap();
        let rho = DensityMatrix::from_statevector(&psi).unwrap();
        let back = apply_inverse_exact(&apply_exact(&rho, &m).unwrap(), &invert_channel(&m)).unwrap();
        assert!(back.distance(&rho) < 1e-12);
    }

    #[test]
    fn gamma_is_product_and_order_invariant() {
        let a = model(&[("XI", 0.03), ("ZZ", 0.05)]);
        let b = model(&[("ZZ", 0.05), ("XI", 0.03)]);
        let qa = QuasiProbabilityDecomposition::new(&[a.clone(), a.clone()]);
        let qb = QuasiProbabilityDecomposition::new(&[b.clone(), b]);
        assert!((qa.gamma_total() - (2.0 * 0.16f64).exp()).abs() < 1e-12);
        assert!((qa.gamma_total() - qb.gamma_total()).abs() < 1e-15);
        assert!((layer_gamma(&a) - qa.layer_gamma(0)).abs() < 1e-15);
    }

    #[test]
    fn noiseless_single_sample_is_exact() {
        let c = small_circuit();
        let models = vec![model(&[("XI", 0.0)]), model(&[("ZZ", 0.0)])];
        let obs = Observable::from_labels(2, &[(1.0, "ZI"), (0.5, "XX")]).unwrap();
        let ideal = run(&c, &Statevector::zero(2).unwrap()).unwrap().expectation(&obs).unwrap();
        let cfg = SamplingConfig {
            samples: 1,
            seed: 3,
            mode: EstimatorMode::AnalyticTrajectory,
            workers: 1,
        };
        let est = pec_estimate(&c, &models, &obs, &cfg).unwrap();
        assert_eq!(est.value, ideal);
        assert_eq!(est.gamma_total, 1.0);
    }

    #[test]
    fn enumeration_is_unbiased() {
        let c = small_circuit();
        let models = vec![model(&[("XI", 0.08), ("YZ", 0.05)]), model(&[("ZZ", 0.1), ("IX", 0.03)])];
        let obs = Observable::from_labels(2, &[(1.0, "ZI"), (-0.4, "YX"), (0.3, "IZ")]).unwrap();
        let ideal = run(&c, &Statevector::zero(2).unwrap()).unwrap().expectation(&obs).unwrap();
        let v = signed_enumeration(&c, &models, &obs).unwrap();
        assert!((v - ideal).abs() < 1e-10);
    }

    #[test]
    fn model_count_must_match_layers() {
        let c = small_circuit();
        let obs = Observable::from_labels(2, &[(1.0, "ZI")]).unwrap();
        let cfg = SamplingConfig {
            samples: 10,
            seed: 0,
            mode: EstimatorMode::Shot,
            workers: 1,
        };
        assert!(matches!(
            pec_estimate(&c, &[model(&[("XI", 0.1)])], &obs, &cfg),
            Err(Error::LayerModelMismatch { layers: 2, models: 1 })
        ));
    }

    #[test]
    fn overhead_formulas() {
        let unit = vec![model(&[("XI", 0.0)])];
        assert!((sampling_overhead(&unit, 0.1).unwrap() - 100.0).abs() < 1e-9);
        let m = model(&[("XI", 0.02), ("ZZ", 0.01)]);
        let one = sampling_overhead(std::slice::from_ref(&m), 1.0).unwrap();
        let two = sampling_overhead(&[m.clone(), m], 1.0).unwrap();
        assert!((two - one * one).abs() < 1e-12);
        assert!(sampling_overhead(&unit, 0.0).is_err());
    }

    #[test]
    fn runtime_formula() {
        assert_eq!(runtime_estimate(10, 7, 0.0, 2.0).unwrap(), 14.0);
        let j = runtime_estimate(100, 100, 1e-4, 1e-3).unwrap();
        assert!((j / (100.0 * 4f64.exp() * 1e-3) - 1.0).abs() < 1e-12);
        assert!((j - 5.46).abs() < 0.01);
        assert!(runtime_estimate(1, 1, -1.0, 1.0).is_err());
        assert!(runtime_estimate(1, 1, 1.0, -1.0).is_err());
        let days = DAILY_CIRCUIT_BUDGET * REPETITION_TIME_S / 86_400.0;
        assert!((days - 1.157).abs() < 1e-3);
    }

    #[test]
    fn table_is_monotone() {
        let grid: Vec<f64> = (0..8).map(|k| 1e-6 * 2f64.powi(k)).collect();
        let rows = overhead_table(100, &[100, 1000], &grid, 6, 0.01).unwrap();
        for s in [100, 1000] {
            let r: Vec<_> = rows.iter().filter(|r| r.steps == s).collect();
            assert!(r.windows(2).all(|w| w[1].instances > w[0].instances));
        }
        for (a, b) in rows[..8].iter().zip(&rows[8..]) {
            assert!(b.instances > a.instances);
        }
        let zero = overhead_table(100, &[100, 1000], &[0.0], 6, 0.01).unwrap();
        assert!(zero.iter().all(|r| (r.instances - 1e4).abs() < 1e-9));
        assert!(overhead_table(100, &[], &grid, 6, 0.01).is_err());
        assert!(overhead_table(100, &[1], &[], 6, 0.01).is_err());
    }

    #[test]
    fn richardson_is_exact_on_polynomials() {
        let v = richardson_extrapolate(&[1.0, 2.0, 3.0], &[0.9, 0.8, 0.7], 1).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let q = |c: f64| 0.5 - 0.2 * c + 0.03 * c * c;
        let xs = [1.0, 1.5, 2.5];
        let v = richardson_extrapolate(&xs, &xs.map(q), 2).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!(richardson_extrapolate(&[1.0, 2.0], &[0.9, 0.8], 2).is_err());
    }

    #[test]
    fn zne_validation_and_noiseless_limit() {
        let c = small_circuit();
        let obs = Observable::from_labels(2, &[(1.0, "ZZ")]).unwrap();
        let zero = vec![model(&[("XI", 0.0)]), model(&[("ZZ", 0.0)])];
        let ideal = run(&c, &Statevector::zero(2).unwrap()).unwrap().expectation(&obs).unwrap();
        let r = zne_estimate(&c, &zero, &obs, &[1.0, 2.0, 3.0], 1).unwrap();
        assert!((r.value - ideal).abs() < 1e-12);
        assert!(zne_estimate(&c, &zero, &obs, &[2.0, 3.0], 1).is_err());
        assert!(zne_estimate(&c, &zero, &obs, &[1.0, 1.0, 2.0], 1).is_err());
        assert!(zne_estimate(&c, &zero, &obs, &[0.5, 1.0], 1).is_err());
        assert!(zne_estimate(&c, &zero, &obs, &[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn zne_cancels_single_generator_decay_to_fit_order() {
        // One X error on a Z-measured qubit: ⟨Z⟩(c) = e^{-2cλ}, a pure exponential.
        let mut c = QuantumCircuit::new(2);
        c.push(&[(Gate::Cx, &[0, 1])]).unwrap();
        let lambda = 0.01;
        let models = vec![model(&[("XI", lambda)])];
        let obs = Observable::from_labels(2, &[(1.0, "ZI")]).unwrap();
        let factors = [1.0, 2.0, 3.0];
        let r = zne_estimate(&c, &models, &obs, &factors, 1).unwrap();
        for (k, &f) in factors.iter().enumerate() {
            assert!((r.noisy_values[k] - (-2.0 * f * lambda).exp()).abs() < 1e-12);
        }
        // Linear fit through e^{-2cλ} at c = 1,2,3 leaves an O((2λ)²) bias.
        let bias = (r.value - 1.0).abs();
        assert!(bias < 4.0 * (2.0 * lambda).powi(2), "{bias}");
        assert!(bias < (r.noisy_values[0] - 1.0).abs());
        let quad = zne_estimate(&c, &models, &obs, &factors, 2).unwrap();
        assert!((quad.value - 1.0).abs() < 4.0 * (2.0 * lambda).powi(3));
    }
}
