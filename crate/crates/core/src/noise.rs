//! Sparse Pauli-Lindblad noise `Λ = exp(𝓛)`, `𝓛(ρ) = Σᵢ λᵢ (PᵢρPᵢ − ρ)`.
//!
//! Every generator acts diagonally in the Pauli basis, so `Λ` factors into
//! commuting single-generator channels `ρ ↦ wᵢρ + (1−wᵢ)PᵢρPᵢ` with
//! `wᵢ = (1 + e^{−2λᵢ})/2`. The Pauli `Q` is an eigenvector with fidelity
//! `f(Q) = exp(−2 Σ_{Pᵢ anticommutes with Q} λᵢ)`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Gate;
use crate::error::{check_size, Error, Result};
use crate::linalg;
use crate::pauli::{Observable, Pauli, PauliString};
use crate::rng::{self, StreamRng};
use crate::simulator::{DensityMatrix, Statevector};

/// Width limit for [`apply_exact`].
pub const MAX_EXACT_CHANNEL_QUBITS: usize = 6;

/// Default learning depths.
pub const DEFAULT_DEPTHS: [usize; 5] = [1, 2, 4, 8, 16];

#[derive(Debug, Clone, PartialEq)]
pub struct PauliLindbladModel {
    n_qubits: usize,
    generators: Vec<(PauliString, f64)>,
}

impl PauliLindbladModel {
    /// Validates rates and merges duplicate generators by summing their rates.
    pub fn new(n_qubits: usize, generators: Vec<(PauliString, f64)>) -> Result<Self> {
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        let mut merged: Vec<(PauliString, f64)> = Vec::with_capacity(generators.len());
        for (p, rate) in generators {
            check_size(n_qubits, p.n_qubits())?;
            if p.is_identity() {
                return Err(Error::invalid("identity is not a valid noise generator"));
            }
            if !rate.is_finite() || rate < 0.0 {
                return Err(Error::invalid(format!(
                    "rate for {p} must be finite and nonnegative, got {rate}"
                )));
            }
            match index.get(&p) {
                Some(&i) => merged[i].1 += rate,
                None => {
                    index.insert(p.clone(), merged.len());
                    merged.push((p, rate));
                }
            }
        }
        Ok(Self {
            n_qubits,
            generators: merged,
        })
    }

    pub fn from_labels(n_qubits: usize, generators: &[(&str, f64)]) -> Result<Self> {
        let parsed = generators
            .iter()
            .map(|&(l, r)| Ok((PauliString::parse(l, n_qubits)?, r)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n_qubits, parsed)
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            generators: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generators(&self) -> &[(PauliString, f64)] {
        &self.generators
    }

    pub fn rates(&self) -> Vec<f64> {
        self.generators.iter().map(|(_, r)| *r).collect()
    }

    pub fn total_rate(&self) -> f64 {
        self.generators.iter().map(|(_, r)| r).sum()
    }

    /// The same generators with every rate multiplied by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.n_qubits,
            self.generators
                .iter()
                .map(|(p, r)| (p.clone(), r * factor))
                .collect(),
        )
    }

    pub fn pauli_fidelity(&self, q: &PauliString) -> Result<f64> {
        check_size(self.n_qubits, q.n_qubits())?;
        let exponent: f64 = self
            .generators
            .iter()
            .filter(|(p, _)| !p.commutes_unchecked(q))
            .map(|(_, r)| r)
            .sum();
        Ok((-2.0 * exponent).exp())
    }

    /// Indices of generators inserted in one draw of the channel.
    pub fn sample_insertions(&self, rng: &mut StreamRng) -> Vec<usize> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, (_, r))| *r > 0.0 && rng.random::<f64>() < insertion_probability(*r))
            .map(|(i, _)| i)
            .collect()
    }

    /// Applies one stochastic draw of the channel and reports what was inserted.
    pub fn apply_stochastic(
        &self,
        state: &mut Statevector,
        rng: &mut StreamRng,
    ) -> Result<Vec<PauliString>> {
        check_size(self.n_qubits, state.n_qubits())?;
        let mut inserted = Vec::new();
        for i in self.sample_insertions(rng) {
            let p = &self.generators[i].0;
            state.apply_pauli(p)?;
            inserted.push(p.clone());
        }
        Ok(inserted)
    }

    pub fn to_json(&self) -> String {
        let doc = NoiseModelDocument {
            n_qubits: self.n_qubits,
            generators: self
                .generators
                .iter()
                .map(|(p, r)| GeneratorRecord {
                    pauli: p.to_string(),
                    rate: *r,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NoiseModelDocument =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let generators = doc
            .generators
            .into_iter()
            .map(|g| Ok((PauliString::parse(&g.pauli, doc.n_qubits)?, g.rate)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.n_qubits, generators)
    }
}

/// Probability `(1 − e^{−2λ})/2` that a generator fires in one channel draw.
pub fn insertion_probability(rate: f64) -> f64 {
    -0.5 * (-2.0 * rate).exp_m1()
}

/// On-disk form of a noise model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModelDocument {
    pub n_qubits: usize,
    pub generators: Vec<GeneratorRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorRecord {
    pub pauli: String,
    pub rate: f64,
}

pub(crate) fn apply_channel(rho: &mut DensityMatrix, model: &PauliLindbladModel) -> Result<()> {
    check_size(model.n_qubits(), rho.n_qubits())?;
    for (p, rate) in model.generators() {
        if *rate > 0.0 {
            rho.mix_with_pauli(p, 1.0 - insertion_probability(*rate))?;
        }
    }
    Ok(())
}

/// `Λ(ρ)` evaluated exactly, for at most six qubits.
pub fn apply_exact(rho: &DensityMatrix, model: &PauliLindbladModel) -> Result<DensityMatrix> {
    if rho.n_qubits() > MAX_EXACT_CHANNEL_QUBITS {
        return Err(Error::TooManyQubits {
            n: rho.n_qubits(),
            max: MAX_EXACT_CHANNEL_QUBITS,
            what: "exact channel application",
        });
    }
    let mut out = rho.clone();
    apply_channel(&mut out, model)?;
    Ok(out)
}

/// Nearest-neighbour edges of an open chain.
pub fn line_edges(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|j| (j - 1, j)).collect()
}

/// All weight-one Paulis, then `XX, YY, ZZ, XZ, ZX` on every edge.
pub fn default_probe_set(n: usize, edges: &[(usize, usize)]) -> Result<Vec<PauliString>> {
    let mut out = Vec::with_capacity(3 * n + 5 * edges.len());
    for q in 0..n {
        for op in [Pauli::X, Pauli::Y, Pauli::Z] {
            out.push(PauliString::single(n, q, op)?);
        }
    }
    let pairs = [
        (Pauli::X, Pauli::X),
        (Pauli::Y, Pauli::Y),
        (Pauli::Z, Pauli::Z),
        (Pauli::X, Pauli::Z),
        (Pauli::Z, Pauli::X),
    ];
    for &(a, b) in edges {
        for (pa, pb) in pairs {
            out.push(PauliString::from_sparse(n, &[(a, pa), (b, pb)])?);
        }
    }
    Ok(out)
}

/// A random sparse model on a line: `count` distinct generators drawn from
/// [`default_probe_set`] with rates uniform in `[max_rate/5, max_rate]`.
pub fn planted_line_model(n: usize, count: usize, max_rate: f64, seed: u64) -> Result<PauliLindbladModel> {
    let pool = default_probe_set(n, &line_edges(n))?;
    if count > pool.len() {
        return Err(Error::invalid(format!(
            "{count} generators requested but only {} line-local candidates exist",
            pool.len()
        )));
    }
    if !(max_rate >= 0.0) || !max_rate.is_finite() {
        return Err(Error::invalid("maximum rate must be finite and nonnegative"));
    }
    let mut rng = rng::stream(seed, 0);
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    for k in 0..count {
        let j = rng.random_range(k..idx.len());
        idx.swap(k, j);
    }
    let mut chosen = idx[..count].to_vec();
    chosen.sort_unstable();
    let gens = chosen
        .into_iter()
        .map(|i| (pool[i].clone(), max_rate * (0.2 + 0.8 * rng.random::<f64>())))
        .collect();
    PauliLindbladModel::new(n, gens)
}

/// Measured decay `⟨Q⟩_d` of one probe over a depth schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayData {
    pub probe: PauliString,
    pub depths: Vec<usize>,
    pub values: Vec<f64>,
}

/// How decay curves are synthesized from a known channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayMode {
    /// Exact expectations from density-matrix evolution.
    Exact,
    /// `shots` single-shot measurements per (probe, depth); probe `b` uses RNG stream `b`.
    Shots { shots: usize, seed: u64 },
}

/// Prepares the +1 eigenstate of `q`, applies `model` repeatedly, and records `⟨q⟩`
/// at each depth.
pub fn synthesize_decay(
    model: &PauliLindbladModel,
    probes: &[PauliString],
    depths: &[usize],
    mode: DecayMode,
) -> Result<Vec<DecayData>> {
    if depths.is_empty() || depths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("depths must be nonempty and strictly increasing"));
    }
    probes
        .iter()
        .enumerate()
        .map(|(b, q)| {
            check_size(model.n_qubits(), q.n_qubits())?;
            let values = match mode {
                DecayMode::Exact => exact_decay(model, q, depths)?,
                DecayMode::Shots { shots, seed } => {
                    if shots == 0 {
                        return Err(Error::ZeroShots);
                    }
                    shot_decay(model, q, depths, shots, &mut rng::stream(seed, b as u64))
                }
            };
            Ok(DecayData {
                probe: q.clone(),
                depths: depths.to_vec(),
                values,
            })
        })
        .collect()
}

/// `|ψ⟩` with `Q|ψ⟩ = |ψ⟩`, built by per-qubit basis changes from `|0…0⟩`.
pub fn eigenstate(q: &PauliString) -> Result<Statevector> {
    let mut psi = Statevector::zero(q.n_qubits())?;
    for k in 0..q.n_qubits() {
        match q.get(k) {
            Pauli::X => psi.apply_gate(&Gate::H, &[k])?,
            Pauli::Y => {
                psi.apply_gate(&Gate::H, &[k])?;
                psi.apply_gate(&Gate::S, &[k])?;
            }
            Pauli::I | Pauli::Z => {}
        }
    }
    Ok(psi)
}

fn exact_decay(model: &PauliLindbladModel, q: &PauliString, depths: &[usize]) -> Result<Vec<f64>> {
    let mut rho = DensityMatrix::from_statevector(&eigenstate(q)?)?;
    let mut applied = 0;
    let mut out = Vec::with_capacity(depths.len());
    for &d in depths {
        while applied < d {
            apply_channel(&mut rho, model)?;
            applied += 1;
        }
        out.push(rho.pauli_expectation(q)?);
    }
    Ok(out)
}

/// Each shot starts in the +1 eigenstate of `q`, so the measured sign is the
/// parity of anticommuting insertions. `d` layers of a generator with insertion
/// probability `p` flip the sign with probability `(1 − (1−2p)^d)/2`.
fn shot_decay(
    model: &PauliLindbladModel,
    q: &PauliString,
    depths: &[usize],
    shots: usize,
    rng: &mut StreamRng,
) -> Vec<f64> {
    let anti: Vec<f64> = model
        .generators()
        .iter()
        .filter(|(p, r)| *r > 0.0 && !p.commutes_unchecked(q))
        .map(|(_, r)| *r)
        .collect();
    depths
        .iter()
        .map(|&d| {
            let flips: Vec<f64> = anti
                .iter()
                .map(|&r| insertion_probability(r * d as f64))
                .collect();
            let mut total = 0i64;
            for _ in 0..shots {
                let parity = flips
                    .iter()
                    .fold(false, |acc, &p| acc ^ (rng.random::<f64>() < p));
                total += if parity { -1 } else { 1 };
            }
            total as f64 / shots as f64
        })
        .collect()
}

/// Result of rate learning.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedModel {
    pub model: PauliLindbladModel,
    /// Fitted per-layer fidelity of each probe.
    pub fidelities: Vec<f64>,
    /// `(A·λ − b)` per probe, where `b = −½ log f`.
    pub residuals: Vec<f64>,
}

/// Binary matrix `A[b][i] = 1` when probe `b` anticommutes with candidate `i`.
pub fn anticommutation_matrix(probes: &[PauliString], candidates: &[PauliString]) -> DMatrix<f64> {
    DMatrix::from_fn(probes.len(), candidates.len(), |b, i| {
        if probes[b].commutes_unchecked(&candidates[i]) {
            0.0
        } else {
            1.0
        }
    })
}

/// Fits `log⟨Q⟩_d = d·log f` per probe and solves `−½ log f = A·λ` for `λ ≥ 0`.
pub fn learn_rates(data: &[DecayData], candidates: &[PauliString]) -> Result<LearnedModel> {
    let n = candidates
        .first()
        .map(PauliString::n_qubits)
        .ok_or_else(|| Error::invalid("no candidate generators"))?;
    let probes: Vec<PauliString> = data.iter().map(|d| d.probe.clone()).collect();
    for p in probes.iter().chain(candidates) {
        check_size(n, p.n_qubits())?;
    }
    let a = anticommutation_matrix(&probes, candidates);
    let null = linalg::null_space(&a, 1e-10);
    if !null.is_empty() {
        return Err(Error::Unidentifiable {
            null_space: null.into_iter().map(|v| v.as_slice().to_vec()).collect(),
        });
    }

    let mut fidelities = Vec::with_capacity(data.len());
    let mut rhs = DVector::zeros(data.len());
    for (b, curve) in data.iter().enumerate() {
        let usable: Vec<(f64, f64)> = curve
            .depths
            .iter()
            .zip(&curve.values)
            .filter(|(_, &v)| v > 0.0)
            .map(|(&d, &v)| (d as f64, v.ln()))
            .collect();
        if usable.len() < 2 {
            return Err(Error::InsufficientDepths {
                probe: curve.probe.to_string(),
                usable: usable.len(),
            });
        }
        let slope = usable.iter().map(|(d, y)| d * y).sum::<f64>()
            / usable.iter().map(|(d, _)| d * d).sum::<f64>();
        fidelities.push(slope.exp());
        rhs[b] = -0.5 * slope;
    }

    let lambda = linalg::nnls(&a, &rhs);
    let residuals = (&a * &lambda - &rhs).as_slice().to_vec();
    let model = PauliLindbladModel::new(
        n,
        candidates
            .iter()
            .cloned()
            .zip(lambda.iter().cloned())
            .collect(),
    )?;
    Ok(LearnedModel {
        model,
        fidelities,
        residuals,
    })
}

/// `Tr(Oρ²) / Tr(ρ²)`.
pub fn virtual_distillation_expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    check_size(rho.n_qubits(), obs.n_qubits())?;
    let purity = rho.purity();
    if purity < 1e-12 {
        return Err(Error::DegeneratePurity { purity });
    }
    let sq = rho.square();
    let dim = rho.dim();
    let mut num = 0.0;
    for (c, p) in obs.terms() {
        let (x, z) = p.masks();
        let tr: Complex64 = (0..dim)
            .map(|b| PauliString::basis_phase(x, z, b) * sq[b * dim + (b ^ x as usize)])
            .sum();
        num += c * tr.re;
    }
    Ok(num / purity)
}
