//! Wire-cut circuit knitting.
//!
//! Every cut replaces the identity channel on one wire by eight
//! measure-and-prepare pairs,
//! `ρ = ½ Σ_i c_i Tr(O_i ρ) ρ_i` with `Σ |c_i|/2 = 4`, so a circuit whose wires
//! are cut splits into independent sub-circuits whose results are recombined.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{Gate, Instruction, LayerKind, QuantumCircuit};
use crate::error::{check_size, Error, Result};
use crate::pauli::{Observable, Pauli, PauliString};
use crate::rng::{self, Moments};
use crate::simulator::Statevector;

/// Cuts allowed in exact enumeration (`8^k` terms).
pub const MAX_EXACT_CUTS: usize = 6;

/// Wire `qubit` is cut between layer `boundary - 1` and layer `boundary`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CutPoint {
    pub qubit: usize,
    pub boundary: usize,
}

impl std::str::FromStr for CutPoint {
    type Err = Error;

    /// `qubit@boundary`, e.g. `0@1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCut(format!("cut {s:?} is not of the form qubit@layer"));
        let (q, b) = s.split_once('@').ok_or_else(bad)?;
        Ok(CutPoint {
            qubit: q.trim().parse().map_err(|_| bad())?,
            boundary: b.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PreparedState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl PreparedState {
    fn prepare(self, state: &mut Statevector, q: usize) -> Result<()> {
        let gates: &[Gate] = match self {
            PreparedState::Zero => &[],
            PreparedState::One => &[Gate::X],
            PreparedState::Plus => &[Gate::H],
            PreparedState::Minus => &[Gate::X, Gate::H],
            PreparedState::PlusI => &[Gate::H, Gate::S],
            PreparedState::MinusI => &[Gate::X, Gate::H, Gate::S],
        };
        for g in gates {
            state.apply_gate(g, &[q])?;
        }
        Ok(())
    }
}

/// One measure-and-prepare pair: the upstream wire contributes `⟨measure⟩`, the
/// downstream wire starts in `prepare`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WireCutTerm {
    pub coeff: f64,
    pub measure: Pauli,
    pub prepare: PreparedState,
}

pub const WIRE_CUT_TERMS: [WireCutTerm; 8] = {
    use PreparedState::*;
    const fn t(coeff: f64, measure: Pauli, prepare: PreparedState) -> WireCutTerm {
        WireCutTerm {
            coeff,
            measure,
            prepare,
        }
    }
    [
        t(0.5, Pauli::I, Zero),
        t(0.5, Pauli::I, One),
        t(0.5, Pauli::X, Plus),
        t(-0.5, Pauli::X, Minus),
        t(0.5, Pauli::Y, PlusI),
        t(-0.5, Pauli::Y, MinusI),
        t(0.5, Pauli::Z, Zero),
        t(-0.5, Pauli::Z, One),
    ]
};

/// A maximal stretch of one wire between cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub qubit: usize,
    /// First layer of the stretch.
    pub start: usize,
    /// One past the last layer.
    pub end: usize,
    pub component: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubCircuit {
    pub circuit: QuantumCircuit,
    /// Segment index of each local qubit.
    pub segments: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutPlan {
    circuit: QuantumCircuit,
    cuts: Vec<CutPoint>,
    segments: Vec<Segment>,
    subcircuits: Vec<SubCircuit>,
    /// `(upstream, downstream)` segment of each cut.
    cut_segments: Vec<(usize, usize)>,
}

impl CutPlan {
    pub fn circuit(&self) -> &QuantumCircuit {
        &self.circuit
    }

    pub fn cuts(&self) -> &[CutPoint] {
        &self.cuts
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn subcircuits(&self) -> &[SubCircuit] {
        &self.subcircuits
    }

    pub fn term_count(&self) -> usize {
        8usize.pow(self.cuts.len() as u32)
    }

    /// `4^k`.
    pub fn gamma_cut(&self) -> f64 {
        4f64.powi(self.cuts.len() as i32)
    }

    pub fn max_width(&self) -> usize {
        self.subcircuits.iter().map(|s| s.circuit.n_qubits()).max().unwrap_or(0)
    }

    /// Term list: the product of the per-cut expansions, in lexicographic order.
    pub fn terms(&self) -> Vec<(f64, Vec<WireCutTerm>)> {
        (0..self.term_count())
            .map(|idx| {
                let choice = self.decode(idx);
                let coeff = choice.iter().map(|t| t.coeff).product();
                (coeff, choice)
            })
            .collect()
    }

    fn decode(&self, mut idx: usize) -> Vec<WireCutTerm> {
        let mut out = vec![WIRE_CUT_TERMS[0]; self.cuts.len()];
        for slot in out.iter_mut().rev() {
            *slot = WIRE_CUT_TERMS[idx % 8];
            idx /= 8;
        }
        out
    }

    /// Product over sub-circuits for one term choice, for every observable term.
    fn evaluate(&self, choice: &[WireCutTerm], obs: &Observable) -> Result<Vec<f64>> {
        let mut values = vec![1.0; obs.len()];
        let mut last_segment = vec![usize::MAX; self.circuit.n_qubits()];
        for (s, seg) in self.segments.iter().enumerate() {
            last_segment[seg.qubit] = s;
        }
        for sub in &self.subcircuits {
            let width = sub.circuit.n_qubits();
            let mut state = Statevector::zero(width)?;
            let mut measured = PauliString::identity(width);
            for (k, &(up, down)) in self.cut_segments.iter().enumerate() {
                if let Some(local) = sub.segments.iter().position(|&s| s == down) {
                    choice[k].prepare.prepare(&mut state, local)?;
                }
                if let Some(local) = sub.segments.iter().position(|&s| s == up) {
                    measured.set(local, choice[k].measure);
                }
            }
            state.run(&sub.circuit)?;
            for (value, (_, p)) in values.iter_mut().zip(obs.terms()) {
                let mut local_p = measured.clone();
                for (local, &s) in sub.segments.iter().enumerate() {
                    let seg = &self.segments[s];
                    if last_segment[seg.qubit] == s {
                        local_p.set(local, p.get(seg.qubit));
                    }
                }
                if !local_p.is_identity() {
                    *value *= state.pauli_expectation(&local_p)?;
                }
            }
        }
        Ok(values)
    }
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// Splits the wires at `cuts` and groups the pieces into independent sub-circuits.
pub fn plan_wire_cut(circuit: &QuantumCircuit, cuts: &[CutPoint]) -> Result<CutPlan> {
    let n = circuit.n_qubits();
    let depth = circuit.depth();
    let mut cuts = cuts.to_vec();
    cuts.sort();
    for w in cuts.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidCut(format!(
                "duplicate cut on qubit {} at layer {}",
                w[0].qubit, w[0].boundary
            )));
        }
    }
    for c in &cuts {
        if c.qubit >= n {
            return Err(Error::QubitOutOfRange {
                qubit: c.qubit,
                n_qubits: n,
            });
        }
        if c.boundary > depth {
            return Err(Error::InvalidCut(format!(
                "layer boundary {} is not between layers of a depth-{depth} circuit",
                c.boundary
            )));
        }
        if circuit
            .layers()
            .get(c.boundary.wrapping_sub(1))
            .is_some_and(|l| l.kind() == LayerKind::Measurement)
        {
            return Err(Error::InvalidCut("cut after a measurement layer".into()));
        }
    }

    // Segments per qubit, in time order.
    let mut segments = Vec::new();
    let mut first_segment = vec![0; n];
    for (q, first) in first_segment.iter_mut().enumerate() {
        *first = segments.len();
        let mut start = 0;
        for c in cuts.iter().filter(|c| c.qubit == q) {
            segments.push(Segment { qubit: q, start, end: c.boundary, component: 0 });
            start = c.boundary;
        }
        segments.push(Segment { qubit: q, start, end: depth, component: 0 });
    }
    let segment_at = |q: usize, layer: usize| -> usize {
        let before = cuts.iter().filter(|c| c.qubit == q && c.boundary <= layer).count();
        first_segment[q] + before
    };

    let mut parent: Vec<usize> = (0..segments.len()).collect();
    for (l, layer) in circuit.layers().iter().enumerate() {
        for op in layer.ops() {
            if let [a, b] = op.qubits[..] {
                let ra = find(&mut parent, segment_at(a, l));
                let rb = find(&mut parent, segment_at(b, l));
                parent[ra] = rb;
            }
        }
    }
    let mut cut_segments = Vec::with_capacity(cuts.len());
    for c in &cuts {
        let down = segment_at(c.qubit, c.boundary);
        let up = down - 1;
        if find(&mut parent, up) == find(&mut parent, down) {
            return Err(Error::InvalidCut(format!(
                "cut on qubit {} at layer {} does not disconnect the circuit",
                c.qubit, c.boundary
            )));
        }
        cut_segments.push((up, down));
    }

    let mut roots: Vec<usize> = Vec::new();
    for (s, seg) in segments.iter_mut().enumerate() {
        let r = find(&mut parent, s);
        let comp = match roots.iter().position(|&x| x == r) {
            Some(k) => k,
            None => {
                roots.push(r);
                roots.len() - 1
            }
        };
        seg.component = comp;
    }

    let mut subcircuits = Vec::with_capacity(roots.len());
    for comp in 0..roots.len() {
        let members: Vec<usize> = (0..segments.len())
            .filter(|&s| segments[s].component == comp)
            .collect();
        let local = |s: usize| members.iter().position(|&m| m == s).expect("member segment");
        let mut sub = QuantumCircuit::new(members.len());
        for (l, layer) in circuit.layers().iter().enumerate() {
            if layer.kind() == LayerKind::Measurement {
                continue;
            }
            let ops: Vec<Instruction> = layer
                .ops()
                .iter()
                .filter(|op| segments[segment_at(op.qubits[0], l)].component == comp)
                .map(|op| {
                    let qs: Vec<usize> = op.qubits.iter().map(|&q| local(segment_at(q, l))).collect();
                    Instruction::new(op.gate, &qs)
                })
                .collect();
            sub.push_layer(ops)?;
        }
        subcircuits.push(SubCircuit {
            circuit: sub,
            segments: members,
        });
    }

    Ok(CutPlan {
        circuit: circuit.clone(),
        cuts,
        segments,
        subcircuits,
        cut_segments,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnitMode {
    /// Every term evaluated with the statevector simulator.
    ExactEnumeration,
    /// Terms drawn with probability `|c|/Σ|c|` and rescaled by `γ`.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KnitResult {
    pub value: f64,
    pub std_error: Option<f64>,
    pub samples: Option<usize>,
    /// Sample variance of the rescaled per-sample estimator.
    pub sample_variance: Option<f64>,
    pub terms: usize,
    pub gamma_cut: f64,
}

fn check_observable(plan: &CutPlan, obs: &Observable) -> Result<()> {
    check_size(plan.circuit.n_qubits(), obs.n_qubits())?;
    let depth = plan.circuit.depth();
    for c in &plan.cuts {
        if c.boundary == depth && obs.terms().iter().any(|(_, p)| p.get(c.qubit) != Pauli::I) {
            return Err(Error::ObservableAtCut { qubit: c.qubit });
        }
    }
    Ok(())
}

/// Recombines sub-circuit results into `⟨O⟩` of the uncut circuit. Terms are
/// evaluated in parallel on `workers` threads (`0` = one per processor); the
/// combination order is fixed.
pub fn execute_plan(
    plan: &CutPlan,
    obs: &Observable,
    mode: KnitMode,
    workers: usize,
) -> Result<KnitResult> {
    check_observable(plan, obs)?;
    let coeffs: Vec<f64> = obs.terms().iter().map(|(c, _)| *c).collect();
    let combine = |vals: Vec<f64>| -> f64 { vals.iter().zip(&coeffs).map(|(v, c)| v * c).sum() };
    match mode {
        KnitMode::ExactEnumeration => {
            if plan.cuts.len() > MAX_EXACT_CUTS {
                return Err(Error::invalid(format!(
                    "exact enumeration supports at most {MAX_EXACT_CUTS} cuts"
                )));
            }
            let parts: Vec<Result<f64>> = rng::with_pool(workers, || {
                (0..plan.term_count())
                    .into_par_iter()
                    .map(|idx| {
                        let choice = plan.decode(idx);
                        let coeff: f64 = choice.iter().map(|t| t.coeff).product();
                        Ok(coeff * combine(plan.evaluate(&choice, obs)?))
                    })
                    .collect()
            });
            let mut value = 0.0;
            for p in parts {
                value += p?;
            }
            Ok(KnitResult {
                value,
                std_error: None,
                samples: None,
                sample_variance: None,
                terms: plan.term_count(),
                gamma_cut: plan.gamma_cut(),
            })
        }
        KnitMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::ZeroShots);
            }
            let gamma = plan.gamma_cut();
            let ranges = rng::chunks(samples);
            let parts: Vec<Result<Moments>> = rng::with_pool(workers, || {
                ranges
                    .par_iter()
                    .enumerate()
                    .map(|(k, range)| {
                        let mut rng = rng::stream(seed, k as u64);
                        let mut m = Moments::default();
                        for _ in range.clone() {
                            let choice: Vec<WireCutTerm> = (0..plan.cuts.len())
                                .map(|_| WIRE_CUT_TERMS[rng.random_range(0..8)])
                                .collect();
                            let sign: f64 = choice.iter().map(|t| t.coeff.signum()).product();
                            m.push(gamma * sign * combine(plan.evaluate(&choice, obs)?));
                        }
                        Ok(m)
                    })
                    .collect()
            });
            let mut total = Moments::default();
            for p in parts {
                total = total.merge(p?);
            }
            Ok(KnitResult {
                value: total.mean,
                std_error: Some(total.std_error()),
                samples: Some(samples),
                sample_variance: Some(total.variance()),
                terms: plan.term_count(),
                gamma_cut: gamma,
            })
        }
    }
}
