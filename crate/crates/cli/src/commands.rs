use std::path::{Path, PathBuf};

use clap::Args;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use qcsc::estimate::{ft_report, modular_scale, ModularSystem};
use qcsc::hamiltonian::{cnot_count, SpinChainHamiltonian, TrotterOrder};
use qcsc::knit::{execute_plan, plan_wire_cut, CutPoint, KnitMode};
use qcsc::noise::{
    default_probe_set, learn_rates, line_edges, planted_line_model, synthesize_decay, DecayMode,
    DEFAULT_DEPTHS,
};
use qcsc::pec::{
    crossing_lambda, noisy_estimate, overhead_table, pec_estimate, sampling_overhead, zne_estimate,
    EstimatorMode, SamplingConfig, DAILY_CIRCUIT_BUDGET, REPETITION_TIME_S,
};
use qcsc::simulator::{bitstring, run, Statevector};
use qcsc::varqte::{evolve, Ansatz, EvolveConfig, VarQteMethod};
use qcsc::{circuit_io, Observable, PauliLindbladModel, PauliString, QuantumCircuit};

use crate::output::{num, opt, Report};
use crate::CliError;

/// Settings shared by every subcommand.
pub struct Context {
    pub seed: u64,
    pub workers: usize,
}

type Outcome = Result<Report, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn load_circuit(path: &Path) -> Result<QuantumCircuit, CliError> {
    Ok(circuit_io::parse(&read(path)?)?)
}

/// One model per two-qubit layer, or a single model reused for every layer.
fn load_models(paths: &[PathBuf], circuit: &QuantumCircuit) -> Result<Vec<PauliLindbladModel>, CliError> {
    let models = paths
        .iter()
        .map(|p| Ok(PauliLindbladModel::from_json(&read(p)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let layers = circuit.two_qubit_layer_count();
    match models.len() {
        1 => Ok(vec![models[0].clone(); layers]),
        _ => Ok(models),
    }
}

fn ideal_expectation(circuit: &QuantumCircuit, obs: &Observable) -> qcsc::Result<f64> {
    run(circuit, &Statevector::zero(circuit.n_qubits())?)?.expectation(obs)
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Circuit file.
    pub circuit: PathBuf,
    /// Pauli sum such as `ZZ` or `ZI,-0.5*XX`.
    #[arg(long)]
    pub observable: Option<String>,
    /// Sample this many computational-basis shots.
    #[arg(long)]
    pub shots: Option<usize>,
}

pub fn simulate(args: &SimulateArgs, ctx: &Context) -> Outcome {
    let circuit = load_circuit(&args.circuit)?;
    let n = circuit.n_qubits();
    let state = run(&circuit, &Statevector::zero(n)?)?;
    if let Some(text) = &args.observable {
        let obs = Observable::parse(text, n)?;
        let mut r = Report::new("simulate", ctx.seed, args, &["observable", "value"]);
        r.row(vec![json!(text), num(state.expectation(&obs)?)]);
        return Ok(r);
    }
    if let Some(shots) = args.shots {
        let mut r = Report::new("simulate", ctx.seed, args, &["bitstring", "count"]);
        for (b, c) in state.sample_counts(shots, ctx.seed)? {
            r.row(vec![json!(bitstring(b, n)), json!(c)]);
        }
        return Ok(r);
    }
    let mut r = Report::new("simulate", ctx.seed, args, &["bitstring", "re", "im", "probability"]);
    for (b, a) in state.amplitudes().iter().enumerate() {
        r.row(vec![json!(bitstring(b, n)), num(a.re), num(a.im), num(a.norm_sqr())]);
    }
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct TrotterArgs {
    /// Chain length.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Evolution time.
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    /// Step counts to tabulate.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 4, 8, 16])]
    pub steps: Vec<usize>,
    /// Product-formula order (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub order: u32,
    /// Pick the step count from the first-order bound instead.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Write the circuit for the last step count here.
    #[arg(long)]
    pub emit_circuit: Option<PathBuf>,
}

/// Largest chain for which the CLI reports the dense operator error.
const MAX_OPERATOR_ERROR_QUBITS: usize = 8;

pub fn trotter(args: &TrotterArgs, ctx: &Context) -> Outcome {
    let h = SpinChainHamiltonian::random(args.n, ctx.seed)?;
    let order = TrotterOrder::try_from(args.order)?;
    let steps = match args.epsilon {
        Some(eps) => vec![h.choose_steps(args.time, eps)?],
        None => args.steps.clone(),
    };
    let mut r = Report::new(
        "trotter",
        ctx.seed,
        args,
        &["steps", "order", "cnots", "two_qubit_layers", "depth", "bound_order1", "operator_error"],
    );
    let mut last = None;
    for &s in &steps {
        let c = h.trotter_circuit(args.time, s, order)?;
        let err = if args.n <= MAX_OPERATOR_ERROR_QUBITS {
            Some(h.operator_error(&c, args.time)?)
        } else {
            None
        };
        r.row(vec![
            json!(s),
            json!(order.as_u32()),
            json!(cnot_count(&c)),
            json!(c.two_qubit_layer_count()),
            json!(c.depth()),
            num(h.trotter_bound_order1(args.time, s)),
            opt(err),
        ]);
        last = Some(c);
    }
    if let (Some(path), Some(c)) = (&args.emit_circuit, last) {
        write(path, &circuit_io::serialize(&c)?)?;
    }
    let fields: Vec<String> = h.fields().iter().map(|f| format!("{f:.6}")).collect();
    r.note(format!("fields: {}", fields.join(" ")));
    r.note("reference: 100 sites with a randomized product formula need about 1e7 CNOTs (not reproduced)");
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct NoiseLearnArgs {
    /// Planted model (JSON). Without it a random line-local model is drawn from the seed.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Generators in the random planted model.
    #[arg(long, default_value_t = 12)]
    pub generators: usize,
    #[arg(long, default_value_t = 0.02)]
    pub max_rate: f64,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DEPTHS.to_vec())]
    pub depths: Vec<usize>,
    /// Shots per (probe, depth); 0 means exact expectations.
    #[arg(long, default_value_t = 0)]
    pub shots: usize,
    /// Write the learned model here.
    #[arg(long)]
    pub emit_model: Option<PathBuf>,
}

pub fn noise_learn(args: &NoiseLearnArgs, ctx: &Context) -> Outcome {
    let planted = match &args.model {
        Some(p) => PauliLindbladModel::from_json(&read(p)?)?,
        None => planted_line_model(args.n, args.generators, args.max_rate, ctx.seed)?,
    };
    let n = planted.n_qubits();
    let probes = default_probe_set(n, &line_edges(n))?;
    let mode = if args.shots == 0 {
        DecayMode::Exact
    } else {
        DecayMode::Shots {
            shots: args.shots,
            seed: ctx.seed,
        }
    };
    let data = synthesize_decay(&planted, &probes, &args.depths, mode)?;
    let candidates: Vec<PauliString> = planted.generators().iter().map(|(p, _)| p.clone()).collect();
    let learned = learn_rates(&data, &candidates)?;
    let mut r = Report::new(
        "noise-learn",
        ctx.seed,
        args,
        &["generator", "planted_rate", "learned_rate", "relative_error"],
    );
    for ((p, truth), (_, est)) in planted.generators().iter().zip(learned.model.generators()) {
        let rel = if *truth > 0.0 { Some((est - truth).abs() / truth) } else { None };
        r.row(vec![json!(p.to_string()), num(*truth), num(*est), opt(rel)]);
    }
    if let Some(path) = &args.emit_model {
        write(path, &learned.model.to_json())?;
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Analytic,
    Shot,
}

impl From<ModeArg> for EstimatorMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Analytic => EstimatorMode::AnalyticTrajectory,
            ModeArg::Shot => EstimatorMode::Shot,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct PecArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    /// Noise model JSON; give one per two-qubit layer or one for all layers.
    #[arg(long, required = true)]
    pub noise: Vec<PathBuf>,
    #[arg(long)]
    pub observable: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    pub mode: ModeArg,
    /// Target precision for the reported sampling overhead.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
}

pub fn pec(args: &PecArgs, ctx: &Context) -> Outcome {
    let circuit = load_circuit(&args.circuit)?;
    let models = load_models(&args.noise, &circuit)?;
    let obs = Observable::parse(&args.observable, circuit.n_qubits())?;
    let cfg = SamplingConfig {
        samples: args.samples,
        seed: ctx.seed,
        mode: args.mode.into(),
        workers: ctx.workers,
    };
    let mitigated = pec_estimate(&circuit, &models, &obs, &cfg)?;
    let noisy = noisy_estimate(&circuit, &models, &obs, &cfg)?;
    let ideal = ideal_expectation(&circuit, &obs)?;
    let mut r = Report::new(
        "pec",
        ctx.seed,
        args,
        &["estimator", "value", "std_error", "samples", "gamma_total"],
    );
    r.row(vec![json!("ideal"), num(ideal), Value::Null, Value::Null, Value::Null]);
    for (name, e) in [("noisy", &noisy), ("pec", &mitigated)] {
        r.row(vec![json!(name), num(e.value), num(e.std_error), json!(e.samples), num(e.gamma_total)]);
    }
    r.note(format!(
        "sampling overhead at epsilon {}: {}",
        args.epsilon,
        crate::output::format_number(sampling_overhead(&models, args.epsilon)?)
    ));
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct ZneArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long, required = true)]
    pub noise: Vec<PathBuf>,
    #[arg(long)]
    pub observable: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 3.0])]
    pub scales: Vec<f64>,
    /// Polynomial degree of the extrapolation.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
}

pub fn zne(args: &ZneArgs, ctx: &Context) -> Outcome {
    let circuit = load_circuit(&args.circuit)?;
    let models = load_models(&args.noise, &circuit)?;
    let obs = Observable::parse(&args.observable, circuit.n_qubits())?;
    let res = zne_estimate(&circuit, &models, &obs, &args.scales, args.order)?;
    let mut r = Report::new("zne", ctx.seed, args, &["estimator", "scale", "value"]);
    for (c, v) in res.scale_factors.iter().zip(&res.noisy_values) {
        r.row(vec![json!("noisy"), num(*c), num(*v)]);
    }
    r.row(vec![json!("extrapolated"), num(0.0), num(res.value)]);
    r.row(vec![json!("ideal"), num(0.0), num(ideal_expectation(&circuit, &obs)?)]);
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct CutArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    /// Cut location `qubit@layer`: the wire is cut just before that layer.
    #[arg(long = "cut", required = true)]
    pub cuts: Vec<String>,
    #[arg(long)]
    pub observable: String,
    /// Sample terms instead of enumerating them.
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn cut(args: &CutArgs, ctx: &Context) -> Outcome {
    let circuit = load_circuit(&args.circuit)?;
    let cuts = args
        .cuts
        .iter()
        .map(|c| c.parse::<CutPoint>())
        .collect::<qcsc::Result<Vec<_>>>()?;
    let obs = Observable::parse(&args.observable, circuit.n_qubits())?;
    let plan = plan_wire_cut(&circuit, &cuts)?;
    let mode = match args.samples {
        Some(samples) => KnitMode::Sampled {
            samples,
            seed: ctx.seed,
        },
        None => KnitMode::ExactEnumeration,
    };
    let res = execute_plan(&plan, &obs, mode, ctx.workers)?;
    let mut r = Report::new(
        "cut",
        ctx.seed,
        args,
        &["value", "std_error", "terms", "gamma_cut", "subcircuits", "max_width", "uncut"],
    );
    r.row(vec![
        num(res.value),
        opt(res.std_error),
        json!(res.terms),
        num(res.gamma_cut),
        json!(plan.subcircuits().len()),
        json!(plan.max_width()),
        num(ideal_expectation(&circuit, &obs)?),
    ]);
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct VarqteArgs {
    /// Hamiltonian as a Pauli sum, e.g. `ZZ` or `XI,0.5*ZZ`.
    #[arg(long, conflicts_with = "heisenberg")]
    pub hamiltonian: Option<String>,
    /// Use the Heisenberg chain of this length with fields drawn from the seed.
    #[arg(long)]
    pub heisenberg: Option<usize>,
    /// Rotation generators, one parameter each; omitted means a hardware-efficient ansatz.
    #[arg(long, value_delimiter = ',')]
    pub generators: Option<Vec<String>>,
    /// Start the generator ansatz from |+…+⟩.
    #[arg(long)]
    pub hadamard: bool,
    /// Entangling layers of the hardware-efficient ansatz.
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    /// Initial parameters; default zeros for generators, seeded uniform angles otherwise.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta0: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// `mclachlan` or `tdvp`.
    #[arg(long, default_value = "mclachlan")]
    pub method: String,
    #[arg(long, default_value_t = 1e-6)]
    pub regularization: f64,
    #[arg(long, default_value_t = 1.0)]
    pub max_residual: f64,
}

fn label_width(text: &str) -> usize {
    let first = text.split(',').next().unwrap_or("");
    let label = first.rsplit('*').next().unwrap_or("");
    label.trim().chars().count()
}

pub fn varqte(args: &VarqteArgs, ctx: &Context) -> Outcome {
    let h = match (&args.hamiltonian, args.heisenberg) {
        (Some(text), _) => Observable::parse(text, label_width(text))?,
        (None, Some(n)) => SpinChainHamiltonian::random(n, ctx.seed)?.observable(),
        (None, None) => {
            return Err(qcsc::Error::InvalidArgument("give --hamiltonian or --heisenberg".into()).into());
        }
    };
    let n = h.n_qubits();
    let (ansatz, default_theta) = match &args.generators {
        Some(labels) => {
            let mut a = Ansatz::new(n);
            if args.hadamard {
                for q in 0..n {
                    a.fixed(qcsc::Gate::H, &[q])?;
                }
            }
            for l in labels {
                a.rotation(PauliString::parse(l.trim(), n)?)?;
            }
            let k = a.n_params();
            (a, vec![0.0; k])
        }
        None => {
            let a = Ansatz::hardware_efficient(n, args.layers)?;
            let mut rng = qcsc::rng::stream(ctx.seed, 1);
            let theta = (0..a.n_params())
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            (a, theta)
        }
    };
    let theta0 = args.theta0.clone().unwrap_or(default_theta);
    let cfg = EvolveConfig {
        t_final: args.time,
        dt: args.dt,
        method: args.method.parse::<VarQteMethod>()?,
        regularization: args.regularization,
        cutoff: 1e-10,
        max_residual: args.max_residual,
    };
    let tr = evolve(&ansatz, &theta0, &h, &cfg)?;
    let mut columns = vec!["t".to_string()];
    columns.extend((0..ansatz.n_params()).map(|k| format!("theta_{k}")));
    columns.push("residual".into());
    columns.push("fidelity".into());
    let mut r = Report::new("varqte", ctx.seed, args, &[]);
    r.columns = columns;
    for (k, t) in tr.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(tr.thetas[k].iter().map(|v| num(*v)));
        row.push(num(tr.residuals[k]));
        row.push(opt(tr.fidelities.as_ref().map(|f| f[k])));
        r.row(row);
    }
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateFtArgs {
    /// Logical CNOT count.
    #[arg(long, default_value_t = 1e7)]
    pub n_cnot: f64,
    /// Logical T count.
    #[arg(long, default_value_t = 1e9)]
    pub n_t: f64,
    /// Circuit size used in the fits; defaults to the CNOT plus T count.
    #[arg(long)]
    pub size: Option<f64>,
}

pub fn estimate_ft(args: &EstimateFtArgs, ctx: &Context) -> Outcome {
    let rep = ft_report(args.n_cnot, args.n_t, args.size)?;
    let mut r = Report::new(
        "estimate-ft",
        ctx.seed,
        args,
        &["gate", "count", "volume_per_gate", "total_volume"],
    );
    r.row(vec![json!("cnot"), num(rep.n_cnot), num(rep.cnot_volume), num(rep.total_cnot_volume)]);
    r.row(vec![json!("t"), num(rep.n_t), num(rep.t_volume), num(rep.total_t_volume)]);
    r.row(vec![json!("total"), num(rep.n_cnot + rep.n_t), Value::Null, num(rep.total())]);
    r.note(format!("fits evaluated at circuit size N = {}", crate::output::format_number(rep.n)));
    r.note("volumes assume ideal logical fidelity; a target circuit fidelity such as 0.999 raises them");
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct ScaleArgs {
    /// Qubits per chip.
    #[arg(long)]
    pub q: u64,
    /// Chips per QPU.
    #[arg(long, default_value_t = 1)]
    pub m: u64,
    /// Microwave-linked QPUs.
    #[arg(long, default_value_t = 1)]
    pub l: u64,
    /// Optically linked groups.
    #[arg(long, default_value_t = 1)]
    pub t: u64,
    /// Classical parallelization factor.
    #[arg(long, default_value_t = 1)]
    pub p: u64,
}

pub fn scale(args: &ScaleArgs, ctx: &Context) -> Outcome {
    let sys = ModularSystem {
        q: args.q,
        m: args.m,
        l: args.l,
        t: args.t,
        p: args.p,
    };
    let n = modular_scale(&sys)?;
    let mut r = Report::new("scale", ctx.seed, args, &["q", "m", "l", "t", "p", "n"]);
    r.row(vec![json!(sys.q), json!(sys.m), json!(sys.l), json!(sys.t), json!(sys.p), json!(n)]);
    Ok(r)
}

#[derive(Debug, Args, Serialize)]
pub struct OverheadArgs {
    /// Qubits.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Trotter step counts.
    #[arg(long, value_delimiter = ',', default_values_t = vec![100, 1000])]
    pub steps: Vec<usize>,
    /// Per-qubit error rates; default 1e-6 … 1e-3 at four points per decade.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 6)]
    pub layers_per_step: usize,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
}

pub fn overhead(args: &OverheadArgs, ctx: &Context) -> Outcome {
    let grid = args
        .lambdas
        .clone()
        .unwrap_or_else(|| (0..=12).map(|k| 10f64.powf(-6.0 + k as f64 / 4.0)).collect());
    let rows = overhead_table(args.n, &args.steps, &grid, args.layers_per_step, args.epsilon)?;
    let mut r = Report::new(
        "overhead-table",
        ctx.seed,
        args,
        &["lambda", "steps", "layers", "instances", "days", "feasible"],
    );
    for row in &rows {
        let days = row.instances * REPETITION_TIME_S / 86_400.0;
        r.row(vec![
            num(row.lambda),
            json!(row.steps),
            json!(row.layers),
            num(row.instances),
            num(days),
            json!(row.instances <= DAILY_CIRCUIT_BUDGET),
        ]);
    }
    for &s in &args.steps {
        let lambda = crossing_lambda(args.n, s * args.layers_per_step, args.epsilon, DAILY_CIRCUIT_BUDGET);
        r.note(format!(
            "steps {s}: instances reach 1e8 at lambda = {}",
            crate::output::format_number(lambda)
        ));
    }
    r.note(format!(
        "reference: 1e8 circuits at 1 ms each take {:.3} days",
        DAILY_CIRCUIT_BUDGET * REPETITION_TIME_S / 86_400.0
    ));
    Ok(r)
}
