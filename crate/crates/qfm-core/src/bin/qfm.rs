//! Command-line front end: seeded, reproducible runs of the library's
//! simulation, spectral-analysis, entanglement, and pulse-control routines,
//! each emitting a JSON report.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use qfm_core::ansatz::ansatz_by_name;
use qfm_core::draw::draw_text;
use qfm_core::fourier::{fcc, fft_coefficients, fingerprint, generate_dataset};
use qfm_core::metrics::{
    entangling_capability, expressibility_kl, EntanglementConfig, EntanglementMeasure,
    ExpressibilityConfig,
};
use qfm_core::model::{
    forward, init_params, EncodingScheme, EncodingStrategy, ExecutionRequest, InitStrategy, Model,
    OutputMode,
};
use qfm_core::pulse::{
    analytic_calibration, circuit_state_infidelity, schedule_circuit, Calibration, Frame,
    HamiltonianSpec,
};
use qfm_core::qoc::{calibrate_basis, CostSpec, OptimizerConfig, StageConfig};
use qfm_core::quantum::GateKind;
use qfm_core::report::Report;
use qfm_core::rng::RngStream;
use qfm_core::pulse::EnvelopeKind;
use qfm_core::QfmError;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "qfm", version, about = "Quantum Fourier models at gate and pulse level")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    qubits: Option<usize>,
    #[arg(long, global = true)]
    layers: Option<usize>,
    #[arg(long, global = true)]
    ansatz: Option<String>,
    /// hamming | binary | ternary
    #[arg(long, global = true)]
    encoding: Option<String>,
    /// mw | bm | ef | ce
    #[arg(long, global = true)]
    measure: Option<String>,
    /// Per-gate depolarizing probability.
    #[arg(long, global = true)]
    noise: Option<f64>,
    #[arg(long, global = true)]
    shots: Option<u64>,
    /// Calibration JSON: written by `qoc`, read by `pulse-sim`.
    #[arg(long, global = true)]
    calibration: Option<PathBuf>,
    #[arg(long, global = true)]
    bins: Option<usize>,
    #[arg(long, global = true)]
    pairs: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the model expectation at a fixed input.
    Simulate,
    /// Exact Fourier coefficients of the model via DFT on the spectrum grid.
    Coefficients,
    /// Fourier coefficient correlation over random parameter draws.
    Fcc,
    /// KL-divergence expressibility against the Haar baseline.
    Expressibility,
    /// Entangling capability under the chosen measure.
    Entanglement,
    /// Calibrate the pulse basis gates by optimal control.
    Qoc,
    /// Compile a model circuit to pulses and report the infidelity.
    PulseSim,
    /// Draw a random truncated Fourier series dataset from the model spectrum.
    Dataset,
    /// Text diagram of the model circuit.
    Draw,
    /// Wall-clock scaling of expressibility and FCC.
    Bench,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Coefficients => "coefficients",
            Command::Fcc => "fcc",
            Command::Expressibility => "expressibility",
            Command::Entanglement => "entanglement",
            Command::Qoc => "qoc",
            Command::PulseSim => "pulse-sim",
            Command::Dataset => "dataset",
            Command::Draw => "draw",
            Command::Bench => "bench",
        }
    }
}

/// Flat settings with defaults; file values override defaults, flags
/// override the file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct Settings {
    seed: u64,
    qubits: usize,
    layers: usize,
    ansatz: String,
    encoding: String,
    measure: String,
    noise: f64,
    shots: Option<u64>,
    bins: usize,
    pairs: usize,
    samples: usize,
    /// Input vector for simulate / pulse-sim / draw.
    x: Vec<f64>,
    /// zeros | pi | uniform
    init: String,
    /// Dataset point count.
    points: usize,
    /// QOC envelope kind for the driven rotations.
    envelope: String,
    omega_q: f64,
    #[serde(rename = "J")]
    j: f64,
    /// rwa | lab
    frame: String,
    /// Bench sweep.
    bench_qubits: Vec<usize>,
    bench_repeats: usize,
    /// QOC budget overrides (defaults match the optimizer defaults).
    qoc_total_steps: usize,
    qoc_warmup_steps: usize,
    qoc_grid_points: usize,
    qoc_refine_steps: usize,
    qoc_restarts: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            seed: 0,
            qubits: 2,
            layers: 1,
            ansatz: "NEA".to_string(),
            encoding: "hamming".to_string(),
            measure: "mw".to_string(),
            noise: 0.0,
            shots: None,
            bins: 75,
            pairs: 10_000,
            samples: 50,
            x: vec![0.0],
            init: "zeros".to_string(),
            points: 64,
            envelope: "rectangle".to_string(),
            omega_q: 10.0 * std::f64::consts::PI,
            j: std::f64::consts::PI,
            frame: "rwa".to_string(),
            bench_qubits: vec![2, 3, 4, 5, 6],
            bench_repeats: 5,
            qoc_total_steps: OptimizerConfig::default().total_steps,
            qoc_warmup_steps: OptimizerConfig::default().warmup_steps,
            qoc_grid_points: StageConfig::default().grid_points_per_param,
            qoc_refine_steps: StageConfig::default().refine_steps,
            qoc_restarts: StageConfig::default().n_restarts,
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<QfmError> for CliError {
    fn from(e: QfmError) -> Self {
        match e {
            QfmError::InvalidConfig(_)
            | QfmError::InvalidParameter(_)
            | QfmError::UnknownAnsatz(_)
            | QfmError::UnknownGate(_)
            | QfmError::UncalibratedGate(_)
            | QfmError::WrongParamCount { .. }
            | QfmError::WireOutOfRange { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn merge_settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut s = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?
        }
        None => Settings::default(),
    };
    if let Some(v) = cli.seed {
        s.seed = v;
    }
    if let Some(v) = cli.qubits {
        s.qubits = v;
    }
    if let Some(v) = cli.layers {
        s.layers = v;
    }
    if let Some(v) = &cli.ansatz {
        s.ansatz = v.clone();
    }
    if let Some(v) = &cli.encoding {
        s.encoding = v.clone();
    }
    if let Some(v) = &cli.measure {
        s.measure = v.clone();
    }
    if let Some(v) = cli.noise {
        s.noise = v;
    }
    if let Some(v) = cli.shots {
        s.shots = Some(v);
    }
    if let Some(v) = cli.bins {
        s.bins = v;
    }
    if let Some(v) = cli.pairs {
        s.pairs = v;
    }
    if let Some(v) = cli.samples {
        s.samples = v;
    }
    Ok(s)
}

fn parse_encoding(name: &str) -> Result<EncodingStrategy, CliError> {
    let scheme = match name {
        "hamming" => EncodingScheme::Hamming,
        "binary" => EncodingScheme::Binary,
        "ternary" => EncodingScheme::Ternary,
        other => {
            return Err(CliError::Config(format!(
                "unknown encoding '{other}' (expected hamming, binary, or ternary)"
            )))
        }
    };
    Ok(EncodingStrategy::new(scheme, GateKind::RX)?)
}

fn parse_init(name: &str) -> Result<InitStrategy, CliError> {
    match name {
        "zeros" => Ok(InitStrategy::Zeros),
        "pi" => Ok(InitStrategy::Pi),
        "uniform" => Ok(InitStrategy::Uniform {
            lo: 0.0,
            hi: 2.0 * std::f64::consts::PI,
        }),
        other => Err(CliError::Config(format!(
            "unknown init strategy '{other}' (expected zeros, pi, or uniform)"
        ))),
    }
}

fn parse_frame(name: &str) -> Result<Frame, CliError> {
    match name {
        "rwa" => Ok(Frame::Rwa),
        "lab" => Ok(Frame::Lab),
        other => Err(CliError::Config(format!(
            "unknown frame '{other}' (expected rwa or lab)"
        ))),
    }
}

fn build_model(s: &Settings) -> Result<Model, CliError> {
    let ansatz = ansatz_by_name(&s.ansatz, s.qubits)?;
    let encoding = parse_encoding(&s.encoding)?;
    Ok(Model::standard(s.qubits, s.layers, ansatz, encoding)?)
}

fn model_params(
    s: &Settings,
    model: &Model,
    rng: &mut RngStream,
) -> Result<ndarray::Array2<f64>, CliError> {
    Ok(init_params(
        parse_init(&s.init)?,
        model.param_shape(),
        rng,
    )?)
}

fn hamiltonian(s: &Settings) -> Result<HamiltonianSpec, CliError> {
    let h = HamiltonianSpec {
        omega_q: s.omega_q,
        j: s.j,
        frame: parse_frame(&s.frame)?,
    };
    h.validate()?;
    Ok(h)
}

fn load_calibration(s: &Settings, path: &Option<PathBuf>) -> Result<Calibration, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", p.display())))?;
            Ok(Calibration::from_json(&text)?)
        }
        None => Ok(analytic_calibration(hamiltonian(s)?, s.seed)),
    }
}

fn complex_pairs(zs: &[num_complex::Complex64]) -> Vec<[f64; 2]> {
    zs.iter().map(|z| [z.re, z.im]).collect()
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let s = merge_settings(cli)?;
    let config_echo = serde_json::to_value(&s).expect("settings serialize");
    let started = Instant::now();
    let mut extra_timings = BTreeMap::new();
    let results = match &cli.command {
        Command::Simulate => {
            let model = build_model(&s)?;
            let mut rng = RngStream::from_seed(s.seed).split("params");
            let params = model_params(&s, &model, &mut rng)?;
            let request = ExecutionRequest {
                mode: OutputMode::Expval,
                shots: s.shots,
                noise_p: s.noise,
            };
            let mut shot_rng = RngStream::from_seed(s.seed).split("shots");
            let out = forward(&model, &s.x, &params, &request, &mut shot_rng)?;
            json!({
                "expval": out.expval()?,
                "x": s.x,
                "noise_p": s.noise,
                "shots": s.shots,
            })
        }
        Command::Coefficients => {
            let model = build_model(&s)?;
            let mut rng = RngStream::from_seed(s.seed).split("params");
            let params = model_params(&s, &model, &mut rng)?;
            let coeffs = fft_coefficients(&model, &params, s.x.len().max(1))?;
            let labels: Vec<Vec<f64>> = (0..coeffs.len()).map(|i| coeffs.label(i)).collect();
            json!({
                "frequencies": labels,
                "coefficients": complex_pairs(&coeffs.coefficients),
            })
        }
        Command::Fcc => {
            let model = build_model(&s)?;
            let root = RngStream::from_seed(s.seed);
            let param_sets: Vec<_> = (0..s.samples.max(2))
                .map(|i| {
                    let mut rng = root.split_index(i as u64);
                    init_params(
                        InitStrategy::Uniform {
                            lo: 0.0,
                            hi: 2.0 * std::f64::consts::PI,
                        },
                        model.param_shape(),
                        &mut rng,
                    )
                })
                .collect::<Result<_, _>>()?;
            let fp = fingerprint(&model, &param_sets, s.x.len().max(1))?;
            json!({
                "fcc": fcc(&fp, false),
                "fcc_normalized": fcc(&fp, true),
                "n_samples": param_sets.len(),
                "n_frequencies": fp.labels.len(),
            })
        }
        Command::Expressibility => {
            let model = build_model(&s)?;
            let cfg = ExpressibilityConfig {
                n_pairs: s.pairs,
                n_bins: s.bins,
                seed: s.seed,
            };
            let kl = expressibility_kl(&model, &cfg)?;
            json!({
                "kl_divergence": kl,
                "n_bins": s.bins,
                "n_pairs": s.pairs,
            })
        }
        Command::Entanglement => {
            let model = build_model(&s)?;
            let cfg = EntanglementConfig {
                measure: EntanglementMeasure::parse(&s.measure)?,
                n_samples: s.samples,
                noise_p: s.noise,
                shots: s.shots,
                ce_subset: Vec::new(),
            };
            let root = RngStream::from_seed(s.seed);
            let (mean, std) = entangling_capability(&model, &cfg, &root)?;
            json!({
                "measure": s.measure,
                "mean": mean,
                "std": std,
                "n_samples": s.samples,
                "noise_p": s.noise,
                "seed": s.seed,
            })
        }
        Command::Qoc => {
            let h = hamiltonian(&s)?;
            let envelope = EnvelopeKind::parse(&s.envelope)?;
            let opt = OptimizerConfig {
                total_steps: s.qoc_total_steps,
                warmup_steps: s.qoc_warmup_steps,
                ..OptimizerConfig::default()
            };
            let stage = StageConfig {
                grid_points_per_param: s.qoc_grid_points,
                refine_steps: s.qoc_refine_steps,
                n_restarts: s.qoc_restarts,
                ..StageConfig::default()
            };
            let cal = calibrate_basis(h, envelope, &CostSpec::default(), &opt, &stage, s.seed)?;
            if let Some(path) = &cli.calibration {
                std::fs::write(path, cal.to_json())
                    .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
            }
            serde_json::to_value(&cal).expect("calibration serialize")
        }
        Command::PulseSim => {
            let model = build_model(&s)?;
            let mut rng = RngStream::from_seed(s.seed).split("params");
            let params = model_params(&s, &model, &mut rng)?;
            let circuit = model.build_circuit(&s.x, &params)?;
            let cal = load_calibration(&s, &cli.calibration)?;
            let schedule = schedule_circuit(&circuit, &cal)?;
            let infidelity = circuit_state_infidelity(&circuit, &cal, 1e-10, 1e-10)?;
            json!({
                "infidelity": infidelity,
                "duration": schedule.duration,
                "n_segments": schedule.segments.len(),
                "n_gates": circuit.gates.len(),
                "non_basis_gates": circuit.non_basis_gate_count(),
                "schedule": serde_json::to_value(&schedule).expect("schedule serialize"),
            })
        }
        Command::Dataset => {
            let model = build_model(&s)?;
            let spectrum = model
                .spectrum(1)?
                .into_iter()
                .next()
                .ok_or_else(|| CliError::Numerical("model has no spectrum".to_string()))?;
            let mut rng = RngStream::from_seed(s.seed).split("dataset");
            let ds = generate_dataset(
                &spectrum,
                s.points,
                (0.0, 2.0 * std::f64::consts::PI),
                &mut rng,
            )?;
            json!({
                "frequencies": spectrum.frequencies,
                "coefficients": complex_pairs(&ds.coefficients.coefficients),
                "x": ds.points.iter().map(|p| p.0).collect::<Vec<_>>(),
                "y": ds.points.iter().map(|p| p.1).collect::<Vec<_>>(),
            })
        }
        Command::Draw => {
            let model = build_model(&s)?;
            let mut rng = RngStream::from_seed(s.seed).split("params");
            let params = model_params(&s, &model, &mut rng)?;
            let circuit = model.build_circuit(&s.x, &params)?;
            json!({ "text": draw_text(&circuit) })
        }
        Command::Bench => {
            let (value, timings) = bench(&s)?;
            extra_timings = timings;
            value
        }
    };
    let elapsed = started.elapsed().as_secs_f64();
    let out_path = cli.out.clone();
    let mut report = Report::new(cli.command.name(), config_echo, s.seed, results)
        .with_timing("total", elapsed);
    report.timings.extend(extra_timings);
    if let Some(path) = &out_path {
        std::fs::write(path, report.to_json())
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    }
    Ok(report)
}

/// Fig. 7-style scaling sweep: per (metric, n, L), the mean and standard
/// error of the wall-clock time over repeats, at 50 parameter samples.
/// Measured seconds go into the report's timings section so the results
/// payload stays deterministic.
fn bench(s: &Settings) -> Result<(serde_json::Value, BTreeMap<String, f64>), CliError> {
    let encoding = parse_encoding(&s.encoding)?;
    let mut points = Vec::new();
    let mut timings = BTreeMap::new();
    for &n in &s.bench_qubits {
        let mut tasks: Vec<(&str, usize)> = vec![("expressibility", 1)];
        tasks.push(("fcc", 1));
        tasks.push(("fcc", 3));
        for (metric, layers) in tasks {
            let ansatz = ansatz_by_name(&s.ansatz, n)?;
            let model = Model::standard(n, layers, ansatz, encoding.clone())?;
            let mut durations = Vec::with_capacity(s.bench_repeats);
            for rep in 0..s.bench_repeats.max(1) {
                let t0 = Instant::now();
                match metric {
                    "expressibility" => {
                        let cfg = ExpressibilityConfig {
                            n_pairs: s.samples,
                            n_bins: s.bins,
                            seed: s.seed ^ rep as u64,
                        };
                        expressibility_kl(&model, &cfg)?;
                    }
                    _ => {
                        let root = RngStream::from_seed(s.seed ^ rep as u64);
                        let param_sets: Vec<_> = (0..s.samples.max(2))
                            .map(|i| {
                                let mut rng = root.split_index(i as u64);
                                init_params(
                                    InitStrategy::Uniform {
                                        lo: 0.0,
                                        hi: 2.0 * std::f64::consts::PI,
                                    },
                                    model.param_shape(),
                                    &mut rng,
                                )
                            })
                            .collect::<Result<_, _>>()?;
                        let fp = fingerprint(&model, &param_sets, 1)?;
                        fcc(&fp, false);
                    }
                }
                durations.push(t0.elapsed().as_secs_f64());
            }
            let reps = durations.len() as f64;
            let mean = durations.iter().sum::<f64>() / reps;
            let stderr = if durations.len() > 1 {
                let var = durations.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
                    / (reps - 1.0);
                (var / reps).sqrt()
            } else {
                0.0
            };
            let key = format!("{metric}/n={n}/L={layers}");
            timings.insert(format!("{key}/mean_seconds"), mean);
            timings.insert(format!("{key}/stderr_seconds"), stderr);
            points.push(json!({
                "metric": metric,
                "n_qubits": n,
                "n_layers": layers,
                "n_samples": s.samples,
                "repeats": s.bench_repeats,
                "timing_key": key,
            }));
        }
    }
    Ok((json!({ "points": points }), timings))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.out.is_none() {
                println!("{}", report.to_json());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
