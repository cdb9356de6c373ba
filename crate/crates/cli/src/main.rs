//! `superres`: generate clustered spike signals, sample and recover them,
//! build adversarial pairs, run oracle sweeps and experiment batches.
//!
//! Every command resolves its configuration from built-in defaults, an
//! optional `--config` JSON file (a plain config or a run manifest) and the
//! command-line flags, in that order of precedence, and records the result in
//! a manifest next to its outputs.

mod config;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use superres_core::adversarial::{
    build_adversarial_pair, taylor_domination_check, AdversarialPair, TaylorReport,
};
use superres_core::experiments::{
    amplification_svg, node_rows, read_trials_csv, run_sweep, summarize_amplification,
    write_summary_csv, write_trials_csv, AmplificationSummary, EpsilonRule, ExperimentConfig,
    Factor, NodeRow,
};
use superres_core::model::{
    make_cluster_signal, sample_measurement, AmplitudeSource, ClusterSpec, Measurement, NoiseModel,
};
use superres_core::oracle::{diameter_epsilon_scaling, write_diameter_csv, BoxRule, OracleConfig};
use superres_core::parallel::with_workers;
use superres_core::pencil::recover;
use superres_core::{Execution, MeasurementGrid, SpikeSignal};

use config::{resolve, CliError};
use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "superres", version, about = "Spike super-resolution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a positive clustered spike signal.
    Generate(GenerateArgs),
    /// Sample a signal's Fourier transform on an equispaced grid, with noise.
    Sample(SampleArgs),
    /// Recover d spikes from a measurement with the Matrix Pencil method.
    Recover(RecoverArgs),
    /// Build a moment-matched adversarial pair for a clustered signal.
    Adversarial(AdversarialArgs),
    /// Brute-force error-set diameters over a list of noise levels.
    Oracle(OracleArgs),
    /// Run a seeded SRF sweep and summarize error amplification.
    Experiment(ExperimentArgs),
    /// Summarize trial CSVs written by `experiment`.
    Report(ReportArgs),
}

/// Cluster geometry flags, merged into the `spec` object of the config.
#[derive(Args, Serialize, Default)]
struct SpecArgs {
    /// Number of spikes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    /// Number of spikes in the cluster.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    /// Cluster diameter bound h.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    /// Minimal cluster spacing as a fraction of h.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    /// Minimal non-cluster separation as a fraction of T.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    /// Overall support bound T.
    #[arg(long = "big-t")]
    #[serde(skip_serializing_if = "Option::is_none")]
    big_t: Option<f64>,
    /// 1-based index of the first cluster node.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<usize>,
    /// Lower amplitude bound m.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m_lower: Option<f64>,
    /// Upper amplitude bound M.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m_upper: Option<f64>,
    /// Centre the cluster on the origin.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    centered: Option<bool>,
}

#[derive(Args)]
struct Common {
    /// JSON config or run manifest; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (JSON). Printed to stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct GenerateArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    spec: SpecArgs,
    /// JSON file holding a cluster spec.
    #[arg(long = "spec")]
    #[serde(skip)]
    spec_file: Option<PathBuf>,
    /// Fixed amplitudes (comma separated); uniform in [m, M] otherwise.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<f64>>,
    #[arg(long, env = "SUPERRES_SEED")]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Signal JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    /// Cutoff frequency Ω.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    /// Number of samples N on [−Ω, Ω].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_samples: Option<usize>,
    /// Noise level ε.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    /// Noise model: none or uniform_disk.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<String>,
    #[arg(long, env = "SUPERRES_SEED")]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct RecoverArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Measurement JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    /// Model order (number of spikes).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
}

#[derive(Args, Serialize)]
struct AdversarialArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Signal JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecArgs,
    /// JSON file holding a cluster spec.
    #[arg(long = "spec")]
    #[serde(skip)]
    spec_file: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    /// Points of the verification grid on [−Ω, Ω].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_density: Option<usize>,
    /// Largest k of the Taylor domination check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    taylor_k_max: Option<usize>,
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Signal JSON (d <= 2).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    /// Increasing noise levels (comma separated).
    #[arg(long = "epsilon", value_delimiter = ',')]
    #[serde(rename = "epsilons", skip_serializing_if = "Option::is_none")]
    epsilon: Option<Vec<f64>>,
    /// Grid points per coordinate (at most 80).
    #[arg(long = "grid-density")]
    #[serde(rename = "resolution", skip_serializing_if = "Option::is_none")]
    grid_density: Option<usize>,
    /// Frequencies in the feasibility test.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    s_samples: Option<usize>,
    /// Amplitude half-width as a multiple of ε.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    amp_box_factor: Option<f64>,
    /// Node half-width as a multiple of ε/Ω.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    node_box_factor: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
}

#[derive(Args, Serialize)]
struct ExperimentArgs {
    /// JSON config or run manifest; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Directory for CSV, SVG and manifest outputs.
    #[arg(long)]
    #[serde(skip)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_samples: Option<usize>,
    /// Fixed noise level; replaces the rate-bound rule.
    #[arg(long, conflicts_with = "rate_c")]
    #[serde(skip)]
    epsilon: Option<f64>,
    /// Constant c of the rule ε ≤ c·(Ωτh)^(2p−1).
    #[arg(long)]
    #[serde(skip)]
    rate_c: Option<f64>,
    /// Trials per SRF.
    #[arg(long)]
    #[serde(rename = "n_trials", skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    /// SRF values (comma separated).
    #[arg(long, value_delimiter = ',')]
    #[serde(rename = "srf_sweep", skip_serializing_if = "Option::is_none")]
    srf_list: Option<Vec<f64>>,
    #[arg(long, env = "SUPERRES_SEED")]
    #[serde(rename = "base_seed", skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    quantile: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding trials_srf_*.csv, or a single trial CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    quantile: f64,
    /// Output directory (default: the input directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn default_spec() -> ClusterSpec {
    ClusterSpec {
        d: 3,
        p: 2,
        h: 0.05,
        big_t: 1.0,
        tau: 1.0,
        eta: 0.2,
        kappa: 1,
        m_lower: 1.0,
        m_upper: 2.0,
        centered: false,
    }
}

#[derive(Serialize, Deserialize)]
struct GenerateConfig {
    spec: ClusterSpec,
    amplitudes: Option<Vec<f64>>,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct SampleConfig {
    input: PathBuf,
    omega: f64,
    n_samples: usize,
    epsilon: f64,
    noise: NoiseModel,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct RecoverConfig {
    input: PathBuf,
    d: usize,
}

#[derive(Serialize, Deserialize)]
struct AdversarialConfig {
    input: PathBuf,
    spec: ClusterSpec,
    epsilon: f64,
    omega: f64,
    grid_density: usize,
    taylor_k_max: usize,
}

#[derive(Serialize, Deserialize)]
struct OracleCliConfig {
    input: PathBuf,
    omega: f64,
    epsilons: Vec<f64>,
    resolution: usize,
    s_samples: usize,
    amp_box_factor: f64,
    node_box_factor: f64,
}

#[derive(Serialize)]
struct AdversarialOutput {
    #[serde(flatten)]
    pair: AdversarialPair,
    taylor: TaylorReport,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn spec_overrides(spec: &SpecArgs, spec_file: &Option<PathBuf>) -> Result<Value, CliError> {
    let mut layer = match spec_file {
        Some(p) => read_json::<Value>(p)?,
        None => Value::Object(Default::default()),
    };
    config::merge(&mut layer, to_value(spec));
    Ok(layer)
}

/// Writes `value` as pretty JSON to `output` (with a manifest beside it) or
/// to stdout.
fn emit<T: Serialize>(
    value: &T,
    output: &Option<PathBuf>,
    mut manifest: RunManifest,
    start: Instant,
) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match output {
        Some(path) => {
            write_file(path, text.as_bytes())?;
            manifest.outputs.push(path.display().to_string());
            manifest.finish(start);
            write_file(&manifest::path_for(path), manifest.to_json().as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let defaults = to_value(&GenerateConfig {
        spec: default_spec(),
        amplitudes: None,
        seed: 0,
    });
    let mut flags = to_value(&args);
    flags["spec"] = spec_overrides(&args.spec, &args.spec_file)?;
    let (cfg, resolved): (GenerateConfig, _) = resolve(defaults, &args.common.config, flags)?;
    let source = match &cfg.amplitudes {
        Some(a) => AmplitudeSource::Fixed(a.clone()),
        None => AmplitudeSource::UniformRandom,
    };
    let signal = make_cluster_signal(&cfg.spec, &source, cfg.seed)?;
    let manifest = RunManifest::new("generate", resolved, Some(cfg.seed), vec![]);
    emit(&signal, &args.common.output, manifest, start)
}

fn sample(args: SampleArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let defaults = serde_json::json!({
        "omega": 20.0, "n_samples": 81, "epsilon": 0.0, "noise": "uniform_disk", "seed": 0
    });
    let (cfg, resolved): (SampleConfig, _) =
        resolve(defaults, &args.common.config, to_value(&args))?;
    let signal: SpikeSignal = read_json(&cfg.input)?;
    let grid = MeasurementGrid::new(cfg.omega, cfg.n_samples)?;
    let y = sample_measurement(&signal, &grid, cfg.epsilon, cfg.noise.as_noise(), cfg.seed)?;
    let manifest = RunManifest::new(
        "sample",
        resolved,
        Some(cfg.seed),
        vec![cfg.input.display().to_string()],
    );
    emit(&y, &args.common.output, manifest, start)
}

fn recover_cmd(args: RecoverArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let defaults = serde_json::json!({});
    let (cfg, resolved): (RecoverConfig, _) =
        resolve(defaults, &args.common.config, to_value(&args))?;
    let y: Measurement = read_json(&cfg.input)?;
    let result = recover(&y, cfg.d)?;
    let manifest = RunManifest::new(
        "recover",
        resolved,
        None,
        vec![cfg.input.display().to_string()],
    );
    emit(&result, &args.common.output, manifest, start)
}

fn adversarial(args: AdversarialArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let defaults = serde_json::json!({
        "spec": to_value(&default_spec()),
        "epsilon": 1e-6,
        "omega": 20.0,
        "grid_density": superres_core::adversarial::DEFAULT_GRID_DENSITY,
        "taylor_k_max": 40
    });
    let mut flags = to_value(&args);
    flags["spec"] = spec_overrides(&args.spec, &args.spec_file)?;
    let (cfg, resolved): (AdversarialConfig, _) = resolve(defaults, &args.common.config, flags)?;
    let signal: SpikeSignal = read_json(&cfg.input)?;
    let pair =
        build_adversarial_pair(&signal, &cfg.spec, cfg.epsilon, cfg.omega, cfg.grid_density)?;
    let taylor = taylor_domination_check(&pair, cfg.taylor_k_max)?;
    let manifest = RunManifest::new(
        "adversarial",
        resolved,
        None,
        vec![cfg.input.display().to_string()],
    );
    emit(
        &AdversarialOutput { pair, taylor },
        &args.common.output,
        manifest,
        start,
    )
}

fn oracle(args: OracleArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let defaults = serde_json::json!({
        "omega": 1.0,
        "epsilons": [0.02, 0.04, 0.08, 0.16],
        "resolution": 40,
        "s_samples": superres_core::oracle::DEFAULT_S_SAMPLES,
        "amp_box_factor": 3.0,
        "node_box_factor": 0.5
    });
    let (cfg, resolved): (OracleCliConfig, _) =
        resolve(defaults, &args.common.config, to_value(&args))?;
    let signal: SpikeSignal = read_json(&cfg.input)?;
    let oc = OracleConfig {
        box_rule: BoxRule::ScaledByEpsilon {
            amp_factor: cfg.amp_box_factor,
            node_factor: cfg.node_box_factor,
        },
        resolution: cfg.resolution,
        s_samples: cfg.s_samples,
        execution: Execution::Parallel,
    };
    let report = with_workers(args.workers, || {
        diameter_epsilon_scaling(&signal, cfg.omega, &cfg.epsilons, &oc)
    })?;
    let mut manifest = RunManifest::new(
        "oracle",
        resolved,
        None,
        vec![cfg.input.display().to_string()],
    );
    if let Some(out) = &args.common.output {
        let csv_path = out.with_extension("csv");
        let mut buf = Vec::new();
        write_diameter_csv(&report.estimates, &mut buf)?;
        write_file(&csv_path, &buf)?;
        manifest.outputs.push(csv_path.display().to_string());
    }
    emit(&report, &args.common.output, manifest, start)
}

fn default_experiment() -> ExperimentConfig {
    ExperimentConfig {
        spec: default_spec(),
        omega: 20.0,
        n_samples: 81,
        epsilon_rule: EpsilonRule::RateBound { c: 0.1 },
        n_trials: 300,
        srf_sweep: vec![2.0, 2.8, 4.0, 5.7, 8.0, 11.0, 16.0],
        base_seed: 0,
        noise: NoiseModel::UniformDisk,
        translation: 0.25,
        quantile: 0.5,
        execution: Execution::Parallel,
    }
}

fn srf_file_name(srf: f64) -> String {
    format!("trials_srf_{srf}.csv")
}

fn write_summary_outputs(
    rows: &[NodeRow],
    quantile: f64,
    dir: &Path,
    outputs: &mut Vec<String>,
) -> Result<AmplificationSummary, CliError> {
    let summary = summarize_amplification(rows, quantile)?;
    let mut buf = Vec::new();
    write_summary_csv(&summary, &mut buf)?;
    let files = [
        ("summary.csv", buf),
        (
            "k_x.svg",
            amplification_svg(&summary, Factor::Node).into_bytes(),
        ),
        (
            "k_a.svg",
            amplification_svg(&summary, Factor::Amplitude).into_bytes(),
        ),
        (
            "summary.json",
            (serde_json::to_string_pretty(&summary).expect("serializable") + "\n").into_bytes(),
        ),
    ];
    for (name, bytes) in files {
        let path = dir.join(name);
        write_file(&path, &bytes)?;
        outputs.push(path.display().to_string());
    }
    Ok(summary)
}

fn print_summary(summary: &AmplificationSummary) {
    if let Some(f) = summary.cluster_kx_fit {
        println!("cluster K_x slope {:.3} (r² {:.3})", f.slope, f.r_squared);
    }
    if let Some(f) = summary.cluster_ka_fit {
        println!("cluster K_a slope {:.3} (r² {:.3})", f.slope, f.r_squared);
    }
    if let (Some(x), Some(a)) = (summary.noncluster_max_kx, summary.noncluster_max_ka) {
        println!("non-cluster max K_x {x:.4}, max K_a {a:.4}");
    }
    for note in &summary.notes {
        println!("note: {note}");
    }
}

fn experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut flags = to_value(&args);
    flags["spec"] = to_value(&args.spec);
    if let Some(epsilon) = args.epsilon {
        flags["epsilon_rule"] = to_value(&EpsilonRule::Fixed { epsilon });
    }
    if let Some(c) = args.rate_c {
        flags["epsilon_rule"] = to_value(&EpsilonRule::RateBound { c });
    }
    let (cfg, resolved): (ExperimentConfig, _) =
        resolve(to_value(&default_experiment()), &args.config, flags)?;
    let out_dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));

    let sweep = with_workers(args.workers, || run_sweep(&cfg))?;
    let mut manifest = RunManifest::new("experiment", resolved, Some(cfg.base_seed), vec![]);
    let mut all_rows = Vec::new();
    for batch in &sweep {
        let rows = node_rows(batch.srf, &batch.records);
        let mut buf = Vec::new();
        write_trials_csv(&rows, &mut buf)?;
        let path = out_dir.join(srf_file_name(batch.srf));
        write_file(&path, &buf)?;
        manifest.outputs.push(path.display().to_string());
        all_rows.extend(rows);
    }
    let summary = write_summary_outputs(&all_rows, cfg.quantile, &out_dir, &mut manifest.outputs)?;
    manifest.finish(start);
    write_file(
        &out_dir.join("manifest.json"),
        manifest.to_json().as_bytes(),
    )?;
    print_summary(&summary);
    Ok(())
}

fn report(args: ReportArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let inputs: Vec<PathBuf> = if args.input.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(&args.input)
            .map_err(|e| CliError::io(&args.input, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("trials_srf_") && n.ends_with(".csv"))
            })
            .collect();
        v.sort();
        v
    } else {
        vec![args.input.clone()]
    };
    if inputs.is_empty() {
        return Err(CliError::Input(format!(
            "no trials_srf_*.csv files in {}",
            args.input.display()
        )));
    }
    let mut rows = Vec::new();
    for path in &inputs {
        let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        rows.extend(read_trials_csv(file)?);
    }
    let out_dir = args.out_dir.clone().unwrap_or_else(|| {
        if args.input.is_dir() {
            args.input.clone()
        } else {
            args.input
                .parent()
                .map(Path::to_path_buf)
                .unwrap_or_default()
        }
    });
    let resolved = serde_json::json!({ "quantile": args.quantile });
    let mut manifest = RunManifest::new(
        "report",
        resolved,
        None,
        inputs.iter().map(|p| p.display().to_string()).collect(),
    );
    let summary = write_summary_outputs(&rows, args.quantile, &out_dir, &mut manifest.outputs)?;
    manifest.finish(start);
    write_file(
        &out_dir.join("report.manifest.json"),
        manifest.to_json().as_bytes(),
    )?;
    print_summary(&summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Sample(a) => sample(a),
        Command::Recover(a) => recover_cmd(a),
        Command::Adversarial(a) => adversarial(a),
        Command::Oracle(a) => oracle(a),
        Command::Experiment(a) => experiment(a),
        Command::Report(a) => report(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.name());
            ExitCode::from(err.exit_code())
        }
    }
}
