//! `myobench`: offline multi-modal gesture-recognition benchmark pipeline.
//!
//! Thin command-line front end; all behaviour lives in the library. Stages
//! communicate through on-disk artifacts and default to conventional
//! locations under `--output-dir`, so a full run is:
//!
//! ```text
//! myobench synth --preset bio-like --scale 0.25 --seed 7
//! myobench preprocess
//! myobench features
//! myobench eval --task position --features acc-med --classifier lda
//! myobench report
//! ```

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use myobench::bundle::BundleEncoding;
use myobench::config::RunConfig;
use myobench::error::{Error, Result};
use myobench::eval::TaskKind;
use myobench::features::FeatureSetKind;
use myobench::pipeline::{self, EvalRequest};

#[derive(Parser)]
#[command(name = "myobench", version, about = "Multi-modal gesture-recognition benchmark pipeline")]
struct Cli {
    /// TOML run configuration; flags override individual values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root directory for stage artifacts.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Base seed for all randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 = all cores). Outputs are identical at any value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an external bundle and rewrite it in canonical form.
    Convert(ConvertArgs),
    /// Generate a synthetic dataset bundle.
    Synth(SynthArgs),
    /// Filter a bundle (EMG notch + bandpass, ACC lowpass).
    Preprocess(PreprocessArgs),
    /// Extract feature sets from a preprocessed bundle.
    Features(FeaturesArgs),
    /// Run a classification task over a feature store.
    Eval(EvalArgs),
    /// Render Markdown tables (and CSV extracts) from result JSON.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConvertArgs {
    /// Bundle directory to validate.
    #[arg(long)]
    input: PathBuf,
    /// Canonical output directory.
    #[arg(long)]
    output: PathBuf,
    /// Sample encoding of the rewritten bundle: csv or f32le.
    #[arg(long, default_value = "csv")]
    encoding: String,
}

#[derive(Args)]
struct SynthArgs {
    /// Preset name: bio-like or hci-like.
    #[arg(long)]
    preset: Option<String>,
    /// Full generator configuration (JSON), overrides --preset.
    #[arg(long)]
    synth_config: Option<PathBuf>,
    /// Subject/repetition scale factor (minimum 2 each).
    #[arg(long)]
    scale: Option<f64>,
    /// Sample encoding of the bundle: csv or f32le.
    #[arg(long)]
    encoding: Option<String>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Input bundle (default: <output-dir>/bundle).
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Notch center frequency: 50 or 60.
    #[arg(long)]
    notch: Option<f64>,
    /// Causal single-pass filtering instead of zero-phase.
    #[arg(long)]
    causal: bool,
}

#[derive(Args)]
struct FeaturesArgs {
    /// Input preprocessed bundle (default: <output-dir>/preprocessed).
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Comma-separated feature sets (emg-td,emg-tdpsd,acc-med,acc-rms).
    #[arg(long)]
    sets: Option<String>,
    /// Dead-zone threshold for zero crossings / slope sign changes.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct EvalArgs {
    /// Task to run: position, gesture or sequential.
    #[arg(long)]
    task: Option<String>,
    /// Feature set for the task; for sequential, `position,gesture`
    /// (for example `acc-med,emg-td`).
    #[arg(long)]
    features: Option<String>,
    /// Classifier: lda, qda, knn[k], rf[trees].
    #[arg(long)]
    classifier: Option<String>,
    /// Gesture subset JSON ({"name": ..., "gesture_ids": [...]}).
    #[arg(long)]
    subset: Option<PathBuf>,
    /// Feature store directory (default: <output-dir>/features).
    #[arg(long)]
    store: Option<PathBuf>,
    /// Route the sequential task with ground-truth positions.
    #[arg(long)]
    oracle_positions: bool,
    /// Keep per-window prediction records in the result JSON.
    #[arg(long)]
    record_predictions: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Results directory (default: <output-dir>/results).
    #[arg(long)]
    results: Option<PathBuf>,
    /// Output Markdown path (default: <output-dir>/report.md).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write plot-ready CSV next to the report.
    #[arg(long)]
    csv: bool,
    /// Compare against published reference accuracies:
    /// biomedical, hci-a, hci-b or hci-c.
    #[arg(long)]
    reference: Option<String>,
}

fn parse_encoding(s: &str) -> Result<BundleEncoding> {
    match s {
        "csv" => Ok(BundleEncoding::Csv),
        "f32le" => Ok(BundleEncoding::F32le),
        other => Err(Error::Config(format!("unknown encoding '{other}' (expected csv or f32le)"))),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;

    pool.install(|| -> Result<()> {
        match cli.command {
            Command::Convert(args) => {
                let encoding = parse_encoding(&args.encoding)?;
                let trials = pipeline::run_convert(&args.input, &args.output, encoding)?;
                println!("converted {trials} trials -> {}", args.output.display());
            }
            Command::Synth(args) => {
                if let Some(preset) = args.preset {
                    cfg.synth.preset = Some(preset);
                }
                if let Some(path) = args.synth_config {
                    cfg.synth.config_file = Some(path);
                }
                if let Some(scale) = args.scale {
                    cfg.synth.scale = scale;
                }
                if let Some(encoding) = args.encoding {
                    cfg.synth.encoding = parse_encoding(&encoding)?;
                }
                let (dir, trials) = pipeline::run_synth(&cfg)?;
                println!("generated {trials} trials -> {}", dir.display());
            }
            Command::Preprocess(args) => {
                if let Some(notch) = args.notch {
                    cfg.preprocess.notch_hz = notch;
                }
                if args.causal {
                    cfg.preprocess.zero_phase = false;
                }
                let dir = pipeline::run_preprocess(&cfg, args.bundle.as_deref())?;
                println!("preprocessed bundle -> {}", dir.display());
            }
            Command::Features(args) => {
                if let Some(sets) = args.sets {
                    cfg.features.kinds = sets
                        .split(',')
                        .map(FeatureSetKind::from_str)
                        .collect::<Result<Vec<_>>>()?;
                }
                if let Some(eps) = args.epsilon {
                    cfg.features.zc_ssc_epsilon = eps;
                }
                let dir = pipeline::run_features(&cfg, args.bundle.as_deref())?;
                println!("feature store -> {}", dir.display());
            }
            Command::Eval(args) => {
                if let Some(classifier) = args.classifier {
                    cfg.eval.classifier = classifier;
                }
                if args.record_predictions {
                    cfg.eval.record_predictions = true;
                }
                let tasks: Vec<TaskKind> = match &args.task {
                    Some(t) => vec![t.parse()?],
                    None => cfg.eval.tasks.clone(),
                };
                for task in tasks {
                    let mut request = EvalRequest::from_config(&cfg, task);
                    request.subset = args.subset.clone();
                    request.oracle_positions = args.oracle_positions;
                    if let Some(features) = &args.features {
                        let parts: Vec<&str> = features.split(',').collect();
                        match (task, parts.as_slice()) {
                            (TaskKind::Sequential, [pos, gest]) => {
                                request.position_features = pos.parse()?;
                                request.feature_set = gest.parse()?;
                            }
                            (TaskKind::Sequential, [gest]) => {
                                request.feature_set = gest.parse()?;
                            }
                            (_, [single]) => {
                                request.feature_set = single.parse()?;
                            }
                            _ => {
                                return Err(Error::Config(format!(
                                    "--features '{features}' must name one feature set \
                                     (or position,gesture for the sequential task)"
                                )));
                            }
                        }
                    }
                    let path = pipeline::run_eval(&cfg, args.store.as_deref(), &request)?;
                    println!("result -> {}", path.display());
                }
            }
            Command::Report(args) => {
                let path = pipeline::run_report(
                    &cfg,
                    args.results.as_deref(),
                    args.output.as_deref(),
                    args.csv,
                    args.reference.as_deref(),
                )?;
                println!("report -> {}", path.display());
            }
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
