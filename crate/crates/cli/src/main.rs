//! `gistage` — decode noisy GI-stage label streams with a left-to-right HMM,
//! plus the calibration, simulation and evaluation tooling around it.
//!
//! Exit codes: 0 success, 1 decode/metric failure, 2 usage/IO/parse failure.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gistage_core::calibrate::{self, CalibrationError, GridSpec};
use gistage_core::io::{self, DecodedStudyData, FormatError, ModelFile};
use gistage_core::metrics::{self, MetricsError, StudyMetrics};
use gistage_core::simulate::{self, BurstNoise, SimConfig, SimError};
use gistage_core::streaming::decode_studies;
use gistage_core::{DecodeError, DecoderConfig, EmitMode, StageLabel, Study};

#[derive(Parser)]
#[command(
    name = "gistage",
    version,
    about = "GI-tract stage localization from per-frame classifier labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode studies with a model file; writes decoded + events CSVs and
    /// prints metrics when truth labels are present
    Decode(DecodeArgs),
    /// Decode a corpus at several window sizes and emit accuracy/delay rows
    SweepWindow(SweepArgs),
    /// Grid-search transition/emission parameters on a labeled corpus
    Calibrate(CalibrateArgs),
    /// Generate a synthetic labeled corpus
    Simulate(SimulateArgs),
    /// Recompute metrics from a decoded CSV with truth
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitModeArg {
    Instantaneous,
    Smoothed,
}

impl From<EmitModeArg> for EmitMode {
    fn from(mode: EmitModeArg) -> EmitMode {
        match mode {
            EmitModeArg::Instantaneous => EmitMode::Instantaneous,
            EmitModeArg::Smoothed => EmitMode::Smoothed,
        }
    }
}

#[derive(Args)]
struct DecodeArgs {
    /// Model file (TOML)
    model: PathBuf,
    /// Input studies CSV
    input: PathBuf,
    /// Output decoded CSV; events go to the `<stem>.events.csv` sibling
    output: PathBuf,
    /// Override the model file's window size
    #[arg(long)]
    window: Option<usize>,
    /// Override the model file's emit mode
    #[arg(long, value_enum)]
    emit_mode: Option<EmitModeArg>,
    /// Also print frame-pooled metrics
    #[arg(long)]
    pooled: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Model file (TOML)
    model: PathBuf,
    /// Input studies CSV (truth required)
    input: PathBuf,
    /// Output sweep CSV
    output: PathBuf,
    /// Window sizes to evaluate
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    windows: Vec<usize>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Input studies CSV (truth required)
    input: PathBuf,
    /// Output model file (TOML)
    output: PathBuf,
    /// Also write the full grid table as CSV
    #[arg(long)]
    table: Option<PathBuf>,
    /// Transition diagonal candidates
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.9, 0.99, 0.999, 0.9999])]
    transition_diag: Vec<f64>,
    /// Emission correct-probability candidates
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.85, 0.90, 0.95, 0.97])]
    emission_correct: Vec<f64>,
    /// Window size used during calibration (also written to the model file)
    #[arg(long, default_value_t = 300)]
    window: usize,
}

#[derive(Args)]
struct SimulateArgs {
    /// Output studies CSV (with truth column)
    output: PathBuf,
    #[arg(long, default_value_t = 85)]
    studies: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability that a frame is labeled with its true stage
    #[arg(long, default_value_t = 0.97)]
    emission_correct: f64,
    /// Per-stage frame-count ranges, e.g. 20-100,2000-8000,8000-20000,2000-10000
    #[arg(long, default_value = "20-100,2000-8000,8000-20000,2000-10000")]
    durations: String,
    /// Burst-noise radius around true transitions (frames)
    #[arg(long, requires = "burst_flip")]
    burst_radius: Option<usize>,
    /// Burst-noise flip probability within the radius
    #[arg(long, requires = "burst_radius")]
    burst_flip: Option<f64>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Decoded CSV (truth required)
    input: PathBuf,
    /// Events CSV; defaults to the `<stem>.events.csv` sibling when present,
    /// otherwise detections are derived from the decoded labels
    #[arg(long)]
    events: Option<PathBuf>,
    /// Also print frame-pooled metrics
    #[arg(long)]
    pooled: bool,
}

/// Errors mapped onto the two failure exit codes.
enum CliError {
    /// Usage, IO, parsing or validation problems: exit 2.
    Input(String),
    /// Failures while decoding or computing metrics: exit 1.
    Run(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Run(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Run(m) => m,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DecodeError> for CliError {
    fn from(e: DecodeError) -> Self {
        match e {
            DecodeError::ConfigInvalid { .. } => CliError::Input(e.to_string()),
            _ => CliError::Run(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CalibrationError> for CliError {
    fn from(e: CalibrationError) -> Self {
        match e {
            CalibrationError::Decode(inner) => CliError::from(inner),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decode(args) => cmd_decode(args),
        Command::SweepWindow(args) => cmd_sweep_window(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Evaluate(args) => cmd_evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn effective_config(file: &ModelFile, args: &DecodeArgs) -> DecoderConfig {
    let mut config = file.decoder_config();
    if let Some(window) = args.window {
        config.window = window;
    }
    if let Some(mode) = args.emit_mode {
        config.emit_mode = mode.into();
    }
    config
}

fn decode_corpus(
    model_file: &ModelFile,
    config: DecoderConfig,
    studies: &[Study],
) -> Result<Vec<DecodedStudyData>, CliError> {
    let model = model_file.to_model().map_err(|e| CliError::Input(e.to_string()))?;
    config.validate()?;
    let decoded = decode_studies(&model, config, studies)?;
    Ok(studies
        .iter()
        .zip(decoded)
        .map(|(study, result)| DecodedStudyData {
            id: study.id.clone(),
            observed: study.observed.clone(),
            decoded: result.labels,
            truth: study.truth.clone(),
            events: result.events,
        })
        .collect())
}

/// Per-study metrics for every study that carries truth.
fn labeled_metrics(decoded: &[DecodedStudyData]) -> Result<Vec<StudyMetrics>, CliError> {
    let mut all = Vec::new();
    for study in decoded {
        if let Some(truth) = &study.truth {
            all.push(StudyMetrics::compute(&study.id, &study.decoded, truth, &study.events)?);
        }
    }
    Ok(all)
}

fn print_metrics(decoded: &[DecodedStudyData], pooled: bool) -> Result<(), CliError> {
    let per_study = labeled_metrics(decoded)?;
    if per_study.is_empty() {
        println!("no truth labels in the input; metrics skipped");
        return Ok(());
    }
    let aggregate = metrics::aggregate(&per_study)?;
    print!("{}", report::render_per_study(&per_study));
    println!();
    print!("{}", report::render_aggregate(&aggregate));
    if pooled {
        let pairs: Vec<(Vec<StageLabel>, Vec<StageLabel>)> = decoded
            .iter()
            .filter_map(|s| s.truth.as_ref().map(|t| (s.decoded.clone(), t.clone())))
            .collect();
        println!();
        print!("{}", report::render_pooled(&pairs));
    }
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Result<(), CliError> {
    let model_file = ModelFile::load(&args.model)?;
    let config = effective_config(&model_file, &args);
    let studies = io::parse_studies_csv(&args.input)?;
    let decoded = decode_corpus(&model_file, config, &studies)?;
    io::write_decoded_csv(&args.output, &decoded)?;
    print_metrics(&decoded, args.pooled)
}

fn cmd_sweep_window(args: SweepArgs) -> Result<(), CliError> {
    let model_file = ModelFile::load(&args.model)?;
    let studies = io::parse_studies_csv(&args.input)?;
    if studies.is_empty() || studies.iter().any(|s| s.truth.is_none()) {
        return Err(CliError::Input(
            "window sweep requires truth labels for every study".into(),
        ));
    }

    let mut out = String::from(
        "window,mean_accuracy,mean_delay,delay_q1,delay_median,delay_q3,delay_min,delay_max\n",
    );
    for &window in &args.windows {
        let config = DecoderConfig { window, ..model_file.decoder_config() };
        let decoded = decode_corpus(&model_file, config, &studies)?;
        let per_study = labeled_metrics(&decoded)?;
        let aggregate = metrics::aggregate(&per_study)?;
        match aggregate.small_intestine_delay {
            Some(d) => {
                out.push_str(&format!(
                    "{window},{},{},{},{},{},{},{}\n",
                    aggregate.mean_accuracy, d.mean, d.q1, d.median, d.q3, d.min, d.max
                ));
            }
            None => {
                out.push_str(&format!("{window},{},,,,,,\n", aggregate.mean_accuracy));
            }
        }
    }
    std::fs::write(&args.output, out)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.output.display())))?;
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let studies = io::parse_studies_csv(&args.input)?;
    let grid = GridSpec {
        transition_diag_candidates: args.transition_diag,
        emission_correct_candidates: args.emission_correct,
        window: args.window,
    };
    let result = calibrate::grid_search(&grid, &studies)?;

    let model = calibrate::build_model(result.best_transition_diag, result.best_emission_correct)
        .expect("winning grid point is in range");
    let config = DecoderConfig { window: grid.window, ..DecoderConfig::default() };
    ModelFile::from_parts(&model, &config).save(&args.output)?;

    if let Some(table_path) = &args.table {
        let mut table = String::from("transition_diag,emission_correct,mean_accuracy\n");
        for point in &result.full_table {
            table.push_str(&format!(
                "{},{},{}\n",
                point.transition_diag, point.emission_correct, point.mean_accuracy
            ));
        }
        std::fs::write(table_path, table)
            .map_err(|e| CliError::Input(format!("{}: {e}", table_path.display())))?;
    }

    println!(
        "best: transition_diag={} emission_correct={} mean_accuracy={:.4}%",
        result.best_transition_diag,
        result.best_emission_correct,
        result.best_mean_accuracy * 100.0
    );
    println!("model written to {}", args.output.display());
    Ok(())
}

fn parse_durations(text: &str) -> Result<[(usize, usize); 4], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::Input(format!(
            "--durations needs 4 comma-separated min-max ranges, found {}",
            parts.len()
        )));
    }
    let mut ranges = [(0usize, 0usize); 4];
    for (i, part) in parts.iter().enumerate() {
        let (min, max) = part.split_once('-').ok_or_else(|| {
            CliError::Input(format!("duration range {part:?} is not of the form min-max"))
        })?;
        let min = min.parse::<usize>().map_err(|_| {
            CliError::Input(format!("duration {min:?} is not a positive integer"))
        })?;
        let max = max.parse::<usize>().map_err(|_| {
            CliError::Input(format!("duration {max:?} is not a positive integer"))
        })?;
        ranges[i] = (min, max);
    }
    Ok(ranges)
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    if !(args.emission_correct > 0.0 && args.emission_correct < 1.0) {
        return Err(CliError::Input(format!(
            "--emission-correct must be in (0, 1), got {}",
            args.emission_correct
        )));
    }
    let burst = match (args.burst_radius, args.burst_flip) {
        (Some(radius), Some(flip_prob)) => Some(BurstNoise { radius, flip_prob }),
        _ => None,
    };
    let config = SimConfig {
        stage_duration_ranges: parse_durations(&args.durations)?,
        emission: gistage_core::model::confusion(args.emission_correct),
        seed: args.seed,
        studies: args.studies,
        burst,
    };
    let corpus = simulate::generate_corpus(&config)?;
    io::write_studies_csv(&args.output, &corpus)?;
    println!("wrote {} studies to {}", corpus.len(), args.output.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let mut decoded = io::parse_decoded_csv(&args.input)?;
    if decoded.iter().all(|s| s.truth.is_none()) {
        return Err(CliError::Input(
            "decoded file has no truth labels; nothing to evaluate".into(),
        ));
    }

    let events_path = args.events.clone().or_else(|| {
        let sibling = io::derive_events_path(&args.input);
        sibling.exists().then_some(sibling)
    });
    match events_path {
        Some(path) => {
            let mut by_study: std::collections::HashMap<String, Vec<_>> =
                std::collections::HashMap::new();
            for (id, event) in io::parse_events_csv(&path)? {
                by_study.entry(id).or_default().push(event);
            }
            for study in decoded.iter_mut() {
                study.events = by_study.remove(&study.id).unwrap_or_default();
            }
        }
        None => {
            // No events file: derive detections from the decoded labels.
            for study in decoded.iter_mut() {
                study.events = metrics::detect_transitions_from_labels(&study.decoded);
            }
        }
    }
    print_metrics(&decoded, args.pooled)
}
