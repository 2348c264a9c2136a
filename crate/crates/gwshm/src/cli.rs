//! Command-line front end. Exit codes: 0 ok or healthy, 2 configuration,
//! data or I/O failure, 3 damaged, 4 edge image rejected.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwshm_core::detector::Decision;
use gwshm_core::edge::{self, edge_infer, InferenceScratch};
use gwshm_core::features::{crop_window, extract_features, BaselineReference, FEATURE_COUNT};
use gwshm_core::scenario::ScenarioConfig;
use gwshm_core::signal::{Condition, DamageSpec, EnvCondition, GwRecord, PathSpec};

use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::pipeline::{errors_csv, evaluate_rows, evaluation_rows, extract_feature_table, synth, train_detector};
use crate::record::read_record;
use crate::table::{read_features_csv, write_features_csv};
use crate::{fsutil, svg};

pub const FEATURES_FILE: &str = "features.csv";
pub const SEARCH_FILE: &str = "search.json";
pub const REPORT_FILE: &str = "report.json";
pub const ERRORS_FILE: &str = "errors.csv";
pub const HISTOGRAM_FILE: &str = "histogram.svg";
pub const IMAGE_FILE: &str = "model.gwae";
pub const PREDICTION_FILE: &str = "prediction.txt";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_DAMAGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gwshm", version, about = "Guided-wave damage detection with a feature autoencoder")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Pipeline configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides every seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Experimental,
    Simulation,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset: records plus manifest.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Also write the noisy copies.
        #[arg(long)]
        augment: bool,
        /// Replace a dataset already present in the output directory.
        #[arg(long)]
        force: bool,
        /// Built-in scenario, used when the configuration has none.
        #[arg(long, value_enum)]
        preset: Option<Preset>,
    },
    /// Extract the feature table of a dataset.
    Features {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Train the detector on the baseline rows of a feature table.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        features: PathBuf,
        /// Random hyperparameter search before the final fit.
        #[arg(long)]
        tune: bool,
    },
    /// Score a feature table and write the evaluation report.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        features: PathBuf,
        /// Also write an error histogram.
        #[arg(long)]
        svg: bool,
    },
    /// Write the edge model image of a checkpoint.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Classify one feature row or one record with an edge image.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        image: PathBuf,
        #[arg(long, requires = "record_id", conflicts_with_all = ["record", "baseline"])]
        features: Option<PathBuf>,
        #[arg(long)]
        record_id: Option<String>,
        #[arg(long, requires = "baseline")]
        record: Option<PathBuf>,
        /// Baseline record of the same path at the reference temperature.
        #[arg(long, requires = "record")]
        baseline: Option<PathBuf>,
    },
}

impl Common {
    fn out(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| CliError::Config("--out is required".into()))
    }

    fn pipeline(&self) -> Result<PipelineConfig> {
        PipelineConfig::load_or_default(self.config.as_deref())
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error[usage]: {line}");
            return EXIT_FAILURE;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.render());
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Synth { common, augment, force, preset } => cmd_synth(&common, augment, force, preset),
        Command::Features { common, dataset } => cmd_features(&common, &dataset),
        Command::Train { common, features, tune } => cmd_train(&common, &features, tune),
        Command::Eval { common, checkpoint, features, svg } => cmd_eval(&common, &checkpoint, &features, svg),
        Command::Export { common, checkpoint } => cmd_export(&common, &checkpoint),
        Command::Infer { common, image, features, record_id, record, baseline } => {
            let input = match (features, record_id, record, baseline) {
                (Some(f), Some(id), None, None) => InferInput::Row { features: f, record_id: id },
                (None, None, Some(r), Some(b)) => InferInput::Record { record: r, baseline: b },
                _ => {
                    return Err(CliError::Config(
                        "infer needs either --features with --record-id or --record with --baseline".into(),
                    ))
                }
            };
            cmd_infer(&common, &image, input)
        }
    }
}

fn cmd_synth(common: &Common, augment: bool, force: bool, preset: Option<Preset>) -> Result<i32> {
    let cfg = common.pipeline()?;
    let scenario = match (&cfg.scenario, preset) {
        (Some(s), _) => s.clone(),
        (None, Some(Preset::Experimental)) => ScenarioConfig::experimental(),
        (None, Some(Preset::Simulation)) => ScenarioConfig::simulation(),
        (None, None) => {
            return Err(CliError::Config("no scenario: pass --config with a \"scenario\" section or --preset".into()))
        }
    };
    let seed = common.seed.or(cfg.seed).unwrap_or(scenario.seed);
    let out = match (&common.out, &scenario.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => PathBuf::from(o),
        (None, None) => return Err(CliError::Config("--out is required".into())),
    };
    let m = synth(&scenario, seed, &out, augment, force)?;
    println!("wrote {} clean and {} noisy records to {}", m.clean_count, m.augmented_count, out.display());
    Ok(EXIT_OK)
}

fn cmd_features(common: &Common, dataset: &Path) -> Result<i32> {
    let cfg = common.pipeline()?;
    let out = common.out()?;
    let rows = extract_feature_table(dataset, &cfg.features)?;
    fsutil::create_dir_all(out)?;
    let path = out.join(FEATURES_FILE);
    write_features_csv(&path, &rows)?;
    println!("wrote {} feature rows to {}", rows.len(), path.display());
    Ok(EXIT_OK)
}

fn cmd_train(common: &Common, features: &Path, tune: bool) -> Result<i32> {
    let cfg = common.pipeline()?;
    let out = common.out()?;
    let rows = read_features_csv(features)?;
    let trained = train_detector(&rows, &cfg.train, cfg.train_seed(common.seed), tune)?;
    fsutil::create_dir_all(out)?;
    if let Some(search) = &trained.search {
        fsutil::write_json(&out.join(SEARCH_FILE), search)?;
        for (i, t) in search.trials.iter().enumerate() {
            let mark = if i == search.best_index { " *" } else { "" };
            println!(
                "trial {i}: lr {} batch {} epochs {} score {:.6e}{mark}",
                t.config.learning_rate, t.config.batch_size, t.config.epochs, t.score
            );
        }
    }
    let hash = save_checkpoint(out, &trained)?;
    let fit = trained.detector.threshold_fit();
    println!(
        "trained on {} baseline rows (lr {} batch {} epochs {}), threshold {:.6e}",
        trained.split.train.len(),
        trained.config.learning_rate,
        trained.config.batch_size,
        trained.config.epochs,
        fit.threshold
    );
    println!("checkpoint sha256 {hash}");
    Ok(EXIT_OK)
}

fn cmd_eval(common: &Common, checkpoint: &Path, features: &Path, with_svg: bool) -> Result<i32> {
    let out = common.out()?;
    let ckpt = load_checkpoint(checkpoint)?;
    let rows = read_features_csv(features)?;
    let selected = evaluation_rows(&rows, Some(&ckpt.split));
    let evaluation = evaluate_rows(&ckpt.detector, &selected)?;
    fsutil::create_dir_all(out)?;
    fsutil::write_json(&out.join(REPORT_FILE), &evaluation.report)?;
    fsutil::write_atomic(&out.join(ERRORS_FILE), &errors_csv(&selected, &evaluation)?)?;
    if with_svg {
        let doc = svg::error_histogram(&evaluation.report, &evaluation.outcomes);
        fsutil::write_atomic(&out.join(HISTOGRAM_FILE), doc.as_bytes())?;
    }
    println!("threshold {:.6e}", evaluation.report.threshold.threshold);
    for c in &evaluation.report.cases {
        let size = c.size_mm.map(|s| format!(" {s} mm")).unwrap_or_default();
        let f1 = c.f1_pct.map(|f| format!(" f1 {f:.1}%")).unwrap_or_default();
        println!("{}{size}: n {} accuracy {:.1}%{f1}", c.condition.as_str(), c.counts.total(), c.accuracy_pct);
    }
    Ok(EXIT_OK)
}

fn cmd_export(common: &Common, checkpoint: &Path) -> Result<i32> {
    let out = common.out()?;
    let ckpt = load_checkpoint(checkpoint)?;
    let bytes = edge::serialize(&ckpt.detector)?;
    fsutil::create_dir_all(out)?;
    let path = out.join(IMAGE_FILE);
    fsutil::write_atomic(&path, &bytes)?;
    println!("wrote {} ({} bytes)", path.display(), bytes.len());
    Ok(EXIT_OK)
}

enum InferInput {
    Row { features: PathBuf, record_id: String },
    Record { record: PathBuf, baseline: PathBuf },
}

fn bare_record(path: &Path) -> Result<GwRecord> {
    let (samples, sample_rate) = read_record(path)?;
    Ok(GwRecord {
        samples,
        sample_rate,
        path: PathSpec::new("", 0.0),
        env: EnvCondition { temperature_c: 0.0 },
        damage: DamageSpec { kind: Condition::Baseline, size_mm: 0.0 },
        noise_copy: 0,
    })
}

fn cmd_infer(common: &Common, image: &Path, input: InferInput) -> Result<i32> {
    let cfg = common.pipeline()?;
    let model = edge::load(&fsutil::read(image)?)?;
    let (record_id, raw) = match input {
        InferInput::Row { features, record_id } => {
            let rows = read_features_csv(&features)?;
            let row = rows
                .into_iter()
                .find(|r| r.record_id == record_id)
                .ok_or_else(|| CliError::Data(format!("{}: no row with record_id {record_id}", features.display())))?;
            (record_id, row.features)
        }
        InferInput::Record { record, baseline } => {
            let b = bare_record(&baseline)?;
            let r = bare_record(&record)?;
            let reference = BaselineReference::new(crop_window(&b, cfg.features.window_s)?)?;
            let f = extract_features(crop_window(&r, cfg.features.window_s)?, &reference)?;
            let id = record.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (id, f.to_array())
        }
    };
    let mut input = [0f32; FEATURE_COUNT];
    for (d, s) in input.iter_mut().zip(raw) {
        *d = s as f32;
    }
    let mut scratch = InferenceScratch::new();
    let (error, decision) = edge_infer(&model, &input, &mut scratch);
    let line = format!("{record_id}, {error:.6e}, {}", decision.as_str());
    println!("{line}");
    if let Some(out) = &common.out {
        fsutil::create_dir_all(out)?;
        fsutil::write_atomic(&out.join(PREDICTION_FILE), format!("{line}\n").as_bytes())?;
    }
    Ok(match decision {
        Decision::Healthy => EXIT_OK,
        Decision::Damaged => EXIT_DAMAGED,
    })
}
