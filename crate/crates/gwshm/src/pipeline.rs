//! Dataset synthesis, feature extraction, training and evaluation over the
//! on-disk formats.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use gwshm_core::augment::{add_noise_at_snr, copy_seed, normalize};
use gwshm_core::autoencoder::{build_model, random_search_with, split_dataset, train_with_validation, Architecture};
use gwshm_core::autoencoder::{LossHistory, SearchOutcome, TrainConfig};
use gwshm_core::detector::{evaluate, AnomalyDetector, Evaluation, LabeledVector};
use gwshm_core::features::{crop_window, extract_features, BaselineReference, FeatureScaler};
use gwshm_core::scenario::{generate_scenario, ScenarioConfig};
use gwshm_core::signal::{Condition, DamageSpec, EnvCondition, GwRecord, PathSpec};
use serde::{Deserialize, Serialize};

use crate::config::{FeatureSettings, RecordSource, TrainSettings};
use crate::error::{CliError, Result};
use crate::fsutil;
use crate::manifest::{DatasetManifest, ManifestEntry, MANIFEST_FILE, MANIFEST_SCHEMA_VERSION, RECORDS_DIR};
use crate::record::{read_record, write_record};
use crate::table::FeatureRow;

pub fn clean_record_id(index: usize) -> String {
    format!("c{index:05}")
}

pub fn noisy_record_id(index: usize, copy: u32) -> String {
    format!("c{index:05}-n{copy:03}")
}

fn entry_for(record: &GwRecord, record_id: String) -> ManifestEntry {
    ManifestEntry {
        file: format!("{RECORDS_DIR}/{record_id}.gwrc"),
        record_id,
        path_id: record.path.path_id.clone(),
        tx_rx_distance_mm: record.path.tx_rx_distance_mm,
        temperature_c: record.env.temperature_c,
        condition: record.damage.kind,
        damage_size_mm: record.damage.size_mm,
        noise_copy: record.noise_copy,
        sample_count: record.samples.len(),
    }
}

/// Generates the scenario's clean records (peak-normalized) and, with
/// `augment`, their noisy copies, then writes the manifest last.
pub fn synth(scenario: &ScenarioConfig, seed: u64, out: &Path, augment: bool, force: bool) -> Result<DatasetManifest> {
    let manifest_path = out.join(MANIFEST_FILE);
    let records_dir = out.join(RECORDS_DIR);
    if manifest_path.exists() {
        if !force {
            return Err(CliError::Config(format!(
                "{} already holds a dataset; choose another --out or pass --force",
                out.display()
            )));
        }
        std::fs::remove_file(&manifest_path).map_err(|e| CliError::io(&manifest_path, e))?;
        if records_dir.exists() {
            std::fs::remove_dir_all(&records_dir).map_err(|e| CliError::io(&records_dir, e))?;
        }
    }
    let clean = generate_scenario(scenario, seed)?.iter().map(normalize).collect::<gwshm_core::Result<Vec<_>>>()?;
    fsutil::create_dir_all(&records_dir)?;

    let mut entries = Vec::new();
    for (i, r) in clean.iter().enumerate() {
        let e = entry_for(r, clean_record_id(i));
        write_record(&out.join(&e.file), &r.samples, r.sample_rate)?;
        entries.push(e);
    }
    let mut augmented_count = 0;
    if augment {
        for (i, r) in clean.iter().enumerate() {
            for c in 1..=scenario.noise.copies {
                let noisy = add_noise_at_snr(r, &scenario.noise, copy_seed(seed, i, c), c)?;
                let e = entry_for(&noisy, noisy_record_id(i, c));
                write_record(&out.join(&e.file), &noisy.samples, noisy.sample_rate)?;
                entries.push(e);
                augmented_count += 1;
            }
        }
    }
    let manifest = DatasetManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        seed,
        scenario: ScenarioConfig { seed, output_dir: None, ..scenario.clone() },
        clean_count: clean.len(),
        augmented_count,
        entries,
    };
    manifest.write(out)?;
    Ok(manifest)
}

pub fn load_record(dataset: &Path, entry: &ManifestEntry) -> Result<GwRecord> {
    let (samples, sample_rate) = read_record(&dataset.join(&entry.file))?;
    if samples.len() != entry.sample_count {
        return Err(CliError::Manifest(format!(
            "{} holds {} samples, manifest says {}",
            entry.file,
            samples.len(),
            entry.sample_count
        )));
    }
    Ok(GwRecord {
        samples,
        sample_rate,
        path: PathSpec::new(entry.path_id.clone(), entry.tx_rx_distance_mm),
        env: EnvCondition { temperature_c: entry.temperature_c },
        damage: DamageSpec { kind: entry.condition, size_mm: entry.damage_size_mm },
        noise_copy: entry.noise_copy,
    })
}

/// One feature row per selected record, in manifest order. Each path is
/// compared with its clean baseline record at the reference temperature.
pub fn extract_feature_table(dataset: &Path, settings: &FeatureSettings) -> Result<Vec<FeatureRow>> {
    let manifest = DatasetManifest::load(dataset)?;
    let t_ref = settings.reference_temperature_c.unwrap_or(manifest.scenario.propagation.reference_temperature_c);

    let mut baselines: BTreeMap<&str, BaselineReference> = BTreeMap::new();
    for e in &manifest.entries {
        if e.condition == Condition::Baseline && e.noise_copy == 0 && (e.temperature_c - t_ref).abs() < 1e-9 {
            let r = load_record(dataset, e)?;
            baselines.insert(e.path_id.as_str(), BaselineReference::new(crop_window(&r, settings.window_s)?)?);
        }
    }

    let has_noisy = manifest.augmented_count > 0;
    let selected = manifest.entries.iter().filter(|e| match settings.source {
        RecordSource::Auto => (e.noise_copy > 0) == has_noisy,
        RecordSource::Clean => e.noise_copy == 0,
        RecordSource::Noisy => e.noise_copy > 0,
        RecordSource::All => true,
    });
    let mut rows = Vec::new();
    for e in selected {
        let baseline = baselines
            .get(e.path_id.as_str())
            .ok_or_else(|| CliError::MissingBaseline { path_id: e.path_id.clone(), temperature_c: t_ref })?;
        let r = load_record(dataset, e)?;
        let f = extract_features(crop_window(&r, settings.window_s)?, baseline)?;
        rows.push(FeatureRow {
            record_id: e.record_id.clone(),
            path_id: e.path_id.clone(),
            temperature_c: e.temperature_c,
            condition: e.condition,
            damage_size_mm: e.damage_size_mm,
            noise_copy: e.noise_copy,
            features: f.to_array(),
        });
    }
    if rows.is_empty() {
        return Err(CliError::Data("no records match the feature source selection".into()));
    }
    Ok(rows)
}

/// Record ids of the baseline rows in each part of the split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIds {
    pub seed: u64,
    pub fractions: [f64; 3],
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TrainedDetector {
    pub detector: AnomalyDetector,
    pub config: TrainConfig,
    pub seed: u64,
    pub history: LossHistory,
    pub split: SplitIds,
    pub search: Option<SearchOutcome>,
}

/// Trains on the baseline rows only: split, fit the scaler on the training
/// part, optionally tune, train, and set the threshold from training errors.
pub fn train_detector(rows: &[FeatureRow], settings: &TrainSettings, seed: u64, tune: bool) -> Result<TrainedDetector> {
    let baseline: Vec<&FeatureRow> = rows.iter().filter(|r| r.condition == Condition::Baseline).collect();
    if baseline.is_empty() {
        return Err(CliError::NoBaselineRows);
    }
    let [a, b, c] = settings.split;
    let split = split_dataset(baseline.len(), (a, b, c), seed)?;
    let raw_train: Vec<[f64; 16]> = split.train.iter().map(|&i| baseline[i].features).collect();
    let scaler = FeatureScaler::fit(&raw_train)?;
    let train: Vec<[f64; 16]> = raw_train.iter().map(|v| scaler.apply(v)).collect();
    let validation: Vec<[f64; 16]> = split.validation.iter().map(|&i| scaler.apply(&baseline[i].features)).collect();

    let base = TrainConfig { seed, ..settings.config };
    base.validate()?;
    let search = if tune {
        Some(random_search_with(&Architecture::standard(), &settings.search, &train, seed, &base)?)
    } else {
        None
    };
    let config = search.as_ref().map_or(base, |s| s.best);

    let mut model = build_model(seed);
    let history = if validation.is_empty() {
        train_with_validation::<_, [f64; 16]>(&mut model, &train, None, &config)?
    } else {
        train_with_validation(&mut model, &train, Some(&validation), &config)?
    };
    let detector = AnomalyDetector::fit(model, scaler, &train)?;
    let ids = |idx: &[usize]| idx.iter().map(|&i| baseline[i].record_id.clone()).collect();
    Ok(TrainedDetector {
        detector,
        config,
        seed,
        history,
        split: SplitIds {
            seed,
            fractions: settings.split,
            train: ids(&split.train),
            validation: ids(&split.validation),
            test: ids(&split.test),
        },
        search,
    })
}

/// Rows that take part in evaluation: every damaged row and every baseline
/// row the detector did not see during training or validation.
pub fn evaluation_rows<'a>(rows: &'a [FeatureRow], split: Option<&SplitIds>) -> Vec<&'a FeatureRow> {
    let seen: HashSet<&str> =
        split.map(|s| s.train.iter().chain(&s.validation).map(String::as_str).collect()).unwrap_or_default();
    rows.iter().filter(|r| r.condition != Condition::Baseline || !seen.contains(r.record_id.as_str())).collect()
}

pub fn evaluate_rows(detector: &AnomalyDetector, rows: &[&FeatureRow]) -> Result<Evaluation> {
    let samples: Vec<LabeledVector> = rows
        .iter()
        .map(|r| LabeledVector {
            condition: r.condition,
            size_mm: r.damage_size_mm,
            features: detector.scaler().apply(&r.features),
        })
        .collect();
    Ok(evaluate(detector, &samples)?)
}

pub fn errors_csv(rows: &[&FeatureRow], evaluation: &Evaluation) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(["record_id", "condition", "damage_size_mm", "error", "prediction"]).map_err(err)?;
    for (r, o) in rows.iter().zip(&evaluation.outcomes) {
        w.write_record([
            r.record_id.clone(),
            r.condition.as_str().to_string(),
            r.damage_size_mm.to_string(),
            format!("{:.16e}", o.error),
            o.decision.as_str().to_string(),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}
