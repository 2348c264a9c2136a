//! Training checkpoints: `model.json` (architecture, scaler, training
//! configuration, loss history, threshold), `weights.bin` (the flat parameter
//! vector as f64 little-endian) and `split.json` (record ids per split part).

use std::path::Path;

use gwshm_core::autoencoder::{Architecture, DenseAutoencoder, LossHistory, SearchOutcome, TrainConfig};
use gwshm_core::detector::{AnomalyDetector, ThresholdFit};
use gwshm_core::features::FeatureScaler;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::fsutil;
use crate::pipeline::{SplitIds, TrainedDetector};

pub const MODEL_FILE: &str = "model.json";
pub const WEIGHTS_FILE: &str = "weights.bin";
pub const SPLIT_FILE: &str = "split.json";
const FORMAT: &str = "gwshm-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointManifest {
    pub format: String,
    pub version: u32,
    pub architecture: Architecture,
    pub scaler: FeatureScaler,
    pub train_config: TrainConfig,
    pub seed: u64,
    pub threshold: ThresholdFit,
    pub loss_history: LossHistory,
    pub weights_file: String,
    pub weights_count: usize,
    pub weights_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchOutcome>,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub manifest: CheckpointManifest,
    pub detector: AnomalyDetector,
    pub split: SplitIds,
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn weights_bytes(params: &[f64]) -> Vec<u8> {
    params.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Writes the checkpoint and returns its SHA-256 over model, weights and split
/// files in that order.
pub fn save_checkpoint(dir: &Path, trained: &TrainedDetector) -> Result<String> {
    fsutil::create_dir_all(dir)?;
    let det = &trained.detector;
    let weights = weights_bytes(det.model().params());
    let manifest = CheckpointManifest {
        format: FORMAT.into(),
        version: VERSION,
        architecture: det.model().architecture().clone(),
        scaler: det.scaler().clone(),
        train_config: trained.config,
        seed: trained.seed,
        threshold: det.threshold_fit(),
        loss_history: trained.history.clone(),
        weights_file: WEIGHTS_FILE.into(),
        weights_count: det.model().parameter_count(),
        weights_sha256: sha256_hex(&weights),
        search: trained.search.clone(),
    };
    fsutil::write_atomic(&dir.join(WEIGHTS_FILE), &weights)?;
    fsutil::write_json(&dir.join(SPLIT_FILE), &trained.split)?;
    fsutil::write_json(&dir.join(MODEL_FILE), &manifest)?;
    checkpoint_hash(dir)
}

pub fn checkpoint_hash(dir: &Path) -> Result<String> {
    let mut h = Sha256::new();
    for f in [MODEL_FILE, WEIGHTS_FILE, SPLIT_FILE] {
        h.update(fsutil::read(&dir.join(f))?);
    }
    Ok(format!("{:x}", h.finalize()))
}

pub fn load_checkpoint(dir: &Path) -> Result<Checkpoint> {
    let manifest: CheckpointManifest = fsutil::read_json(&dir.join(MODEL_FILE))?;
    if manifest.format != FORMAT || manifest.version != VERSION {
        return Err(CliError::Config(format!("{}: not a version {VERSION} {FORMAT}", dir.join(MODEL_FILE).display())));
    }
    let wpath = dir.join(&manifest.weights_file);
    let bytes = fsutil::read(&wpath)?;
    if sha256_hex(&bytes) != manifest.weights_sha256 || bytes.len() != 8 * manifest.weights_count {
        return Err(CliError::Data(format!("{}: weights do not match the checkpoint manifest", wpath.display())));
    }
    let params = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let model = DenseAutoencoder::from_params(&manifest.architecture, params)?;
    let detector = AnomalyDetector::new(model, manifest.scaler.clone(), manifest.threshold)?;
    let split = fsutil::read_json(&dir.join(SPLIT_FILE))?;
    Ok(Checkpoint { manifest, detector, split })
}
