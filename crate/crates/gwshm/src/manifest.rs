use std::collections::BTreeSet;
use std::path::Path;

use gwshm_core::scenario::ScenarioConfig;
use gwshm_core::signal::Condition;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::fsutil;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RECORDS_DIR: &str = "records";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub record_id: String,
    /// Relative to the dataset directory.
    pub file: String,
    pub path_id: String,
    /// Realized distance, including placement jitter.
    pub tx_rx_distance_mm: f64,
    pub temperature_c: f64,
    pub condition: Condition,
    pub damage_size_mm: f64,
    pub noise_copy: u32,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub clean_count: usize,
    pub augmented_count: usize,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fsutil::write_json(&dir.join(MANIFEST_FILE), self)
    }

    /// Loads the manifest and checks it against the scenario and the files on
    /// disk.
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let m: DatasetManifest = fsutil::read_json(&path).map_err(|e| match e {
            CliError::Config(msg) => CliError::Manifest(msg),
            other => other,
        })?;
        m.verify(dir)?;
        Ok(m)
    }

    pub fn verify(&self, dir: &Path) -> Result<()> {
        let bad = |msg: String| Err(CliError::Manifest(msg));
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return bad(format!("unsupported manifest schema version {}", self.schema_version));
        }
        let clean = self.entries.iter().filter(|e| e.noise_copy == 0).count();
        if clean != self.clean_count || self.entries.len() != self.clean_count + self.augmented_count {
            return bad("entry counts disagree with the manifest header".into());
        }
        if self.clean_count != self.scenario.clean_record_count() {
            return bad(format!(
                "{} clean records listed but the scenario expands to {}",
                self.clean_count,
                self.scenario.clean_record_count()
            ));
        }
        let copies = self.scenario.noise.copies as usize;
        if self.augmented_count != 0 && self.augmented_count != self.clean_count * copies {
            return bad(format!("{} augmented records, expected {}", self.augmented_count, self.clean_count * copies));
        }
        let mut ids = BTreeSet::new();
        let mut files = BTreeSet::new();
        for e in &self.entries {
            if !ids.insert(e.record_id.as_str()) {
                return bad(format!("duplicate record id {}", e.record_id));
            }
            files.insert(e.file.as_str());
            if !dir.join(&e.file).is_file() {
                return bad(format!("record file {} is missing", e.file));
            }
        }
        let records = dir.join(RECORDS_DIR);
        let on_disk = std::fs::read_dir(&records)
            .map_err(|e| CliError::io(&records, e))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "gwrc"))
            .count();
        if on_disk != self.entries.len() || files.len() != self.entries.len() {
            return bad(format!("{} record files on disk, manifest lists {}", on_disk, self.entries.len()));
        }
        Ok(())
    }
}
