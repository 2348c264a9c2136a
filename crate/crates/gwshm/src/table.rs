//! Feature tables as CSV: six metadata columns, then the 16 features in
//! canonical order. Feature values are written with 17 significant digits so
//! they read back bit-exactly.

use std::path::Path;

use gwshm_core::features::{FEATURE_COUNT, FEATURE_NAMES};
use gwshm_core::signal::Condition;

use crate::error::{CliError, Result};
use crate::fsutil;

pub const META_COLUMNS: [&str; 6] =
    ["record_id", "path_id", "temperature_c", "condition", "damage_size_mm", "noise_copy"];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub record_id: String,
    pub path_id: String,
    pub temperature_c: f64,
    pub condition: Condition,
    pub damage_size_mm: f64,
    pub noise_copy: u32,
    pub features: [f64; FEATURE_COUNT],
}

pub fn header() -> Vec<&'static str> {
    META_COLUMNS.iter().chain(FEATURE_NAMES.iter()).copied().collect()
}

pub fn to_csv(rows: &[FeatureRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Data(e.to_string());
    w.write_record(header()).map_err(err)?;
    for r in rows {
        let mut rec = vec![
            r.record_id.clone(),
            r.path_id.clone(),
            r.temperature_c.to_string(),
            r.condition.as_str().to_string(),
            r.damage_size_mm.to_string(),
            r.noise_copy.to_string(),
        ];
        rec.extend(r.features.iter().map(|v| format!("{v:.16e}")));
        w.write_record(&rec).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Data(e.to_string()))
}

pub fn write_features_csv(path: &Path, rows: &[FeatureRow]) -> Result<()> {
    fsutil::write_atomic(path, &to_csv(rows)?)
}

pub fn read_features_csv(path: &Path) -> Result<Vec<FeatureRow>> {
    let bytes = fsutil::read(path)?;
    parse_csv(&bytes).map_err(|e| match e {
        CliError::SchemaMismatch(m) => CliError::SchemaMismatch(format!("{}: {m}", path.display())),
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_reader(bytes);
    let found: Vec<String> =
        r.headers().map_err(|e| CliError::Data(e.to_string()))?.iter().map(str::to_string).collect();
    let expected = header();
    if found != expected {
        return Err(CliError::SchemaMismatch(format!(
            "feature table columns [{}] do not match [{}]",
            found.join(","),
            expected.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(e.to_string()))?;
        let at = |msg: String| CliError::Data(format!("row {}: {msg}", line + 1));
        let num = |i: usize| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|_| at(format!("column {} is not a number: {:?}", expected[i], &rec[i])))
        };
        let condition = Condition::parse(&rec[3]).ok_or_else(|| at(format!("unknown condition {:?}", &rec[3])))?;
        let noise_copy = rec[5].parse().map_err(|_| at(format!("bad noise_copy {:?}", &rec[5])))?;
        let mut features = [0.0; FEATURE_COUNT];
        for (j, f) in features.iter_mut().enumerate() {
            *f = num(META_COLUMNS.len() + j)?;
        }
        rows.push(FeatureRow {
            record_id: rec[0].to_string(),
            path_id: rec[1].to_string(),
            temperature_c: num(2)?,
            condition,
            damage_size_mm: num(4)?,
            noise_copy,
            features,
        });
    }
    Ok(rows)
}
