//! `GWRC` record files: a 16-byte header followed by f32 samples.
//!
//! Header (little-endian): magic `b"GWRC"`, version u16 (= 1), sample count
//! u32, sample rate u32 in Hz, two reserved zero bytes. Metadata lives in the
//! dataset manifest, not in the record.

use std::path::Path;

use crate::error::{CliError, Result};
use crate::fsutil;

pub const RECORD_MAGIC: [u8; 4] = *b"GWRC";
pub const RECORD_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

pub fn encode_record(samples: &[f64], sample_rate: f64) -> Result<Vec<u8>> {
    if !(sample_rate >= 1.0) || sample_rate > u32::MAX as f64 || sample_rate.fract() != 0.0 {
        return Err(CliError::Data(format!("sample rate {sample_rate} Hz is not a u32 integer")));
    }
    let count = u32::try_from(samples.len()).map_err(|_| CliError::Data("record too long".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * samples.len());
    out.extend_from_slice(&RECORD_MAGIC);
    out.extend_from_slice(&RECORD_VERSION.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&(sample_rate as u32).to_le_bytes());
    out.extend_from_slice(&[0, 0]);
    for &v in samples {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    Ok(out)
}

/// Returns the samples widened to f64 and the sample rate in Hz.
pub fn decode_record(bytes: &[u8]) -> Result<(Vec<f64>, f64)> {
    if bytes.len() < HEADER_LEN || bytes[..4] != RECORD_MAGIC {
        return Err(CliError::Data("not a GWRC record".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != RECORD_VERSION {
        return Err(CliError::Data(format!("unsupported record version {version}")));
    }
    let count = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize;
    let rate = u32::from_le_bytes(bytes[10..14].try_into().expect("4 bytes"));
    if bytes.len() != HEADER_LEN + 4 * count {
        return Err(CliError::Data(format!(
            "record declares {count} samples but holds {} bytes of payload",
            bytes.len() - HEADER_LEN
        )));
    }
    let samples = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    Ok((samples, rate as f64))
}

pub fn write_record(path: &Path, samples: &[f64], sample_rate: f64) -> Result<()> {
    let bytes = encode_record(samples, sample_rate)?;
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_record(path: &Path) -> Result<(Vec<f64>, f64)> {
    decode_record(&fsutil::read(path)?).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}
