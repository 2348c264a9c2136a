//! The `GWAE` edge model image.
//!
//! All integers and floats are little-endian.
//!
//! | field          | type                                      |
//! |----------------|-------------------------------------------|
//! | magic          | `b"GWAE"`                                 |
//! | version        | u16 (= 1)                                 |
//! | layer count    | u16                                       |
//! | layer headers  | per layer: in u16, out u16, trainable u8, activation u8 (0 linear, 1 relu) |
//! | scaler         | 16 x f32 min, then 16 x f32 max           |
//! | payload        | per trainable layer: out x in f32 weights (row-major), then out f32 biases |
//! | threshold      | f32                                       |
//! | crc            | u32, CRC-32 (IEEE) of every preceding byte |

use alloc::vec::Vec;

use crate::autoencoder::Activation;
use crate::detector::AnomalyDetector;
use crate::error::{invalid, Result};
use crate::features::FEATURE_COUNT;

pub const MAGIC: [u8; 4] = *b"GWAE";
pub const FORMAT_VERSION: u16 = 1;
/// Widest layer the fixed inference scratch can hold.
pub const MAX_WIDTH: usize = 64;

const PREAMBLE_LEN: usize = 8;
const LAYER_HEADER_LEN: usize = 6;
const SCALER_LEN: usize = 2 * FEATURE_COUNT * 4;
const CRC_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ImageError {
    #[error("bad-magic: image does not start with GWAE")]
    BadMagic,
    #[error("bad-version: unsupported format version {0}")]
    BadVersion(u16),
    #[error("bad-crc: stored {stored:#010x}, computed {computed:#010x}")]
    BadCrc { stored: u32, computed: u32 },
    #[error("inconsistent-dimensions: {0}")]
    InconsistentDimensions(&'static str),
}

impl ImageError {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            ImageError::BadMagic => "bad-magic",
            ImageError::BadVersion(_) => "bad-version",
            ImageError::BadCrc { .. } => "bad-crc",
            ImageError::InconsistentDimensions(_) => "inconsistent-dimensions",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeLayer {
    pub in_width: usize,
    pub out_width: usize,
    pub trainable: bool,
    pub activation: Activation,
    /// Start of this layer's weights in [`EdgeModel::weights`].
    pub offset: usize,
}

impl EdgeLayer {
    pub fn parameter_count(&self) -> usize {
        if self.trainable {
            self.in_width * self.out_width + self.out_width
        } else {
            0
        }
    }
}

/// A loaded image. Immutable; share it freely and give each thread its own
/// [`InferenceScratch`](super::InferenceScratch).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeModel {
    pub(crate) layers: Vec<EdgeLayer>,
    pub(crate) weights: Vec<f32>,
    pub(crate) min: [f32; FEATURE_COUNT],
    pub(crate) max: [f32; FEATURE_COUNT],
    pub(crate) threshold: f32,
}

impl EdgeModel {
    pub fn layers(&self) -> &[EdgeLayer] {
        &self.layers
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn scaler_min(&self) -> &[f32; FEATURE_COUNT] {
        &self.min
    }

    pub fn scaler_max(&self) -> &[f32; FEATURE_COUNT] {
        &self.max
    }

    pub fn threshold(&self) -> f32 {
        self.threshold
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len()
    }

    /// Re-encodes the model; `load(bytes)?.to_bytes() == bytes` for any valid image.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(image_len(self.layers.len(), self.weights.len()));
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.layers.len() as u16).to_le_bytes());
        for l in &self.layers {
            out.extend_from_slice(&(l.in_width as u16).to_le_bytes());
            out.extend_from_slice(&(l.out_width as u16).to_le_bytes());
            out.push(l.trainable as u8);
            out.push(activation_tag(l.activation));
        }
        for v in self.min.iter().chain(&self.max).chain(&self.weights) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.threshold.to_le_bytes());
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }
}

/// Total image size in bytes for `layers` layers and `params` parameters.
pub fn image_len(layers: usize, params: usize) -> usize {
    PREAMBLE_LEN + LAYER_HEADER_LEN * layers + SCALER_LEN + 4 * params + 4 + CRC_LEN
}

fn activation_tag(a: Activation) -> u8 {
    match a {
        Activation::Linear => 0,
        Activation::Relu => 1,
    }
}

/// Converts a trained detector into an edge model (weights rounded to f32).
pub fn edge_model(detector: &AnomalyDetector) -> Result<EdgeModel> {
    let model = detector.model();
    if model.input_width() != FEATURE_COUNT {
        return Err(invalid("edge models take exactly 16 features"));
    }
    if model.max_width() > MAX_WIDTH {
        return Err(invalid("layer wider than the edge scratch buffers"));
    }
    if model.layers().len() > u16::MAX as usize {
        return Err(invalid("too many layers for the image header"));
    }
    let layers = model
        .layers()
        .iter()
        .map(|l| EdgeLayer {
            in_width: l.in_width,
            out_width: l.out_width,
            trainable: l.trainable,
            activation: l.activation,
            offset: l.offset,
        })
        .collect();
    let s = detector.scaler();
    Ok(EdgeModel {
        layers,
        weights: model.params().iter().map(|&v| v as f32).collect(),
        min: s.min.map(|v| v as f32),
        max: s.max.map(|v| v as f32),
        threshold: detector.threshold() as f32,
    })
}

/// Serializes a detector to image bytes. Deterministic for a given detector.
pub fn serialize(detector: &AnomalyDetector) -> Result<Vec<u8>> {
    Ok(edge_model(detector)?.to_bytes())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> core::result::Result<[u8; N], ImageError> {
        let end = self.pos + N;
        let chunk =
            self.bytes.get(self.pos..end).ok_or(ImageError::InconsistentDimensions("image ends inside a field"))?;
        self.pos = end;
        Ok(chunk.try_into().expect("length checked"))
    }

    fn u16(&mut self) -> core::result::Result<u16, ImageError> {
        self.take::<2>().map(u16::from_le_bytes)
    }

    fn f32(&mut self) -> core::result::Result<f32, ImageError> {
        self.take::<4>().map(f32::from_le_bytes)
    }
}

/// Parses and validates an image: magic, version, CRC, then layer geometry
/// and exact length.
pub fn load(bytes: &[u8]) -> core::result::Result<EdgeModel, ImageError> {
    use ImageError::*;
    if bytes.len() < MAGIC.len() {
        return Err(InconsistentDimensions("image shorter than its header"));
    }
    if bytes[..4] != MAGIC {
        return Err(BadMagic);
    }
    if bytes.len() < PREAMBLE_LEN + CRC_LEN {
        return Err(InconsistentDimensions("image shorter than its header"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(BadVersion(version));
    }
    let (body, tail) = bytes.split_at(bytes.len() - CRC_LEN);
    let stored = u32::from_le_bytes(tail.try_into().expect("four bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(BadCrc { stored, computed });
    }

    let mut r = Reader { bytes: body, pos: 6 };
    let count = r.u16()? as usize;
    if count == 0 {
        return Err(InconsistentDimensions("image declares no layers"));
    }
    let mut layers = Vec::with_capacity(count);
    let mut offset = 0;
    let mut prev_out = FEATURE_COUNT;
    for _ in 0..count {
        let in_width = r.u16()? as usize;
        let out_width = r.u16()? as usize;
        let [trainable, activation] = r.take::<2>()?;
        let trainable = match trainable {
            0 => false,
            1 => true,
            _ => return Err(InconsistentDimensions("trainable flag is not 0 or 1")),
        };
        let activation = match activation {
            0 => Activation::Linear,
            1 => Activation::Relu,
            _ => return Err(InconsistentDimensions("unknown activation tag")),
        };
        if in_width == 0 || out_width == 0 || in_width > MAX_WIDTH || out_width > MAX_WIDTH {
            return Err(InconsistentDimensions("layer width outside 1..=64"));
        }
        if in_width != prev_out {
            return Err(InconsistentDimensions("layer widths do not chain"));
        }
        if !trainable && in_width != out_width {
            return Err(InconsistentDimensions("pass-through layer changes width"));
        }
        let layer = EdgeLayer { in_width, out_width, trainable, activation, offset };
        offset += layer.parameter_count();
        prev_out = out_width;
        layers.push(layer);
    }
    if prev_out != FEATURE_COUNT {
        return Err(InconsistentDimensions("output width is not 16"));
    }
    if bytes.len() != image_len(count, offset) {
        return Err(InconsistentDimensions("image length does not match its layers"));
    }

    let mut min = [0.0f32; FEATURE_COUNT];
    let mut max = [0.0f32; FEATURE_COUNT];
    for v in min.iter_mut().chain(max.iter_mut()) {
        *v = r.f32()?;
    }
    let mut weights = Vec::with_capacity(offset);
    for _ in 0..offset {
        weights.push(r.f32()?);
    }
    let threshold = r.f32()?;
    Ok(EdgeModel { layers, weights, min, max, threshold })
}
