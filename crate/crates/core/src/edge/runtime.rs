use super::format::{EdgeModel, MAX_WIDTH};
use crate::autoencoder::Activation;
use crate::detector::Decision;
use crate::features::FEATURE_COUNT;

/// Ping-pong activation buffers for one inference at a time.
#[derive(Debug, Clone)]
pub struct InferenceScratch {
    a: [f32; MAX_WIDTH],
    b: [f32; MAX_WIDTH],
}

impl InferenceScratch {
    pub const fn new() -> Self {
        InferenceScratch { a: [0.0; MAX_WIDTH], b: [0.0; MAX_WIDTH] }
    }
}

impl Default for InferenceScratch {
    fn default() -> Self {
        Self::new()
    }
}

#[inline]
fn scale(model: &EdgeModel, raw: &[f32; FEATURE_COUNT], j: usize) -> f32 {
    let span = model.max[j] - model.min[j];
    if span > 0.0 {
        2.0 * (raw[j] - model.min[j]) / span - 1.0
    } else {
        0.0
    }
}

#[inline]
fn activate(a: Activation, z: f32) -> f32 {
    match a {
        Activation::Relu => {
            if z > 0.0 {
                z
            } else {
                0.0
            }
        }
        Activation::Linear => z,
    }
}

/// Scales raw features with the embedded scaler, reconstructs them and
/// compares the mean squared reconstruction error with the embedded
/// threshold. Performs no heap allocation.
pub fn edge_infer(model: &EdgeModel, raw: &[f32; FEATURE_COUNT], scratch: &mut InferenceScratch) -> (f32, Decision) {
    let InferenceScratch { a, b } = scratch;
    let (mut src, mut dst) = (a, b);
    for j in 0..FEATURE_COUNT {
        src[j] = scale(model, raw, j);
    }
    for l in &model.layers {
        if l.trainable {
            let w = &model.weights[l.offset..l.offset + l.in_width * l.out_width];
            let bias = &model.weights[l.offset + l.in_width * l.out_width..l.offset + l.parameter_count()];
            for o in 0..l.out_width {
                let row = &w[o * l.in_width..(o + 1) * l.in_width];
                let mut z = bias[o];
                for (wi, xi) in row.iter().zip(&src[..l.in_width]) {
                    z += wi * xi;
                }
                dst[o] = activate(l.activation, z);
            }
        } else {
            for i in 0..l.out_width {
                dst[i] = activate(l.activation, src[i]);
            }
        }
        core::mem::swap(&mut src, &mut dst);
    }
    // The scaled input was overwritten by the first layer; recompute it.
    let mut sum = 0.0f32;
    for j in 0..FEATURE_COUNT {
        let d = scale(model, raw, j) - src[j];
        sum += d * d;
    }
    let error = sum / FEATURE_COUNT as f32;
    let decision = if error > model.threshold { Decision::Damaged } else { Decision::Healthy };
    (error, decision)
}
