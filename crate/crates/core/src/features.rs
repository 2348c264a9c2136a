//! Sixteen time-domain features of a record window, five of them relative to
//! a healthy baseline window of the same path.
//!
//! Integrals over time are realized as plain sums of samples: every feature
//! that contains one is a ratio of two integrals at the same sample period, so
//! the period cancels.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, degenerate, invalid, Result};
use crate::signal::GwRecord;

pub const FEATURE_COUNT: usize = 16;

/// Canonical feature names, in network input order.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "mean",
    "median",
    "mad",
    "variance",
    "std_dev",
    "rms",
    "rmsd",
    "kurtosis",
    "skew",
    "crest_factor",
    "impulse_factor",
    "shape_factor",
    "peak_to_peak_diff",
    "energy_ratio",
    "damage_index",
    "norm_energy_diff",
];

/// Default analysis window: the first 200 us of the record.
pub const DEFAULT_WINDOW_S: f64 = 200e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mean: f64,
    pub median: f64,
    /// Mean absolute deviation about the mean.
    pub mad: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub rms: f64,
    pub rmsd: f64,
    /// Standardized fourth moment (not excess kurtosis).
    pub kurtosis: f64,
    /// 3 (mean - median) / std_dev.
    pub skew: f64,
    pub crest_factor: f64,
    pub impulse_factor: f64,
    pub shape_factor: f64,
    pub peak_to_peak_diff: f64,
    pub energy_ratio: f64,
    pub damage_index: f64,
    pub norm_energy_diff: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.mean,
            self.median,
            self.mad,
            self.variance,
            self.std_dev,
            self.rms,
            self.rmsd,
            self.kurtosis,
            self.skew,
            self.crest_factor,
            self.impulse_factor,
            self.shape_factor,
            self.peak_to_peak_diff,
            self.energy_ratio,
            self.damage_index,
            self.norm_energy_diff,
        ]
    }

    pub fn from_array(a: [f64; FEATURE_COUNT]) -> Self {
        FeatureVector {
            mean: a[0],
            median: a[1],
            mad: a[2],
            variance: a[3],
            std_dev: a[4],
            rms: a[5],
            rmsd: a[6],
            kurtosis: a[7],
            skew: a[8],
            crest_factor: a[9],
            impulse_factor: a[10],
            shape_factor: a[11],
            peak_to_peak_diff: a[12],
            energy_ratio: a[13],
            damage_index: a[14],
            norm_energy_diff: a[15],
        }
    }
}

/// Healthy reference window for the comparative features.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReference {
    samples: Vec<f64>,
    peak_to_peak: f64,
    energy: f64,
}

impl BaselineReference {
    pub fn new(window: &[f64]) -> Result<Self> {
        let energy: f64 = window.iter().map(|v| v * v).sum();
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(degenerate("baseline window has zero energy"));
        }
        Ok(BaselineReference { samples: window.to_vec(), peak_to_peak: peak_to_peak(window), energy })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn peak_to_peak(&self) -> f64 {
        self.peak_to_peak
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }
}

fn peak_to_peak(x: &[f64]) -> f64 {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

/// The first `duration_s` seconds of `record`.
pub fn crop_window(record: &GwRecord, duration_s: f64) -> Result<&[f64]> {
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(invalid("window duration must be positive"));
    }
    let n = (duration_s * record.sample_rate).round() as usize;
    if n == 0 {
        return Err(invalid("window shorter than one sample"));
    }
    if n > record.samples.len() {
        return Err(invalid("record shorter than the analysis window"));
    }
    Ok(&record.samples[..n])
}

/// Median by the odd/even order-statistic rule.
pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn extract_features(window: &[f64], baseline: &BaselineReference) -> Result<FeatureVector> {
    check_len(baseline.samples.len(), window.len())?;
    let n = window.len() as f64;

    let mean = window.iter().sum::<f64>() / n;
    let median = median(window);
    let mad = window.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;
    let variance = window.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std_dev = variance.sqrt();
    let energy: f64 = window.iter().map(|v| v * v).sum();
    let rms = (energy / n).sqrt();
    let abs_mean = window.iter().map(|v| v.abs()).sum::<f64>() / n;
    let peak = window.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // A constant window leaves only summation rounding in the variance.
    if !(std_dev > 1e-12 * peak) {
        return Err(degenerate("window has zero standard deviation"));
    }
    let kurtosis = window
        .iter()
        .map(|v| {
            let z = (v - mean) / std_dev;
            z * z * z * z
        })
        .sum::<f64>()
        / n;

    let diff_energy: f64 = window.iter().zip(&baseline.samples).map(|(f, b)| (f - b) * (f - b)).sum();
    let damage_index = diff_energy / baseline.energy;

    let fv = FeatureVector {
        mean,
        median,
        mad,
        variance,
        std_dev,
        rms,
        rmsd: damage_index.sqrt(),
        kurtosis,
        skew: 3.0 * (mean - median) / std_dev,
        crest_factor: peak / rms,
        impulse_factor: peak / abs_mean,
        shape_factor: rms / abs_mean,
        peak_to_peak_diff: peak_to_peak(window) - baseline.peak_to_peak,
        energy_ratio: energy / baseline.energy,
        damage_index,
        norm_energy_diff: (energy - baseline.energy) / baseline.energy,
    };
    if fv.to_array().iter().any(|v| !v.is_finite()) {
        return Err(degenerate("non-finite feature"));
    }
    Ok(fv)
}

/// Per-feature min-max map onto [-1, 1], learned from training vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    pub min: [f64; FEATURE_COUNT],
    pub max: [f64; FEATURE_COUNT],
}

impl FeatureScaler {
    pub fn fit(vectors: &[[f64; FEATURE_COUNT]]) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(crate::Error::TooFewSamples { needed: 2, got: vectors.len() });
        }
        let mut min = [f64::INFINITY; FEATURE_COUNT];
        let mut max = [f64::NEG_INFINITY; FEATURE_COUNT];
        for v in vectors {
            for j in 0..FEATURE_COUNT {
                min[j] = min[j].min(v[j]);
                max[j] = max[j].max(v[j]);
            }
        }
        Ok(FeatureScaler { min, max })
    }

    /// Affine map; values outside the training range are not clipped and a
    /// constant training column maps to 0.
    pub fn apply(&self, v: &[f64; FEATURE_COUNT]) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        for j in 0..FEATURE_COUNT {
            let span = self.max[j] - self.min[j];
            out[j] = if span > 0.0 { 2.0 * (v[j] - self.min[j]) / span - 1.0 } else { 0.0 };
        }
        out
    }
}

/// Fits a scaler on `vectors`.
pub fn fit_scaler(vectors: &[FeatureVector]) -> Result<FeatureScaler> {
    let arrays: Vec<[f64; FEATURE_COUNT]> = vectors.iter().map(FeatureVector::to_array).collect();
    FeatureScaler::fit(&arrays)
}

pub fn apply_scaler(scaler: &FeatureScaler, vector: &FeatureVector) -> [f64; FEATURE_COUNT] {
    scaler.apply(&vector.to_array())
}
