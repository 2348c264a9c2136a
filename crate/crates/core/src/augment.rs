//! Record normalization and noise augmentation.
//!
//! Noise is a mix of white Gaussian noise and pink (1/f) noise. Pink noise is
//! made by spectral shaping: a white Gaussian sequence is transformed, each
//! positive-frequency bin k is scaled by 1/sqrt(k), the DC bin is zeroed, and
//! the inverse transform is rescaled to the requested power.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{degenerate, invalid, Result};
use crate::fft::fft;
use crate::rng::{derive_seed, rng_from, stream};
use crate::signal::GwRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// Target signal-to-noise power ratio. `+inf` (JSON `null`) disables noise.
    #[serde(serialize_with = "ser_snr", deserialize_with = "de_snr")]
    pub snr_db: f64,
    /// Share of the noise power carried by pink noise.
    pub pink_fraction: f64,
    pub copies: u32,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { snr_db: 20.0, pink_fraction: 0.5, copies: 50 }
    }
}

fn ser_snr<S: Serializer>(v: &f64, s: S) -> core::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_none()
    } else {
        s.serialize_f64(*v)
    }
}

fn de_snr<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(invalid("snr_db must be finite or +inf"));
        }
        if !(0.0..=1.0).contains(&self.pink_fraction) {
            return Err(invalid("pink_fraction must lie in [0, 1]"));
        }
        if self.copies == 0 {
            return Err(invalid("at least one noise copy is required"));
        }
        Ok(())
    }

    pub fn noise_disabled(&self) -> bool {
        self.snr_db == f64::INFINITY
    }
}

/// Scales `record` so its largest absolute sample is 1.
pub fn normalize(record: &GwRecord) -> Result<GwRecord> {
    let peak = record.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(degenerate("cannot normalize an all-zero record"));
    }
    let mut out = record.clone();
    if peak != 1.0 {
        for v in &mut out.samples {
            *v /= peak;
        }
    }
    Ok(out)
}

/// Mean square of `x`, the power convention used throughout augmentation.
pub fn mean_power(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

/// Zero-mean Gaussian samples with variance `power`.
pub fn white_noise(n: usize, power: f64, seed: u64) -> Result<Vec<f64>> {
    check_noise_args(n, power)?;
    if power == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let sd = power.sqrt();
    let mut rng = rng_from(seed, &[stream::WHITE]);
    Ok((0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect())
}

/// Zero-mean 1/f noise whose mean square is exactly `power`.
pub fn pink_noise(n: usize, power: f64, seed: u64) -> Result<Vec<f64>> {
    check_noise_args(n, power)?;
    if power == 0.0 {
        return Ok(vec![0.0; n]);
    }
    if n == 1 {
        // A single sample cannot be both zero-mean and carry power.
        return Err(invalid("pink noise needs at least two samples"));
    }
    let m = n.next_power_of_two();
    let mut rng = rng_from(seed, &[stream::PINK]);
    let mut buf: Vec<Complex64> = (0..m).map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), 0.0)).collect();
    fft(&mut buf, false);
    buf[0] = Complex64::new(0.0, 0.0);
    for k in 1..m {
        // Mirror bins share the positive frequency index so the output stays real.
        let f = k.min(m - k) as f64;
        buf[k] *= 1.0 / f.sqrt();
    }
    fft(&mut buf, true);
    let mut out: Vec<f64> = buf[..n].iter().map(|c| c.re).collect();
    let mean = out.iter().sum::<f64>() / n as f64;
    for v in &mut out {
        *v -= mean;
    }
    let p = mean_power(&out);
    if !(p > 0.0) {
        return Err(degenerate("pink shaping produced a zero sequence"));
    }
    let scale = (power / p).sqrt();
    for v in &mut out {
        *v *= scale;
    }
    Ok(out)
}

fn check_noise_args(n: usize, power: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("noise length must be positive"));
    }
    if !(power >= 0.0) || !power.is_finite() {
        return Err(invalid(format!("noise power {power} must be finite and non-negative")));
    }
    Ok(())
}

fn rescale_to(x: &mut [f64], power: f64) {
    let p = mean_power(x);
    if p > 0.0 {
        let s = (power / p).sqrt();
        for v in x.iter_mut() {
            *v *= s;
        }
    }
}

/// The additive noise that [`add_noise_at_snr`] mixes into `record`.
///
/// Both components are rescaled to their exact power share, so the realized
/// SNR over the full record equals the target up to rounding.
pub fn noise_component(record: &GwRecord, spec: &NoiseSpec, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = record.samples.len();
    if spec.noise_disabled() {
        return Ok(vec![0.0; n]);
    }
    let signal_power = mean_power(&record.samples);
    if !(signal_power > 0.0) {
        return Err(degenerate("cannot set an SNR on a zero-power record"));
    }
    let noise_power = signal_power / 10f64.powf(spec.snr_db / 10.0);
    let pink_power = noise_power * spec.pink_fraction;
    let white_power = noise_power - pink_power;

    let mut noise = vec![0.0; n];
    if white_power > 0.0 {
        let mut w = white_noise(n, white_power, seed)?;
        rescale_to(&mut w, white_power);
        noise.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
    }
    if pink_power > 0.0 {
        let p = pink_noise(n, pink_power, seed)?;
        noise.iter_mut().zip(&p).for_each(|(a, b)| *a += b);
    }
    Ok(noise)
}

/// Returns a noisy copy of a clean record at `spec.snr_db`.
pub fn add_noise_at_snr(record: &GwRecord, spec: &NoiseSpec, seed: u64, copy: u32) -> Result<GwRecord> {
    if copy == 0 {
        return Err(invalid("noise copy index 0 is reserved for clean records"));
    }
    if record.noise_copy != 0 {
        return Err(invalid("noise is only added to clean records"));
    }
    let noise = noise_component(record, spec, seed)?;
    let mut out = record.clone();
    out.samples.iter_mut().zip(&noise).for_each(|(s, n)| *s += n);
    out.noise_copy = copy;
    Ok(out)
}

/// Seed for copy `copy` (1-based) of clean record `index`.
pub fn copy_seed(seed: u64, index: usize, copy: u32) -> u64 {
    derive_seed(seed, &[stream::NOISE, index as u64, copy as u64])
}

/// `spec.copies` noisy copies of every record, record-major.
pub fn augment_dataset(records: &[GwRecord], spec: &NoiseSpec, seed: u64) -> Result<Vec<GwRecord>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(records.len() * spec.copies as usize);
    for (i, r) in records.iter().enumerate() {
        for c in 1..=spec.copies {
            out.push(add_noise_at_snr(r, spec, copy_seed(seed, i, c), c)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{DamageSpec, EnvCondition, PathSpec};

    fn rec(samples: Vec<f64>) -> GwRecord {
        GwRecord {
            samples,
            sample_rate: 10e6,
            path: PathSpec::new("p", 180.0),
            env: EnvCondition { temperature_c: 30.0 },
            damage: DamageSpec::NONE,
            noise_copy: 0,
        }
    }

    fn tone(n: usize) -> GwRecord {
        rec((0..n).map(|i| (i as f64 * 0.047).sin() * (i as f64 / n as f64)).collect())
    }

    #[test]
    fn normalize_examples() {
        let r = normalize(&rec(vec![0.0, 0.5, -2.0])).unwrap();
        assert_eq!(r.samples, vec![0.0, 0.25, -1.0]);
        assert_eq!(normalize(&r).unwrap(), r);
        assert!(matches!(normalize(&rec(vec![0.0; 8])), Err(crate::Error::DegenerateInput(_))));
    }

    #[test]
    fn zero_power_noise_is_zero() {
        assert!(white_noise(16, 0.0, 1).unwrap().iter().all(|v| *v == 0.0));
        assert!(pink_noise(16, 0.0, 1).unwrap().iter().all(|v| *v == 0.0));
        assert!(white_noise(0, 1.0, 1).is_err());
        assert!(pink_noise(8, -1.0, 1).is_err());
    }

    #[test]
    fn white_variance_within_chi_square_bound() {
        // sd of the variance estimate is sqrt(2/n) ~ 0.0055 at n = 2^16.
        let x = white_noise(1 << 16, 1.0, 42).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64;
        assert!((0.97..=1.03).contains(&var), "variance {var}");
    }

    #[test]
    fn noise_is_deterministic() {
        assert_eq!(white_noise(100, 2.0, 5).unwrap(), white_noise(100, 2.0, 5).unwrap());
        assert_eq!(pink_noise(100, 2.0, 5).unwrap(), pink_noise(100, 2.0, 5).unwrap());
        assert_ne!(pink_noise(100, 2.0, 5).unwrap(), pink_noise(100, 2.0, 6).unwrap());
    }

    #[test]
    fn pink_power_and_mean() {
        for n in [1000usize, 4096, 5000] {
            let x = pink_noise(n, 0.25, 3).unwrap();
            let mean = x.iter().sum::<f64>() / n as f64;
            assert!(mean.abs() < 1e-12);
            assert!((mean_power(&x) - 0.25).abs() < 0.25 * 0.02);
        }
    }

    #[test]
    fn infinite_snr_is_identity() {
        let r = tone(2048);
        let spec = NoiseSpec { snr_db: f64::INFINITY, ..NoiseSpec::default() };
        let out = add_noise_at_snr(&r, &spec, 1, 1).unwrap();
        assert_eq!(out.samples, r.samples);
        assert_eq!(out.noise_copy, 1);
    }

    #[test]
    fn realized_snr_matches_target() {
        let r = tone(4096);
        for snr in [0.0, 20.0] {
            let spec = NoiseSpec { snr_db: snr, ..NoiseSpec::default() };
            let noise = noise_component(&r, &spec, 11).unwrap();
            let ratio = mean_power(&r.samples) / mean_power(&noise);
            assert!((10.0 * ratio.log10() - snr).abs() < 0.5);
            if snr == 0.0 {
                assert!((ratio - 1.0).abs() < 0.02);
            }
            let noisy = add_noise_at_snr(&r, &spec, 11, 3).unwrap();
            for ((a, b), n) in noisy.samples.iter().zip(&r.samples).zip(&noise) {
                assert_eq!(*a, b + n);
            }
        }
    }

    #[test]
    fn zero_power_record_rejected() {
        let r = rec(vec![0.0; 64]);
        assert!(matches!(add_noise_at_snr(&r, &NoiseSpec::default(), 1, 1), Err(crate::Error::DegenerateInput(_))));
    }

    #[test]
    fn augment_counts_and_copy_indices() {
        let recs: Vec<GwRecord> = (0..3).map(|_| tone(256)).collect();
        let spec = NoiseSpec { copies: 4, ..NoiseSpec::default() };
        let out = augment_dataset(&recs, &spec, 8).unwrap();
        assert_eq!(out.len(), 12);
        let copies: Vec<u32> = out.iter().map(|r| r.noise_copy).collect();
        assert_eq!(copies, vec![1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4]);
        let one = augment_dataset(&recs, &NoiseSpec { copies: 1, ..spec }, 8).unwrap();
        assert_eq!(one.len(), 3);
    }

    fn rho(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        dot / (mean_power(a) * mean_power(b)).sqrt() / a.len() as f64
    }

    #[test]
    fn distinct_copies_are_uncorrelated() {
        // Per pair only the white part is tight enough for |rho| < 0.05: lag-0
        // correlation of two 1/f sequences has a far wider spread at n = 4096.
        for c in 1..50u32 {
            let a = white_noise(4096, 1.0, copy_seed(1, 0, c)).unwrap();
            let b = white_noise(4096, 1.0, copy_seed(1, 0, c + 1)).unwrap();
            assert!(rho(&a, &b).abs() < 0.05);
        }
        let r = tone(4096);
        let spec = NoiseSpec::default();
        let mean = (0..200u32)
            .map(|c| {
                let a = noise_component(&r, &spec, copy_seed(2, 0, 2 * c + 1)).unwrap();
                let b = noise_component(&r, &spec, copy_seed(2, 0, 2 * c + 2)).unwrap();
                rho(&a, &b)
            })
            .sum::<f64>()
            / 200.0;
        assert!(mean.abs() < 0.05, "mean rho {mean}");
    }

    #[test]
    fn json_null_snr_means_disabled() {
        let s: NoiseSpec = serde_json::from_str(r#"{"snr_db":null}"#).unwrap();
        assert!(s.noise_disabled());
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"snr_db":null,"pink_fraction":0.5,"copies":50}"#);
    }
}
