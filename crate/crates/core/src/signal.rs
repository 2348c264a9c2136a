//! Synthetic guided-wave records.
//!
//! A record is the sum of two delayed, scaled copies of a Hanning-windowed tone
//! burst: the damage-sensitive A0 wavepacket and a faster, weaker companion
//! arrival that stands in for the other modes present in the analysis window.
//! Temperature changes both amplitude and group velocity linearly; damage on
//! the path changes the A0 amplitude and velocity in proportion to its size,
//! upward for a disbond (LFA) and downward for a delamination (TRF).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A windowed sine excitation with its peak normalized to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneBurst {
    pub center_frequency: f64,
    pub cycles: u32,
    pub sample_rate: f64,
    pub samples: Vec<f64>,
}

impl ToneBurst {
    /// Duration between the first and last sample, in seconds.
    pub fn span(&self) -> f64 {
        (self.samples.len().saturating_sub(1)) as f64 / self.sample_rate
    }

    /// Catmull-Rom interpolation of the burst at fractional sample `pos`.
    /// Samples outside the burst are zero. The value is linear in the burst
    /// samples, so scaling the excitation scales every received sample.
    fn interpolate(&self, pos: f64) -> f64 {
        let n = self.samples.len();
        if n == 0 || pos <= 0.0 || pos >= (n - 1) as f64 {
            return 0.0;
        }
        let i = pos.floor() as isize;
        let t = pos - i as f64;
        let at = |k: isize| -> f64 {
            if k < 0 || k as usize >= n {
                0.0
            } else {
                self.samples[k as usize]
            }
        };
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let t2 = t * t;
        let t3 = t2 * t;
        0.5 * (2.0 * p1
            + (p2 - p0) * t
            + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2
            + (3.0 * p1 - p0 - 3.0 * p2 + p3) * t3)
    }
}

/// Builds a `cycles`-cycle Hanning-windowed sine at `center_frequency`.
pub fn hanning_tone_burst(center_frequency: f64, cycles: u32, sample_rate: f64) -> Result<ToneBurst> {
    if !(center_frequency > 0.0) || !center_frequency.is_finite() {
        return Err(invalid("center frequency must be positive"));
    }
    if !(sample_rate > 0.0) || !sample_rate.is_finite() {
        return Err(invalid("sample rate must be positive"));
    }
    if cycles == 0 {
        return Err(invalid("tone burst needs at least one cycle"));
    }
    if sample_rate < 10.0 * center_frequency {
        return Err(invalid(format!(
            "sample rate {sample_rate} Hz undersamples a {center_frequency} Hz burst (need >= 10x)"
        )));
    }
    let n = (cycles as f64 / center_frequency * sample_rate).round() as usize;
    let denom = (n - 1) as f64;
    let mut samples: Vec<f64> = (0..n)
        .map(|i| {
            let w = 0.5 * (1.0 - (2.0 * PI * i as f64 / denom).cos());
            w * (2.0 * PI * center_frequency * i as f64 / sample_rate).sin()
        })
        .collect();
    // Window endpoints are zero analytically; keep them exact under rounding.
    samples[0] = 0.0;
    samples[n - 1] = 0.0;
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for v in &mut samples {
        *v /= peak;
    }
    Ok(ToneBurst { center_frequency, cycles, sample_rate, samples })
}

/// Ground-truth state of the structure along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Baseline,
    /// Delamination (teflon release film insert).
    Trf,
    /// Disbond (lack of film adhesive).
    Lfa,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Baseline => "baseline",
            Condition::Trf => "trf",
            Condition::Lfa => "lfa",
        }
    }

    pub fn parse(s: &str) -> Option<Condition> {
        match s {
            "baseline" => Some(Condition::Baseline),
            "trf" => Some(Condition::Trf),
            "lfa" => Some(Condition::Lfa),
            _ => None,
        }
    }

    /// +1 for damage that speeds up and strengthens A0, -1 for damage that
    /// slows and weakens it, 0 for none.
    pub fn damage_sign(self) -> f64 {
        match self {
            Condition::Baseline => 0.0,
            Condition::Trf => -1.0,
            Condition::Lfa => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvCondition {
    pub temperature_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamageSpec {
    pub kind: Condition,
    pub size_mm: f64,
}

impl DamageSpec {
    pub const NONE: DamageSpec = DamageSpec { kind: Condition::Baseline, size_mm: 0.0 };

    pub fn new(kind: Condition, size_mm: f64) -> Result<Self> {
        let spec = DamageSpec { kind, size_mm };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            Condition::Baseline if self.size_mm != 0.0 => Err(invalid("undamaged path must have damage size 0")),
            Condition::Trf | Condition::Lfa if !(1.0..=50.0).contains(&self.size_mm) => {
                Err(invalid(format!("damage size {} mm outside [1, 50] mm", self.size_mm)))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub path_id: String,
    #[serde(default = "default_distance")]
    pub tx_rx_distance_mm: f64,
}

fn default_distance() -> f64 {
    180.0
}

impl PathSpec {
    pub fn new(path_id: impl Into<String>, tx_rx_distance_mm: f64) -> Self {
        PathSpec { path_id: path_id.into(), tx_rx_distance_mm }
    }
}

/// Coefficients of the delay-and-scale propagation model.
///
/// The damage gains are magnitudes per millimetre; the sign comes from the
/// damage kind (positive for LFA, negative for TRF).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagationParams {
    /// A0 group velocity at the reference temperature, km/s.
    pub v0_km_s: f64,
    /// Fractional amplitude loss per degree C above the reference.
    pub alpha_amp_temp: f64,
    /// Fractional velocity change per degree C above the reference.
    pub beta_vel_temp: f64,
    pub damage_amp_gain: f64,
    pub damage_vel_gain: f64,
    pub reference_temperature_c: f64,
    /// Amplitude of the companion arrival relative to an undamaged A0 packet.
    pub secondary_mode_ratio: f64,
    /// Companion group velocity as a multiple of the A0 velocity.
    pub secondary_velocity_factor: f64,
}

impl Default for PropagationParams {
    fn default() -> Self {
        PropagationParams {
            v0_km_s: 1.061,
            alpha_amp_temp: 0.003,
            beta_vel_temp: -0.0005,
            damage_amp_gain: 0.01,
            damage_vel_gain: 0.002,
            reference_temperature_c: 30.0,
            secondary_mode_ratio: 0.3,
            secondary_velocity_factor: 3.0,
        }
    }
}

impl PropagationParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.v0_km_s,
            self.alpha_amp_temp,
            self.beta_vel_temp,
            self.damage_amp_gain,
            self.damage_vel_gain,
            self.reference_temperature_c,
            self.secondary_mode_ratio,
            self.secondary_velocity_factor,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(invalid("propagation parameters must be finite"));
        }
        if self.v0_km_s <= 0.0 {
            return Err(invalid("v0 must be positive"));
        }
        if self.alpha_amp_temp <= 0.0 {
            return Err(invalid("alpha_amp_temp must be positive"));
        }
        if self.secondary_mode_ratio < 0.0 {
            return Err(invalid("secondary_mode_ratio must be non-negative"));
        }
        if self.secondary_velocity_factor <= 1.0 {
            return Err(invalid("secondary arrival must be faster than A0"));
        }
        Ok(())
    }

    fn temperature_amplitude(&self, env: &EnvCondition) -> f64 {
        1.0 - self.alpha_amp_temp * (env.temperature_c - self.reference_temperature_c)
    }

    fn temperature_velocity(&self, env: &EnvCondition) -> f64 {
        1.0 + self.beta_vel_temp * (env.temperature_c - self.reference_temperature_c)
    }

    /// A0 amplitude factor A(T, d).
    pub fn a0_amplitude(&self, env: &EnvCondition, damage: &DamageSpec) -> f64 {
        self.temperature_amplitude(env) * (1.0 + damage.kind.damage_sign() * self.damage_amp_gain * damage.size_mm)
    }

    /// A0 group velocity v(T, d) in m/s.
    pub fn a0_velocity(&self, env: &EnvCondition, damage: &DamageSpec) -> f64 {
        self.v0_km_s
            * 1000.0
            * self.temperature_velocity(env)
            * (1.0 + damage.kind.damage_sign() * self.damage_vel_gain * damage.size_mm)
    }
}

/// One captured or synthesized time series with its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct GwRecord {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub path: PathSpec,
    pub env: EnvCondition,
    pub damage: DamageSpec,
    /// 0 for a clean record, 1.. for noise-augmented copies.
    pub noise_copy: u32,
}

impl GwRecord {
    pub fn condition_label(&self) -> Condition {
        self.damage.kind
    }
}

/// Simulates the response received over `path` to `burst`.
///
/// The A0 packet's centre arrives at `distance / v(T, d)`; the companion
/// arrival travels `secondary_velocity_factor` times faster and carries only
/// the temperature amplitude factor. The record is zero outside the packets.
pub fn propagate(
    burst: &ToneBurst,
    path: &PathSpec,
    env: EnvCondition,
    damage: DamageSpec,
    params: &PropagationParams,
    record_length: usize,
) -> Result<GwRecord> {
    params.validate()?;
    damage.validate()?;
    if !(path.tx_rx_distance_mm > 0.0) {
        return Err(invalid("tx-rx distance must be positive"));
    }
    if !env.temperature_c.is_finite() {
        return Err(invalid("temperature must be finite"));
    }
    let amp = params.a0_amplitude(&env, &damage);
    let vel = params.a0_velocity(&env, &damage);
    if amp <= 0.0 || vel <= 0.0 {
        return Err(invalid(format!("amplitude ({amp}) and velocity ({vel}) factors must stay positive")));
    }
    let temp_amp = params.temperature_amplitude(&env);
    let fs = burst.sample_rate;
    let distance_m = path.tx_rx_distance_mm * 1e-3;
    let half_span = burst.span() / 2.0;
    let a0_arrival = distance_m / vel;
    let capture = record_length as f64 / fs;
    if a0_arrival + half_span > capture {
        return Err(invalid(format!(
            "A0 packet ends at {:.1} us, beyond the {:.1} us capture window",
            (a0_arrival + half_span) * 1e6,
            capture * 1e6
        )));
    }
    let secondary_vel = params.v0_km_s * 1000.0 * params.temperature_velocity(&env) * params.secondary_velocity_factor;
    let secondary_arrival = distance_m / secondary_vel;
    let secondary_amp = params.secondary_mode_ratio * temp_amp;

    let mut samples = vec![0.0; record_length];
    add_packet(&mut samples, burst, a0_arrival - half_span, amp);
    if secondary_amp != 0.0 {
        add_packet(&mut samples, burst, secondary_arrival - half_span, secondary_amp);
    }
    Ok(GwRecord { samples, sample_rate: fs, path: path.clone(), env, damage, noise_copy: 0 })
}

fn add_packet(out: &mut [f64], burst: &ToneBurst, start_s: f64, amplitude: f64) {
    let fs = burst.sample_rate;
    let offset = start_s * fs;
    let first = offset.floor().max(0.0) as usize;
    let last = ((offset + burst.samples.len() as f64).ceil() as usize).min(out.len());
    for (i, slot) in out.iter_mut().enumerate().take(last).skip(first) {
        *slot += amplitude * burst.interpolate(i as f64 - offset);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_burst() -> ToneBurst {
        hanning_tone_burst(75e3, 5, 10e6).unwrap()
    }

    fn record(temp: f64, damage: DamageSpec, params: &PropagationParams) -> GwRecord {
        propagate(
            &default_burst(),
            &PathSpec::new("p", 180.0),
            EnvCondition { temperature_c: temp },
            damage,
            params,
            4096,
        )
        .unwrap()
    }

    #[test]
    fn burst_shape() {
        let b = default_burst();
        assert_eq!(b.samples.len(), 667);
        assert_eq!(b.samples[0], 0.0);
        assert_eq!(*b.samples.last().unwrap(), 0.0);
        let peak = b.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 1.0).abs() < 1e-15);
        assert!(b.samples.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn burst_rejects_bad_arguments() {
        assert!(hanning_tone_burst(0.0, 5, 10e6).is_err());
        assert!(hanning_tone_burst(75e3, 0, 10e6).is_err());
        assert!(hanning_tone_burst(75e3, 5, -1.0).is_err());
        assert!(hanning_tone_burst(75e3, 5, 500e3).is_err());
    }

    #[test]
    fn undamaged_at_reference_is_the_reference_record() {
        let p = PropagationParams::default();
        let a = record(30.0, DamageSpec::NONE, &p);
        let b = record(30.0, DamageSpec::new(Condition::Baseline, 0.0).unwrap(), &p);
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.condition_label(), Condition::Baseline);
    }

    #[test]
    fn negated_excitation_negates_record() {
        let mut neg = default_burst();
        for v in &mut neg.samples {
            *v = -*v;
        }
        let p = PropagationParams::default();
        let env = EnvCondition { temperature_c: 55.0 };
        let path = PathSpec::new("p", 180.0);
        let dmg = DamageSpec::new(Condition::Lfa, 12.0).unwrap();
        let a = propagate(&default_burst(), &path, env, dmg, &p, 4096).unwrap();
        let b = propagate(&neg, &path, env, dmg, &p, 4096).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn arrival_beyond_capture_is_rejected() {
        let r = propagate(
            &default_burst(),
            &PathSpec::new("p", 400.0),
            EnvCondition { temperature_c: 30.0 },
            DamageSpec::NONE,
            &PropagationParams::default(),
            4096,
        );
        assert!(matches!(r, Err(crate::Error::InvalidArgument(_))));
    }

    #[test]
    fn damage_spec_invariants() {
        assert!(DamageSpec::new(Condition::Baseline, 5.0).is_err());
        assert!(DamageSpec::new(Condition::Trf, 0.0).is_err());
        assert!(DamageSpec::new(Condition::Lfa, 51.0).is_err());
        assert!(DamageSpec::new(Condition::Lfa, 20.0).is_ok());
    }

    #[test]
    fn damage_sign_convention_on_model_factors() {
        let p = PropagationParams::default();
        let env = EnvCondition { temperature_c: 30.0 };
        let lfa = DamageSpec::new(Condition::Lfa, 20.0).unwrap();
        let trf = DamageSpec::new(Condition::Trf, 20.0).unwrap();
        let none = DamageSpec::NONE;
        assert!(p.a0_amplitude(&env, &lfa) > p.a0_amplitude(&env, &none));
        assert!(p.a0_velocity(&env, &lfa) > p.a0_velocity(&env, &none));
        assert!(p.a0_amplitude(&env, &trf) < p.a0_amplitude(&env, &none));
        assert!(p.a0_velocity(&env, &trf) < p.a0_velocity(&env, &none));
    }
}
