//! Measurement campaigns: the Cartesian product of temperatures, paths and
//! structural conditions, plus the excitation, propagation and noise settings
//! used to synthesize them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::augment::NoiseSpec;
use crate::error::{invalid, Result};
use crate::rng::{rng_from, stream};
use crate::signal::{
    hanning_tone_burst, propagate, Condition, DamageSpec, EnvCondition, GwRecord, PathSpec, PropagationParams,
};

/// Excitation and acquisition settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CaptureSpec {
    pub center_frequency_hz: f64,
    pub cycles: u32,
    pub sample_rate_hz: f64,
    pub record_length: usize,
}

impl Default for CaptureSpec {
    fn default() -> Self {
        CaptureSpec { center_frequency_hz: 75e3, cycles: 5, sample_rate_hz: 10e6, record_length: 4096 }
    }
}

/// One structural condition and the damage sizes to simulate for it.
/// `sizes_mm` is ignored for the baseline condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub kind: Condition,
    #[serde(default)]
    pub sizes_mm: Vec<f64>,
}

impl ConditionSpec {
    pub fn baseline() -> Self {
        ConditionSpec { kind: Condition::Baseline, sizes_mm: Vec::new() }
    }

    pub fn damaged(kind: Condition, sizes_mm: &[f64]) -> Self {
        ConditionSpec { kind, sizes_mm: sizes_mm.to_vec() }
    }

    fn damages(&self) -> Result<Vec<DamageSpec>> {
        match self.kind {
            Condition::Baseline => Ok(vec![DamageSpec::NONE]),
            kind => {
                if self.sizes_mm.is_empty() {
                    return Err(invalid(format!("condition {} lists no damage sizes", kind.as_str())));
                }
                self.sizes_mm.iter().map(|&s| DamageSpec::new(kind, s)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub temperatures_c: Vec<f64>,
    pub paths: Vec<PathSpec>,
    pub conditions: Vec<ConditionSpec>,
    #[serde(default)]
    pub propagation: PropagationParams,
    #[serde(default)]
    pub capture: CaptureSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Half-width of the uniform per-path distance perturbation, mm. Drawn once
    /// per path id from the scenario seed; models transducer placement scatter.
    #[serde(default = "default_jitter")]
    pub path_distance_jitter_mm: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

fn default_jitter() -> f64 {
    0.5
}

impl ScenarioConfig {
    /// Laboratory-style campaign: 0-90 C in 5 C steps over six 180 mm paths,
    /// baseline condition only.
    pub fn experimental() -> Self {
        ScenarioConfig {
            temperatures_c: (0..19).map(|i| 5.0 * i as f64).collect(),
            paths: (1..=6).map(|i| PathSpec::new(format!("P{i}"), 180.0)).collect(),
            conditions: vec![ConditionSpec::baseline()],
            propagation: PropagationParams::default(),
            capture: CaptureSpec::default(),
            noise: NoiseSpec::default(),
            path_distance_jitter_mm: default_jitter(),
            seed: 0,
            output_dir: None,
        }
    }

    /// Simulation-style campaign: 30-90 C in 10 C steps over three paths,
    /// baseline condition only.
    pub fn simulation() -> Self {
        ScenarioConfig {
            temperatures_c: (0..7).map(|i| 30.0 + 10.0 * i as f64).collect(),
            paths: (1..=3).map(|i| PathSpec::new(format!("S{i}"), 180.0)).collect(),
            ..Self::experimental()
        }
    }

    pub fn with_conditions(mut self, conditions: Vec<ConditionSpec>) -> Self {
        self.conditions = conditions;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.temperatures_c.is_empty() {
            return Err(invalid("scenario has no temperatures"));
        }
        if self.paths.is_empty() {
            return Err(invalid("scenario has no paths"));
        }
        if self.conditions.is_empty() {
            return Err(invalid("scenario has no conditions"));
        }
        if self.temperatures_c.iter().any(|t| !t.is_finite()) {
            return Err(invalid("temperatures must be finite"));
        }
        let mut ids: Vec<&str> = self.paths.iter().map(|p| p.path_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("path ids must be unique"));
        }
        if !(self.path_distance_jitter_mm >= 0.0) {
            return Err(invalid("path distance jitter must be non-negative"));
        }
        self.propagation.validate()?;
        self.noise.validate()?;
        for c in &self.conditions {
            c.damages()?;
        }
        Ok(())
    }

    /// Number of clean records the scenario expands to.
    pub fn clean_record_count(&self) -> usize {
        let damages: usize =
            self.conditions.iter().map(|c| if c.kind == Condition::Baseline { 1 } else { c.sizes_mm.len() }).sum();
        damages * self.temperatures_c.len() * self.paths.len()
    }
}

/// Expands `scenario` into one clean record per (condition, size,
/// temperature, path), in that nesting order.
pub fn generate_scenario(scenario: &ScenarioConfig, seed: u64) -> Result<Vec<GwRecord>> {
    scenario.validate()?;
    let cap = &scenario.capture;
    let burst = hanning_tone_burst(cap.center_frequency_hz, cap.cycles, cap.sample_rate_hz)?;

    let paths: Vec<PathSpec> = scenario
        .paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = rng_from(seed, &[stream::SCENARIO, i as u64]);
            let j = scenario.path_distance_jitter_mm;
            let offset = if j > 0.0 { rng.random_range(-j..=j) } else { 0.0 };
            PathSpec::new(p.path_id.clone(), p.tx_rx_distance_mm + offset)
        })
        .collect();

    let mut out = Vec::with_capacity(scenario.clean_record_count());
    for cond in &scenario.conditions {
        for damage in cond.damages()? {
            for &t in &scenario.temperatures_c {
                for path in &paths {
                    let env = EnvCondition { temperature_c: t };
                    out.push(propagate(&burst, path, env, damage, &scenario.propagation, cap.record_length)?);
                }
            }
        }
    }
    Ok(out)
}
