//! Reconstruction-error anomaly detection and per-case evaluation.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use serde::{Deserialize, Serialize};

use crate::autoencoder::DenseAutoencoder;
use crate::error::{check_len, invalid, Error, Result};
use crate::features::{FeatureScaler, FEATURE_COUNT};
use crate::signal::Condition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Healthy,
    Damaged,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Healthy => "healthy",
            Decision::Damaged => "damaged",
        }
    }
}

/// Mean, population standard deviation and their sum over healthy
/// reconstruction errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFit {
    pub mean: f64,
    pub std: f64,
    pub threshold: f64,
}

pub fn fit_threshold(errors: &[f64]) -> Result<ThresholdFit> {
    if errors.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: errors.len() });
    }
    if errors.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(invalid("reconstruction errors must be finite and non-negative"));
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    Ok(ThresholdFit { mean, std, threshold: mean + std })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub error: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyDetector {
    model: DenseAutoencoder,
    scaler: FeatureScaler,
    fit: ThresholdFit,
}

impl AnomalyDetector {
    pub fn new(model: DenseAutoencoder, scaler: FeatureScaler, fit: ThresholdFit) -> Result<Self> {
        check_len(FEATURE_COUNT, model.input_width())?;
        if !fit.threshold.is_finite() {
            return Err(invalid("threshold must be finite"));
        }
        Ok(AnomalyDetector { model, scaler, fit })
    }

    /// Fits the threshold on the model's errors over healthy scaled vectors.
    pub fn fit<S: AsRef<[f64]>>(model: DenseAutoencoder, scaler: FeatureScaler, healthy: &[S]) -> Result<Self> {
        let errors = healthy.iter().map(|x| model.reconstruction_error(x.as_ref())).collect::<Result<Vec<f64>>>()?;
        Self::new(model, scaler, fit_threshold(&errors)?)
    }

    pub fn model(&self) -> &DenseAutoencoder {
        &self.model
    }

    pub fn scaler(&self) -> &FeatureScaler {
        &self.scaler
    }

    pub fn threshold_fit(&self) -> ThresholdFit {
        self.fit
    }

    pub fn threshold(&self) -> f64 {
        self.fit.threshold
    }

    /// Damaged iff `error` strictly exceeds the threshold.
    pub fn decide(&self, error: f64) -> Decision {
        if error > self.fit.threshold {
            Decision::Damaged
        } else {
            Decision::Healthy
        }
    }

    /// Classifies an already-scaled feature vector.
    pub fn classify(&self, scaled: &[f64]) -> Result<Classification> {
        let error = self.model.reconstruction_error(scaled)?;
        Ok(Classification { error, decision: self.decide(error) })
    }

    pub fn classify_raw(&self, raw: &[f64; FEATURE_COUNT]) -> Result<Classification> {
        self.classify(&self.scaler.apply(raw))
    }
}

/// A scaled feature vector with its ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledVector {
    pub condition: Condition,
    pub size_mm: f64,
    pub features: [f64; FEATURE_COUNT],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub condition: Condition,
    pub size_mm: f64,
    pub error: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Percentage of correct decisions.
    pub fn accuracy_pct(&self) -> f64 {
        let n = self.total();
        if n == 0 {
            0.0
        } else {
            100.0 * (self.tp + self.tn) as f64 / n as f64
        }
    }

    /// F1 of the Damaged class as a percentage; 0 when undefined.
    pub fn f1_pct(&self) -> f64 {
        let tp = self.tp as f64;
        let precision = if self.tp + self.fp == 0 { 0.0 } else { tp / (self.tp + self.fp) as f64 };
        let recall = if self.tp + self.fn_ == 0 { 0.0 } else { tp / (self.tp + self.fn_) as f64 };
        if precision + recall == 0.0 {
            0.0
        } else {
            100.0 * 2.0 * precision * recall / (precision + recall)
        }
    }
}

/// One evaluation case. The baseline case holds only negatives and reports no
/// F1; each damaged (kind, size) case is pooled with every baseline vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub condition: Condition,
    pub size_mm: Option<f64>,
    pub counts: Confusion,
    pub accuracy_pct: f64,
    pub f1_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub condition: Condition,
    pub size_mm: Option<f64>,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: ThresholdFit,
    pub cases: Vec<CaseReport>,
    pub distributions: Vec<ErrorSummary>,
}

impl EvalReport {
    pub fn case(&self, condition: Condition, size_mm: Option<f64>) -> Option<&CaseReport> {
        self.cases.iter().find(|c| c.condition == condition && c.size_mm == size_mm)
    }

    pub fn distribution(&self, condition: Condition, size_mm: Option<f64>) -> Option<&ErrorSummary> {
        self.distributions.iter().find(|d| d.condition == condition && d.size_mm == size_mm)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvalReport,
    /// One outcome per input vector, in input order.
    pub outcomes: Vec<Outcome>,
}

pub fn evaluate(detector: &AnomalyDetector, samples: &[LabeledVector]) -> Result<Evaluation> {
    let outcomes = samples
        .iter()
        .map(|s| {
            let c = detector.classify(&s.features)?;
            Ok(Outcome { condition: s.condition, size_mm: s.size_mm, error: c.error, decision: c.decision })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = summarize(detector.threshold_fit(), &outcomes)?;
    Ok(Evaluation { report, outcomes })
}

/// Builds the report from precomputed outcomes.
pub fn summarize(threshold: ThresholdFit, outcomes: &[Outcome]) -> Result<EvalReport> {
    if outcomes.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let baseline: Vec<&Outcome> = outcomes.iter().filter(|o| o.condition == Condition::Baseline).collect();
    if baseline.is_empty() {
        return Err(Error::EmptyCase("baseline".into()));
    }
    let mut negatives = Confusion::default();
    for o in &baseline {
        match o.decision {
            Decision::Healthy => negatives.tn += 1,
            Decision::Damaged => negatives.fp += 1,
        }
    }

    let mut cases = Vec::new();
    let mut distributions = Vec::new();
    cases.push(CaseReport {
        condition: Condition::Baseline,
        size_mm: None,
        counts: negatives,
        accuracy_pct: negatives.accuracy_pct(),
        f1_pct: None,
    });
    let errors: Vec<f64> = baseline.iter().map(|o| o.error).collect();
    distributions.push(error_summary(Condition::Baseline, None, &errors));

    for kind in [Condition::Trf, Condition::Lfa] {
        let mut sizes: Vec<f64> = outcomes.iter().filter(|o| o.condition == kind).map(|o| o.size_mm).collect();
        sizes.sort_unstable_by(|a, b| a.total_cmp(b));
        sizes.dedup();
        for size in sizes {
            let group: Vec<&Outcome> = outcomes.iter().filter(|o| o.condition == kind && o.size_mm == size).collect();
            let mut counts = negatives;
            for o in &group {
                match o.decision {
                    Decision::Damaged => counts.tp += 1,
                    Decision::Healthy => counts.fn_ += 1,
                }
            }
            cases.push(CaseReport {
                condition: kind,
                size_mm: Some(size),
                counts,
                accuracy_pct: counts.accuracy_pct(),
                f1_pct: Some(counts.f1_pct()),
            });
            let errors: Vec<f64> = group.iter().map(|o| o.error).collect();
            distributions.push(error_summary(kind, Some(size), &errors));
        }
    }
    Ok(EvalReport { threshold, cases, distributions })
}

fn error_summary(condition: Condition, size_mm: Option<f64>, errors: &[f64]) -> ErrorSummary {
    let mut s = errors.to_vec();
    s.sort_unstable_by(|a, b| a.total_cmp(b));
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let std = (s.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n).sqrt();
    ErrorSummary {
        condition,
        size_mm,
        count: s.len(),
        mean,
        std,
        min: s[0],
        q05: quantile(&s, 0.05),
        q25: quantile(&s, 0.25),
        median: quantile(&s, 0.5),
        q75: quantile(&s, 0.75),
        q95: quantile(&s, 0.95),
        max: s[s.len() - 1],
    }
}

/// Linear-interpolation quantile of sorted data (the common "type 7" rule).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
