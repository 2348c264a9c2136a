use alloc::vec;
use alloc::vec::Vec;

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::network::Architecture;
use super::train::{kfold_assignment, kfold_score_with, TrainConfig};
use crate::error::{invalid, Result};
use crate::rng::{derive_seed, rng_from, stream};

/// Candidate values for random search. Each trial draws every
/// hyperparameter independently and uniformly, with replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpace {
    pub learning_rates: Vec<f64>,
    pub batch_sizes: Vec<usize>,
    pub epochs: Vec<usize>,
    pub iterations: usize,
    pub folds: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        SearchSpace {
            learning_rates: vec![0.001, 0.01, 0.1],
            batch_sizes: vec![16, 28, 32, 64],
            epochs: vec![50, 100, 150, 200],
            iterations: 10,
            folds: 5,
        }
    }
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rates.is_empty() || self.batch_sizes.is_empty() || self.epochs.is_empty() {
            return Err(invalid("search space has an empty candidate set"));
        }
        if self.iterations == 0 {
            return Err(invalid("search needs at least one iteration"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub config: TrainConfig,
    /// Mean k-fold validation reconstruction MSE (lower is better).
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: TrainConfig,
    pub best_index: usize,
    pub trials: Vec<Trial>,
}

/// Random search over the feature autoencoder's training hyperparameters.
pub fn random_search<S: AsRef<[f64]>>(space: &SearchSpace, samples: &[S], seed: u64) -> Result<SearchOutcome> {
    random_search_with(&Architecture::standard(), space, samples, seed, &TrainConfig::default())
}

/// Random search with an explicit architecture. Optimizer constants not in
/// the space come from `base`. All trials share one fold assignment, so their
/// scores are comparable; ties go to the earliest trial.
pub fn random_search_with<S: AsRef<[f64]>>(
    architecture: &Architecture,
    space: &SearchSpace,
    samples: &[S],
    seed: u64,
    base: &TrainConfig,
) -> Result<SearchOutcome> {
    space.validate()?;
    let folds = kfold_assignment(samples.len(), space.folds, seed)?;
    let mut rng = rng_from(seed, &[stream::SEARCH]);
    let mut trials = Vec::with_capacity(space.iterations);
    for i in 0..space.iterations {
        let config = TrainConfig {
            learning_rate: *space.learning_rates.choose(&mut rng).expect("non-empty"),
            batch_size: *space.batch_sizes.choose(&mut rng).expect("non-empty"),
            epochs: *space.epochs.choose(&mut rng).expect("non-empty"),
            seed: derive_seed(seed, &[stream::SEARCH, i as u64]),
            ..*base
        };
        let score = kfold_score_with(architecture, samples, &config, &folds, space.folds)?;
        trials.push(Trial { config, score });
    }
    let best_index =
        trials.iter().enumerate().fold(0, |best, (i, t)| if t.score < trials[best].score { i } else { best });
    Ok(SearchOutcome { best: trials[best_index].config, best_index, trials })
}
