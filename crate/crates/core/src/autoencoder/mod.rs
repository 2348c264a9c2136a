//! Dense autoencoder with hand-written backpropagation, Adam, k-fold scoring
//! and random hyperparameter search.

mod adam;
mod network;
mod search;
mod train;

pub use adam::Adam;
pub use network::{build_model, reconstruction_mse, Activation, Architecture, DenseAutoencoder, Layer, LayerSpec};
pub use search::{random_search, random_search_with, SearchOutcome, SearchSpace, Trial};
pub use train::{
    evaluate_loss, kfold_assignment, kfold_score, kfold_score_with, split_dataset, train, train_with_validation,
    LossHistory, Split, TrainConfig,
};
