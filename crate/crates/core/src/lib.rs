//! Core algorithms for temperature-compensated guided-wave damage assessment.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the whole numeric
//! path of the pipeline:
//!
//! - [`signal`]: Hanning tone bursts and a delay-and-scale guided-wave
//!   propagation model with temperature and damage effects.
//! - [`augment`]: record normalization and white/pink noise at a target SNR.
//! - [`features`]: the sixteen time-domain features and min-max scaling.
//! - [`autoencoder`]: a small dense autoencoder trained with backprop and Adam,
//!   k-fold scoring and random hyperparameter search.
//! - [`detector`]: the mean-plus-one-sigma reconstruction-error detector and
//!   its evaluation metrics.
//! - [`edge`]: a CRC-protected binary model image and an allocation-free
//!   inference engine with fixed scratch buffers.
//!
//! File formats, the dataset layout and the command line live in the `gwshm`
//! companion crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod augment;
pub mod autoencoder;
pub mod detector;
pub mod edge;
mod error;
pub mod features;
mod fft;
pub mod rng;
pub mod scenario;
pub mod signal;

pub use error::{Error, Result};
