//! Dataset formats, training pipeline and command line for guided-wave
//! damage assessment, built on `gwshm-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod fsutil;
pub mod manifest;
pub mod pipeline;
pub mod record;
pub mod svg;
pub mod table;

pub use error::{CliError, Result};
