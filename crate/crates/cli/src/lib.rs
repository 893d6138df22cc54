//! Corpus synthesis, annotation I/O, batch label generation, evaluation and
//! the ablation driver behind the `pseudolabel` binary.

pub mod ablate;
pub mod annotations;
pub mod batch;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod imageio;

pub use error::CliError;
