//! Pseudo segmentation labels for quadrilateral-annotated text instances.

pub mod baselines;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod graphcut;
pub mod pipeline;
pub mod raster;
pub mod recognizer;
pub mod vbp;

pub use error::{Error, Result};
