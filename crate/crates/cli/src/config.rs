//! Run configuration: a flat TOML key-value file covering every pipeline
//! knob plus the worker count. Missing keys take the defaults below.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pseudolabel::pipeline::{AugmentParams, PipelineConfig};
use pseudolabel::recognizer::{SegmentationCost, ToyGlyphRecognizer};

use crate::error::CliError;

/// Label generator selected by `generate --method`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Wesupermadd,
    Naive,
    Pyramid,
    Grabcut,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Wesupermadd => "wesupermadd",
            Method::Naive => "naive",
            Method::Pyramid => "pyramid",
            Method::Grabcut => "grabcut",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Gain-search iterations. Default 4.
    pub t_max: usize,
    /// Augmented samples per ensemble evaluation. Default 32.
    pub n_samples: usize,
    /// Mean edit distance below which a gain is accepted. Default 1.
    pub s1: f64,
    /// Foreground floor that triggers the hard-core graph cut. Default 16.
    pub fg_min: usize,
    /// Attention and out-of-image fill colour. Default mid-gray.
    pub mu: [f64; 3],
    /// Initial gain. Default 1.
    pub alpha0: f64,
    /// Base seed; each instance derives its own. Default 0.
    pub seed: u64,
    /// Erosion/dilation radius of the trimap. Default 1.
    pub morph_radius: usize,
    /// Rectified crop size. Default 128 × 32.
    pub crop_w: usize,
    pub crop_h: usize,
    /// Graph-cut iterations per call. Default 5.
    pub grabcut_iterations: usize,
    /// Fold case before computing the edit distance. Default true.
    pub case_insensitive: bool,
    /// Built-in recognizers in the ensemble, 1 or 2. Default 2.
    pub models: usize,
    /// Corner jitter as a fraction of the crop's shorter side. Default 0.08.
    pub perspective: f64,
    /// Rescale range. Default 0.85 to 1.15.
    pub scale_min: f64,
    pub scale_max: f64,
    /// Translation as a fraction of crop size. Default 0.05.
    pub shift: f64,
    /// Brightness/contrast jitter. Default 0.15.
    pub photometric: f64,
    /// Upper bound of the additive noise sigma. Default 0.02.
    pub noise_sigma_max: f64,
    /// Parallel workers. Default 1. Never echoed into reports, since the
    /// output does not depend on it.
    #[serde(skip_serializing)]
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            t_max: p.t_max,
            n_samples: p.n_samples,
            s1: p.s1,
            fg_min: p.fg_min,
            mu: p.mu,
            alpha0: p.alpha0,
            seed: p.seed,
            morph_radius: p.morph_radius,
            crop_w: p.crop_w,
            crop_h: p.crop_h,
            grabcut_iterations: p.grabcut_iterations,
            case_insensitive: p.cost.case_insensitive,
            models: 2,
            perspective: p.augment.perspective,
            scale_min: p.augment.scale_min,
            scale_max: p.augment.scale_max,
            shift: p.augment.shift,
            photometric: p.augment.photometric,
            noise_sigma_max: p.augment.noise_sigma_max,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every key, including `workers`.
    pub fn to_toml(&self) -> String {
        let body = toml::to_string(self).expect("plain fields serialize");
        format!("{body}workers = {}\n", self.workers)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=2).contains(&self.models) {
            return Err(CliError::Config("models must be 1 or 2".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if !(0.0 < self.scale_min && self.scale_min <= self.scale_max) {
            return Err(CliError::Config("scale range must satisfy 0 < scale_min <= scale_max".into()));
        }
        let nonneg = [self.perspective, self.shift, self.photometric, self.noise_sigma_max];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(CliError::Config("augmentation ranges must be finite and non-negative".into()));
        }
        self.pipeline(self.seed)
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Pipeline settings with `seed` in place of the base seed.
    pub fn pipeline(&self, seed: u64) -> PipelineConfig {
        PipelineConfig {
            t_max: self.t_max,
            n_samples: self.n_samples,
            s1: self.s1,
            fg_min: self.fg_min,
            mu: self.mu,
            alpha0: self.alpha0,
            seed,
            morph_radius: self.morph_radius,
            crop_w: self.crop_w,
            crop_h: self.crop_h,
            grabcut_iterations: self.grabcut_iterations,
            augment: AugmentParams {
                perspective: self.perspective,
                scale_min: self.scale_min,
                scale_max: self.scale_max,
                shift: self.shift,
                photometric: self.photometric,
                noise_sigma_max: self.noise_sigma_max,
            },
            cost: SegmentationCost {
                case_insensitive: self.case_insensitive,
            },
        }
    }

    /// The first `models` built-in recognizers.
    pub fn recognizers(&self) -> Vec<ToyGlyphRecognizer> {
        let mut all = ToyGlyphRecognizer::ensemble(self.crop_w, self.crop_h);
        all.truncate(self.models);
        all
    }
}

/// 64-bit FNV-1a over the base seed and the instance key.
pub fn instance_seed(base: u64, key: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    base.to_le_bytes()
        .iter()
        .chain(key.as_bytes())
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn defaults_round_trip() {
        let d = RunConfig::default();
        assert_eq!(RunConfig::parse(&d.to_toml()).unwrap(), d);
    }

    #[test]
    fn partial_override() {
        let c = RunConfig::parse("t_max = 0\nworkers = 8\nmu = [0.2, 0.3, 0.4]\n").unwrap();
        assert_eq!(c.t_max, 0);
        assert_eq!(c.workers, 8);
        assert_eq!(c.mu, [0.2, 0.3, 0.4]);
        assert_eq!(c.n_samples, 32);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(RunConfig::parse("t_maxx = 3").is_err());
        assert!(RunConfig::parse("models = 3").is_err());
        assert!(RunConfig::parse("workers = 0").is_err());
        assert!(RunConfig::parse("n_samples = 0").is_err());
    }

    #[test]
    fn instance_seeds_differ_by_key_and_base() {
        assert_ne!(instance_seed(0, "img_0000_0"), instance_seed(0, "img_0000_1"));
        assert_ne!(instance_seed(0, "a"), instance_seed(1, "a"));
        assert_eq!(instance_seed(5, "a"), instance_seed(5, "a"));
    }
}
