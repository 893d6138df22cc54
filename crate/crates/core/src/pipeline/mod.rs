//! Per-instance label generation: rectify the quad, back-project
//! recognizer saliency over an augmented ensemble, then search the
//! binarization gain against the recognition cost.

pub mod augment;
pub mod ensemble;
pub mod pslgen;
pub mod search;

pub use augment::{sample_augmentations, sample_augmentations_with, AugmentParams, AugmentedSet};
pub use ensemble::{evaluate_ensemble, EnsembleOutcome};
pub use pslgen::{build_trimap, mask_attention, pslgen, PslOutcome, PslParams};
pub use search::{binary_search_step, SearchState};

use crate::error::{Error, Result};
use crate::geometry::{raster_quad, solve_homography, warp_crop, warp_mask, Homography, Quadrilateral};
use crate::graphcut::grabcut::DEFAULT_ITERATIONS;
use crate::raster::{otsu_threshold, ImageBuf, Mask};
use crate::recognizer::{RecognitionModel, SegmentationCost};
use crate::vbp::{softmax_weights, weighted_average_spm, Spm};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Number of gain-search iterations.
    pub t_max: usize,
    /// Augmentations per ensemble evaluation.
    pub n_samples: usize,
    /// Mean recognition cost below which a gain is accepted.
    pub s1: f64,
    /// Foreground pixel floor below which the hard-core fallback runs.
    pub fg_min: usize,
    /// Background colour for attention and out-of-image crop regions.
    pub mu: [f64; 3],
    pub alpha0: f64,
    pub seed: u64,
    pub morph_radius: usize,
    pub crop_w: usize,
    pub crop_h: usize,
    pub grabcut_iterations: usize,
    pub augment: AugmentParams,
    pub cost: SegmentationCost,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            t_max: 4,
            n_samples: 32,
            s1: 1.0,
            fg_min: 16,
            mu: [0.5; 3],
            alpha0: 1.0,
            seed: 0,
            morph_radius: 1,
            crop_w: 128,
            crop_h: 32,
            grabcut_iterations: DEFAULT_ITERATIONS,
            augment: AugmentParams::default(),
            cost: SegmentationCost::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1");
        }
        if self.morph_radius == 0 {
            return bad("morph_radius must be at least 1");
        }
        if self.crop_w < 8 || self.crop_h < 8 {
            return bad("crop must be at least 8x8");
        }
        if !(self.alpha0 > 0.0) || !self.alpha0.is_finite() {
            return bad("alpha0 must be positive");
        }
        if !self.s1.is_finite() {
            return bad("s1 must be finite");
        }
        if self.mu.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("mu must lie in [0, 1]");
        }
        Ok(())
    }

    fn psl_params(&self) -> PslParams {
        PslParams {
            fg_min: self.fg_min,
            radius: self.morph_radius,
            grabcut_iterations: self.grabcut_iterations,
            seed: derive_seed(self.seed, STREAM_GRABCUT),
        }
    }
}

const STREAM_MDRM: u64 = 1;
const STREAM_GRABCUT: u64 = 2;
const STREAM_SEARCH: u64 = 16;

/// Mixes a base seed with a stream id (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Rectifies `quad` into a `w × h` crop. Returns the crop and the crop → image transform.
pub fn crop_instance(image: &ImageBuf, quad: &Quadrilateral, w: usize, h: usize, fill: [f64; 3]) -> Result<(ImageBuf, Homography)> {
    let to_image = solve_homography(&raster_quad(w, h), quad)?;
    let crop = warp_crop(image, &to_image, w, h, fill)?;
    Ok((crop, to_image))
}

/// Carries a crop-frame mask into image space (nearest sampling).
pub fn crop_mask_to_image(mask: &Mask, crop_to_image: &Homography, width: usize, height: usize) -> Result<Mask> {
    Ok(warp_mask(mask, &crop_to_image.inverse()?, width, height))
}

/// One probed gain.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchRecord {
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
    pub mean_cost: f64,
    pub binary_count: usize,
    pub mask_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PslResult {
    /// Pseudo label at crop resolution.
    pub mask: Mask,
    pub crop: ImageBuf,
    pub crop_to_image: Homography,
    /// Cost-weighted average saliency.
    pub spm: Spm,
    pub best_alpha: f64,
    pub feasible: bool,
    /// Mean cost of the unmodified-crop ensemble.
    pub initial_cost: f64,
    pub trace: Vec<SearchRecord>,
    /// Set when the averaged saliency was constant, so no label was produced.
    pub constant_spm: bool,
    pub pslgen_calls: usize,
}

/// Averaged saliency of `crop` over the augmented ensemble, weighted by
/// softmax of the negated recognition costs.
pub fn ensemble_saliency(
    crop: &ImageBuf,
    truth: &str,
    models: &[&dyn RecognitionModel],
    cfg: &PipelineConfig,
) -> Result<(Spm, EnsembleOutcome)> {
    let set = sample_augmentations_with(crop, cfg.n_samples, derive_seed(cfg.seed, STREAM_MDRM), cfg.mu, &cfg.augment);
    let outcome = evaluate_ensemble(&set, models, truth, cfg.cost, true);
    let weights = softmax_weights(&outcome.flat_costs());
    let spms = outcome.flat_spms().expect("requested");
    let spm = weighted_average_spm(&spms, &weights)?;
    Ok((spm, outcome))
}

/// Full per-instance procedure.
pub fn generate_psl(
    image: &ImageBuf,
    quad: &Quadrilateral,
    truth: &str,
    models: &[&dyn RecognitionModel],
    cfg: &PipelineConfig,
) -> Result<PslResult> {
    cfg.validate()?;
    if models.is_empty() {
        return Err(Error::InvalidArgument("no recognition models".into()));
    }
    let (crop, crop_to_image) = crop_instance(image, quad, cfg.crop_w, cfg.crop_h, cfg.mu)?;
    let (spm, initial) = ensemble_saliency(&crop, truth, models, cfg)?;
    search_gain(crop, crop_to_image, spm, initial.mean_cost, truth, models, cfg)
}

/// Gain search over a fixed averaged saliency map.
pub fn search_gain(
    crop: ImageBuf,
    crop_to_image: Homography,
    spm: Spm,
    initial_cost: f64,
    truth: &str,
    models: &[&dyn RecognitionModel],
    cfg: &PipelineConfig,
) -> Result<PslResult> {
    let params = cfg.psl_params();
    let (w, h) = crop.dims();
    let Ok(otsu) = otsu_threshold(spm.as_gray()) else {
        return Ok(PslResult {
            mask: Mask::new(w, h, false),
            crop,
            crop_to_image,
            spm,
            best_alpha: cfg.alpha0,
            feasible: false,
            initial_cost,
            trace: Vec::new(),
            constant_spm: true,
            pslgen_calls: 0,
        });
    };
    let upper = spm.as_gray().max() / otsu;
    let mut state = SearchState::new(cfg.alpha0, 0.0, upper);
    let mut trace = Vec::with_capacity(cfg.t_max);
    let mut calls = 0;
    for t in 0..cfg.t_max {
        let psl = pslgen(&crop, state.alpha, &spm, &params)?;
        calls += 1;
        let attended = mask_attention(&crop, &psl.mask, cfg.mu);
        let seed = derive_seed(cfg.seed, STREAM_SEARCH + t as u64);
        let set = sample_augmentations_with(&attended, cfg.n_samples, seed, cfg.mu, &cfg.augment);
        let s_t = evaluate_ensemble(&set, models, truth, cfg.cost, false).mean_cost;
        trace.push(SearchRecord {
            alpha: state.alpha,
            lower: state.lower,
            upper: state.upper,
            mean_cost: s_t,
            binary_count: psl.binary.count(),
            mask_count: psl.mask.count(),
        });
        state = binary_search_step(state, s_t, cfg.s1);
    }
    let final_psl = pslgen(&crop, state.best_alpha, &spm, &params)?;
    calls += 1;
    Ok(PslResult {
        mask: final_psl.mask,
        crop,
        crop_to_image,
        spm,
        best_alpha: state.best_alpha,
        feasible: state.feasible_found,
        initial_cost,
        trace,
        constant_spm: false,
        pslgen_calls: calls,
    })
}
