//! Saliency back-projection from rectified activations, cost-derived mask
//! weights and the weighted-average potential mask.

use crate::error::{Error, Result};
use crate::raster::GrayBuf;
use crate::recognizer::ActivationStack;

/// Segmentation potential mask: per-pixel saliency in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spm {
    map: GrayBuf,
}

impl Spm {
    /// Wraps `map`, clamping values into `[0, 1]`.
    pub fn from_gray(mut map: GrayBuf) -> Self {
        map.values_mut()
            .iter_mut()
            .for_each(|v| *v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 });
        Self { map }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            map: GrayBuf::new(width, height, 0.0),
        }
    }

    pub fn width(&self) -> usize {
        self.map.width()
    }

    pub fn height(&self) -> usize {
        self.map.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.map.dims()
    }

    pub fn values(&self) -> &[f64] {
        self.map.values()
    }

    pub fn as_gray(&self) -> &GrayBuf {
        &self.map
    }

    pub fn into_gray(self) -> GrayBuf {
        self.map
    }
}

/// Min–max normalization; a constant map becomes all zeros when the
/// constant is zero and all ones otherwise.
pub fn normalize_min_max(map: &GrayBuf) -> Spm {
    let lo = map.min();
    let hi = map.max();
    let (w, h) = map.dims();
    if !(hi > lo) {
        let fill = if hi == 0.0 || !hi.is_finite() { 0.0 } else { 1.0 };
        return Spm {
            map: GrayBuf::new(w, h, fill),
        };
    }
    let inv = 1.0 / (hi - lo);
    let values = map.values().iter().map(|v| (v - lo) * inv).collect();
    Spm::from_gray(GrayBuf::from_values(w, h, values).expect("same shape"))
}

/// Transposed convolution with an all-ones `kernel × kernel` filter.
///
/// Cell `(i, j)` of `src` spreads onto output rows/cols
/// `[i·stride − pad, i·stride − pad + kernel)` with `pad = (kernel − stride) / 2`;
/// overlapping contributions add. The result is cropped to `out_w × out_h`.
pub fn upsample_ones(src: &GrayBuf, kernel: usize, stride: usize, out_w: usize, out_h: usize) -> GrayBuf {
    let mut out = GrayBuf::new(out_w, out_h, 0.0);
    let pad = kernel.saturating_sub(stride) as isize / 2;
    for i in 0..src.height() {
        for j in 0..src.width() {
            let v = src.get(j, i);
            if v == 0.0 {
                continue;
            }
            let y0 = (i * stride) as isize - pad;
            let x0 = (j * stride) as isize - pad;
            for y in y0.max(0)..(y0 + kernel as isize).min(out_h as isize) {
                for x in x0.max(0)..(x0 + kernel as isize).min(out_w as isize) {
                    let (x, y) = (x as usize, y as usize);
                    out.set(x, y, out.get(x, y) + v);
                }
            }
        }
    }
    out
}

/// Back-projects saliency from the deepest layer to the input resolution.
///
/// Each layer is averaged over channels. Starting from the deepest map, the
/// running map is upsampled to the next shallower layer's resolution with
/// that deeper layer's `(kernel, stride)` and multiplied pointwise with the
/// shallower average. A shallowest layer with stride above one is finally
/// upsampled to input resolution. The result is min–max normalized.
pub fn visual_backprop(layers: &[ActivationStack]) -> Spm {
    assert!(!layers.is_empty(), "visual_backprop needs at least one layer");
    let means: Vec<GrayBuf> = layers.iter().map(|l| l.channel_mean()).collect();
    let mut acc = means.last().expect("nonempty").clone();
    for i in (1..layers.len()).rev() {
        let (w, h) = means[i - 1].dims();
        let up = upsample_ones(&acc, layers[i].kernel, layers[i].stride, w, h);
        let prod: Vec<f64> = up
            .values()
            .iter()
            .zip(means[i - 1].values())
            .map(|(a, b)| a * b)
            .collect();
        acc = GrayBuf::from_values(w, h, prod).expect("same shape");
    }
    let first = &layers[0];
    if first.stride > 1 {
        acc = upsample_ones(
            &acc,
            first.kernel,
            first.stride,
            first.width * first.stride,
            first.height * first.stride,
        );
    }
    normalize_min_max(&acc)
}

/// Softmax over `max(costs) − costs`: the cheapest entries weigh the most.
pub fn softmax_weights(costs: &[f64]) -> Vec<f64> {
    if costs.is_empty() {
        return Vec::new();
    }
    let max = costs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = costs.iter().copied().fold(f64::INFINITY, f64::min);
    // Exponents are max − c; shift by their maximum (max − min) for stability.
    let exps: Vec<f64> = costs.iter().map(|c| ((max - c) - (max - min)).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Pixelwise `Σ wᵢ · maskᵢ`; not re-normalized.
pub fn weighted_average_spm(masks: &[Spm], weights: &[f64]) -> Result<Spm> {
    let first = masks.first().ok_or(Error::EmptyInput)?;
    if weights.len() != masks.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} masks",
            weights.len(),
            masks.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!("weights sum to {total}")));
    }
    let (w, h) = first.dims();
    let mut acc = vec![0.0; w * h];
    for (m, &wt) in masks.iter().zip(weights) {
        if m.dims() != (w, h) {
            return Err(Error::ShapeMismatch {
                expected: (w, h),
                got: m.dims(),
            });
        }
        for (a, v) in acc.iter_mut().zip(m.values()) {
            *a += wt * v;
        }
    }
    Ok(Spm::from_gray(GrayBuf::from_values(w, h, acc)?))
}
