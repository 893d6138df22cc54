//! Recognition-model contract, the built-in toy glyph recognizer and the
//! edit-distance segmentation cost.

pub mod font;
mod toy;

pub use toy::{ColumnScore, FilterBank, ToyGlyphRecognizer};

use crate::geometry::Homography;
use crate::raster::{GrayBuf, ImageBuf};

/// Rectified activations of one layer, stored channel-major (`[c][y][x]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationStack {
    pub channels: usize,
    pub width: usize,
    pub height: usize,
    pub values: Vec<f32>,
    /// Downscaling factor relative to the previous layer (or the input).
    pub stride: usize,
    /// Receptive kernel size relative to the previous layer.
    pub kernel: usize,
}

impl ActivationStack {
    pub fn zeros(channels: usize, width: usize, height: usize, stride: usize, kernel: usize) -> Self {
        Self {
            channels,
            width,
            height,
            values: vec![0.0; channels * width * height],
            stride,
            kernel,
        }
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f32 {
        self.values[(c * self.height + y) * self.width + x]
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.values[c * n..(c + 1) * n]
    }

    /// Channel-averaged map.
    pub fn channel_mean(&self) -> GrayBuf {
        let n = self.width * self.height;
        let mut out = vec![0.0f64; n];
        for c in 0..self.channels {
            for (o, &v) in out.iter_mut().zip(self.channel(c)) {
                *o += v as f64;
            }
        }
        let inv = 1.0 / self.channels.max(1) as f64;
        out.iter_mut().for_each(|v| *v *= inv);
        GrayBuf::from_values(self.width, self.height, out).expect("sized by construction")
    }
}

/// Output of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub text: String,
    /// Intermediate activations, shallow to deep, in the model's input frame.
    pub layers: Vec<ActivationStack>,
    /// Maps model-input pixel coordinates to crop pixel coordinates. Models
    /// that resample or rectify internally report that transform here.
    pub input_to_crop: Homography,
}

/// A recognizer whose prediction can be scored against a transcription and
/// whose intermediate activations feed saliency back-projection.
///
/// Implementations must be deterministic and usable concurrently through `&self`.
pub trait RecognitionModel: Send + Sync {
    fn name(&self) -> &str;

    fn predict(&self, crop: &ImageBuf) -> Prediction;
}

/// Levenshtein distance over Unicode scalar values with unit costs.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit-distance cost between a prediction and the transcription.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentationCost {
    pub case_insensitive: bool,
}

impl Default for SegmentationCost {
    fn default() -> Self {
        Self {
            case_insensitive: true,
        }
    }
}

impl SegmentationCost {
    pub fn cost(&self, predicted: &str, truth: &str) -> f64 {
        if self.case_insensitive {
            edit_distance(&predicted.to_lowercase(), &truth.to_lowercase()) as f64
        } else {
            edit_distance(predicted, truth) as f64
        }
    }
}
