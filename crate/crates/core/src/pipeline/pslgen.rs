//! Saliency binarization, trimap construction and graph-cut cleanup of a
//! single candidate label.

use crate::error::Result;
use crate::graphcut::{grabcut_refine, Trimap, TrimapLabel};
use crate::raster::{dilate, erode, otsu_threshold, ImageBuf, Mask};
use crate::vbp::Spm;

/// Trimap from a binary mask: eroded core is `Fg`, the rest of the mask is
/// `ProbFg`, the dilation ring is `ProbBg` and everything else is `Bg`.
pub fn build_trimap(binary: &Mask, radius: usize) -> Trimap {
    let fg = erode(binary, radius);
    let bg = dilate(binary, radius).not();
    let pfg = binary.and_not(&fg);
    let pbg = bg.not().and_not(&fg);
    let labels = (0..binary.bits().len())
        .map(|i| {
            if fg.bits()[i] {
                TrimapLabel::Fg
            } else if pfg.bits()[i] {
                TrimapLabel::ProbFg
            } else if pbg.bits()[i] {
                TrimapLabel::ProbBg
            } else {
                TrimapLabel::Bg
            }
        })
        .collect();
    Trimap::from_labels(binary.width(), binary.height(), labels).expect("same shape")
}

/// Intermediate products of one label generation.
#[derive(Debug, Clone, PartialEq)]
pub struct PslOutcome {
    pub mask: Mask,
    /// Saliency binarized at `α · Otsu` before graph-cut cleanup.
    pub binary: Mask,
    pub threshold: Option<f64>,
    pub used_fallback: bool,
}

/// Knobs of a single label generation besides the gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PslParams {
    pub fg_min: usize,
    pub radius: usize,
    pub grabcut_iterations: usize,
    pub seed: u64,
}

/// Binarizes `spm` at `alpha · Otsu(spm)` and cleans the result with two
/// graph-cut passes: first with no hard foreground, then, if that leaves
/// fewer than `fg_min` pixels, with the eroded core as hard foreground.
///
/// A constant saliency map yields the empty mask.
pub fn pslgen(crop: &ImageBuf, alpha: f64, spm: &Spm, p: &PslParams) -> Result<PslOutcome> {
    let (w, h) = crop.dims();
    let Ok(otsu) = otsu_threshold(spm.as_gray()) else {
        return Ok(PslOutcome {
            mask: Mask::new(w, h, false),
            binary: Mask::new(w, h, false),
            threshold: None,
            used_fallback: false,
        });
    };
    let threshold = alpha * otsu;
    let binary = spm.as_gray().threshold(threshold);
    let trimap = build_trimap(&binary, p.radius);
    let mut soft = trimap.clone();
    for l in soft.labels_mut() {
        if *l == TrimapLabel::Fg {
            *l = TrimapLabel::ProbFg;
        }
    }
    let first = grabcut_refine(crop, &soft, p.grabcut_iterations, p.seed)?;
    if first.mask.count() >= p.fg_min {
        return Ok(PslOutcome {
            mask: first.mask,
            binary,
            threshold: Some(threshold),
            used_fallback: false,
        });
    }
    let second = grabcut_refine(crop, &trimap, p.grabcut_iterations, p.seed)?;
    Ok(PslOutcome {
        mask: second.mask,
        binary,
        threshold: Some(threshold),
        used_fallback: true,
    })
}

/// `crop · m + μ · (1 − m)` per channel.
pub fn mask_attention(crop: &ImageBuf, mask: &Mask, mu: [f64; 3]) -> ImageBuf {
    assert_eq!(crop.dims(), mask.dims(), "mask and crop differ in size");
    let px = crop
        .pixels()
        .iter()
        .zip(mask.bits())
        .map(|(p, &m)| if m { *p } else { mu })
        .collect();
    ImageBuf::from_pixels(crop.width(), crop.height(), px).expect("same shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GrayBuf;

    #[test]
    fn empty_binary_is_all_background() {
        let t = build_trimap(&Mask::new(7, 5, false), 1);
        assert!(t.labels().iter().all(|&l| l == TrimapLabel::Bg));
    }

    #[test]
    fn block_trimap_rings() {
        let block = Mask::from_fn(12, 12, |x, y| (3..9).contains(&x) && (3..9).contains(&y));
        let t = build_trimap(&block, 1);
        for y in 0..12 {
            for x in 0..12 {
                let inner = (4..8).contains(&x) && (4..8).contains(&y);
                let ring = (2..10).contains(&x) && (2..10).contains(&y);
                let expected = if inner {
                    TrimapLabel::Fg
                } else if block.get(x, y) {
                    TrimapLabel::ProbFg
                } else if ring {
                    TrimapLabel::ProbBg
                } else {
                    TrimapLabel::Bg
                };
                assert_eq!(t.get(x, y), expected, "({x},{y})");
            }
        }
    }

    #[test]
    fn full_binary_has_no_background() {
        let t = build_trimap(&Mask::new(6, 5, true), 1);
        for y in 0..5 {
            for x in 0..6 {
                let border = x == 0 || y == 0 || x == 5 || y == 4;
                let expected = if border { TrimapLabel::ProbFg } else { TrimapLabel::Fg };
                assert_eq!(t.get(x, y), expected);
            }
        }
    }

    #[test]
    fn huge_gain_gives_empty_label() {
        let crop = ImageBuf::from_fn(16, 8, |x, _| [x as f64 / 16.0; 3]);
        let spm = Spm::from_gray(GrayBuf::from_fn(16, 8, |x, _| x as f64 / 15.0));
        let p = PslParams {
            fg_min: 16,
            radius: 1,
            grabcut_iterations: 5,
            seed: 0,
        };
        let out = pslgen(&crop, 1e6, &spm, &p).unwrap();
        assert!(out.binary.is_empty() && out.mask.is_empty());
        assert!(out.used_fallback);
    }

    #[test]
    fn constant_spm_gives_empty_label() {
        let crop = ImageBuf::new(8, 8, [0.2; 3]);
        let spm = Spm::from_gray(GrayBuf::new(8, 8, 0.7));
        let p = PslParams {
            fg_min: 0,
            radius: 1,
            grabcut_iterations: 5,
            seed: 0,
        };
        let out = pslgen(&crop, 1.0, &spm, &p).unwrap();
        assert!(out.mask.is_empty() && out.threshold.is_none());
    }

    #[test]
    fn attention_examples() {
        let crop = ImageBuf::from_fn(4, 4, |x, y| [x as f64 * 0.1, y as f64 * 0.1, 0.9]);
        let mu = [0.5; 3];
        assert_eq!(mask_attention(&crop, &Mask::new(4, 4, true), mu), crop);
        assert!(mask_attention(&crop, &Mask::new(4, 4, false), mu)
            .pixels()
            .iter()
            .all(|p| *p == mu));
        let checker = Mask::from_fn(4, 4, |x, y| (x + y) % 2 == 0);
        let out = mask_attention(&crop, &checker, mu);
        for y in 0..4 {
            for x in 0..4 {
                let want = if checker.get(x, y) { crop.get(x, y) } else { mu };
                assert_eq!(out.get(x, y), want);
            }
        }
    }
}
