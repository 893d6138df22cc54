//! Comparison labels derived from the quadrilateral alone: the filled quad,
//! a pyramid-shaped soft map, and a box-initialized graph cut.

use crate::error::Result;
use crate::geometry::{solve_homography, Point2, Quadrilateral, project_point};
use crate::graphcut::grabcut::DEFAULT_ITERATIONS;
use crate::graphcut::{grabcut_refine, GrabCutOutput, Trimap, TrimapLabel};
use crate::raster::{GrayBuf, ImageBuf, Mask};

/// Every pixel whose center lies inside or on the quad.
pub fn naive_psl(quad: &Quadrilateral, width: usize, height: usize) -> Mask {
    quad.rasterize(width, height)
}

/// Soft map peaking at 1 at the preimage of the unit-square center and
/// decaying linearly in Chebyshev distance to 0 on the quad boundary.
pub fn pyramid_psl(quad: &Quadrilateral, width: usize, height: usize) -> Result<GrayBuf> {
    let unit = Quadrilateral::rect(0.0, 0.0, 1.0, 1.0)?;
    let to_unit = solve_homography(quad, &unit)?;
    let inside = quad.rasterize(width, height);
    let mut out = GrayBuf::new(width, height, 0.0);
    for (x, y) in inside.foreground() {
        let p = Point2::new(x as f64 + 0.5, y as f64 + 0.5);
        let Ok(q) = project_point(&to_unit, p) else {
            continue;
        };
        let d = (q.x - 0.5).abs().max((q.y - 0.5).abs());
        out.set(x, y, (1.0 - 2.0 * d).clamp(0.0, 1.0));
    }
    Ok(out)
}

/// Binarized pyramid label: values strictly above one half.
pub fn pyramid_mask(quad: &Quadrilateral, width: usize, height: usize) -> Result<Mask> {
    Ok(pyramid_psl(quad, width, height)?.threshold(0.5))
}

/// Graph cut with the quad interior as probable foreground and the exterior
/// as hard background.
///
/// When the quad leaves no exterior pixels, the one-pixel image border is
/// forced to background. A single-colour image carries no evidence to
/// separate, so the interior is returned as is and flagged `all_hard`.
pub fn grabcut_box_psl(image: &ImageBuf, quad: &Quadrilateral, seed: u64) -> Result<GrabCutOutput> {
    let (w, h) = image.dims();
    let interior = naive_psl(quad, w, h);
    let first = image.pixels().first().copied();
    if image.pixels().iter().all(|p| Some(*p) == first) {
        return Ok(GrabCutOutput {
            mask: interior,
            all_hard: true,
            energies: Vec::new(),
        });
    }
    let labels: Vec<TrimapLabel> = interior
        .bits()
        .iter()
        .map(|&b| if b { TrimapLabel::ProbFg } else { TrimapLabel::Bg })
        .collect();
    let mut trimap = Trimap::from_labels(w, h, labels)?;
    if interior.count() == w * h {
        for y in 0..h {
            for x in 0..w {
                if x == 0 || y == 0 || x + 1 == w || y + 1 == h {
                    trimap.set(x, y, TrimapLabel::Bg);
                }
            }
        }
    }
    grabcut_refine(image, &trimap, DEFAULT_ITERATIONS, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_full_and_half() {
        let full = Quadrilateral::rect(0.0, 0.0, 10.0, 6.0).unwrap();
        assert_eq!(naive_psl(&full, 10, 6).count(), 60);
        let half = Quadrilateral::rect(0.0, 0.0, 5.0, 6.0).unwrap();
        assert_eq!(naive_psl(&half, 9, 6).count(), 6 * 5);
    }

    #[test]
    fn pyramid_profile() {
        let q = Quadrilateral::rect(0.5, 0.5, 10.5, 6.5).unwrap();
        let p = pyramid_psl(&q, 12, 8).unwrap();
        assert!((p.get(5, 3) - 1.0).abs() < 1e-9);
        // Pixel center (3.0, 3.5) is u = 0.25, v = 0.5.
        let q2 = Quadrilateral::rect(0.5, 0.5, 10.5, 6.5).unwrap();
        let to_unit = solve_homography(&q2, &Quadrilateral::rect(0.0, 0.0, 1.0, 1.0).unwrap()).unwrap();
        let u = project_point(&to_unit, Point2::new(3.0, 3.5)).unwrap();
        assert!((u.x - 0.25).abs() < 1e-9);
        assert!(p.values().iter().all(|v| (0.0..=1.0).contains(v)));
        let naive = naive_psl(&q, 12, 8);
        for (v, n) in p.values().iter().zip(naive.bits()) {
            assert!(*v == 0.0 || *n);
        }
    }

    #[test]
    fn pyramid_edge_is_zero() {
        let q = Quadrilateral::rect(0.5, 0.5, 8.5, 4.5).unwrap();
        let p = pyramid_psl(&q, 10, 6).unwrap();
        // Pixel (0, 2) has its center on the left edge.
        assert!(p.get(0, 2).abs() < 1e-9);
    }

    #[test]
    fn grabcut_box_finds_rectangle() {
        let img = ImageBuf::from_fn(40, 30, |x, y| {
            if (14..26).contains(&x) && (10..20).contains(&y) {
                [0.9, 0.1, 0.1]
            } else {
                [0.1, 0.1, 0.9]
            }
        });
        let quad = Quadrilateral::rect(8.0, 5.0, 32.0, 25.0).unwrap();
        let out = grabcut_box_psl(&img, &quad, 1).unwrap();
        let truth = Mask::from_fn(40, 30, |x, y| (14..26).contains(&x) && (10..20).contains(&y));
        let tp = out.mask.and(&truth).count() as f64;
        let f1 = 2.0 * tp / (out.mask.count() + truth.count()) as f64;
        assert!(f1 >= 0.95, "f1 {f1}");
        assert!(out.mask.and_not(&naive_psl(&quad, 40, 30)).is_empty());
    }

    #[test]
    fn grabcut_box_uniform_full_image() {
        let img = ImageBuf::new(12, 8, [0.3, 0.3, 0.6]);
        let quad = Quadrilateral::rect(0.0, 0.0, 12.0, 8.0).unwrap();
        let out = grabcut_box_psl(&img, &quad, 0).unwrap();
        assert!(out.all_hard);
        assert_eq!(out.mask.count(), 96);
    }
}
