//! Random geometric and photometric perturbations of a crop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{raster_quad, solve_homography, warp_image, Homography, Point2, Quadrilateral};
use crate::raster::ImageBuf;

/// Ranges of the augmentation distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentParams {
    /// Max corner displacement per axis as a fraction of the crop's shorter side.
    pub perspective: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    /// Max translation as a fraction of crop width/height.
    pub shift: f64,
    /// Brightness and contrast factors are drawn from `1 ± photometric`.
    pub photometric: f64,
    pub noise_sigma_max: f64,
}

impl Default for AugmentParams {
    fn default() -> Self {
        Self {
            perspective: 0.08,
            scale_min: 0.85,
            scale_max: 1.15,
            shift: 0.05,
            photometric: 0.15,
            noise_sigma_max: 0.02,
        }
    }
}

/// Augmented crops with the crop → augmented transform `T` and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSet {
    pub crops: Vec<ImageBuf>,
    /// `T⁻¹`: augmented frame → original crop frame.
    pub inverses: Vec<Homography>,
    /// `T`: original crop frame → augmented frame.
    pub forwards: Vec<Homography>,
}

impl AugmentedSet {
    pub fn len(&self) -> usize {
        self.crops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crops.is_empty()
    }
}

fn sample_transform(rng: &mut ChaCha8Rng, p: &AugmentParams, w: f64, h: f64) -> Option<Homography> {
    let scale = rng.random_range(p.scale_min..=p.scale_max);
    let shift = (
        rng.random_range(-p.shift..=p.shift) * w,
        rng.random_range(-p.shift..=p.shift) * h,
    );
    let src = raster_quad(w as usize, h as usize);
    let (cx, cy) = (w / 2.0, h / 2.0);
    let mut dst = [Point2::new(0.0, 0.0); 4];
    let side = w.min(h);
    for (d, c) in dst.iter_mut().zip(src.corners()) {
        let jx = rng.random_range(-p.perspective..=p.perspective) * side;
        let jy = rng.random_range(-p.perspective..=p.perspective) * side;
        *d = Point2::new(
            cx + scale * (c.x - cx) + shift.0 + jx,
            cy + scale * (c.y - cy) + shift.1 + jy,
        );
    }
    let dst = Quadrilateral::new(dst).ok()?;
    solve_homography(&src, &dst).ok()
}

/// Draws `n` augmentations of `crop`; sample 0 is the unmodified crop.
///
/// Regions mapped from outside the crop read as `fill`.
pub fn sample_augmentations_with(
    crop: &ImageBuf,
    n: usize,
    seed: u64,
    fill: [f64; 3],
    params: &AugmentParams,
) -> AugmentedSet {
    let (w, h) = crop.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set = AugmentedSet {
        crops: Vec::with_capacity(n),
        inverses: Vec::with_capacity(n),
        forwards: Vec::with_capacity(n),
    };
    if n == 0 {
        return set;
    }
    set.crops.push(crop.clone());
    set.inverses.push(Homography::identity());
    set.forwards.push(Homography::identity());
    for _ in 1..n {
        let (forward, inverse) = loop {
            if let Some(t) = sample_transform(&mut rng, params, w as f64, h as f64) {
                if let Ok(inv) = t.inverse() {
                    break (t, inv);
                }
            }
        };
        let mut img = warp_image(crop, &inverse, w, h, fill);
        let contrast = 1.0 + rng.random_range(-params.photometric..=params.photometric);
        let brightness = 1.0 + rng.random_range(-params.photometric..=params.photometric);
        let sigma = rng.random_range(0.0..=params.noise_sigma_max);
        let noise = Normal::new(0.0, sigma).expect("finite sigma");
        for px in img.pixels_mut() {
            for v in px.iter_mut() {
                let jittered = ((*v - 0.5) * contrast + 0.5) * brightness;
                *v = (jittered + noise.sample(&mut rng)).clamp(0.0, 1.0);
            }
        }
        set.crops.push(img);
        set.inverses.push(inverse);
        set.forwards.push(forward);
    }
    set
}

/// [`sample_augmentations_with`] at the default ranges.
pub fn sample_augmentations(crop: &ImageBuf, n: usize, seed: u64, fill: [f64; 3]) -> AugmentedSet {
    sample_augmentations_with(crop, n, seed, fill, &AugmentParams::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::project_point;

    fn crop() -> ImageBuf {
        ImageBuf::from_fn(40, 16, |x, y| [x as f64 / 40.0, y as f64 / 16.0, 0.3])
    }

    #[test]
    fn first_sample_is_identity() {
        let c = crop();
        let set = sample_augmentations(&c, 1, 9, [0.5; 3]);
        assert_eq!(set.len(), 1);
        assert_eq!(set.crops[0], c);
        assert_eq!(set.inverses[0], Homography::identity());
    }

    #[test]
    fn corners_round_trip() {
        let set = sample_augmentations(&crop(), 16, 4, [0.5; 3]);
        for (t, inv) in set.forwards.iter().zip(&set.inverses) {
            for c in raster_quad(40, 16).corners() {
                let back = project_point(inv, project_point(t, *c).unwrap()).unwrap();
                assert!(back.dist(c) < 1e-6);
            }
        }
    }

    #[test]
    fn deterministic() {
        let a = sample_augmentations(&crop(), 8, 77, [0.5; 3]);
        let b = sample_augmentations(&crop(), 8, 77, [0.5; 3]);
        assert_eq!(a, b);
        let c = sample_augmentations(&crop(), 8, 78, [0.5; 3]);
        assert_ne!(a.crops[1], c.crops[1]);
    }
}
