//! Iterated graph-cut segmentation with colour GMMs and a four-label trimap.

use crate::error::{Error, Result};
use crate::raster::{ImageBuf, Mask};

use super::gmm::{fit_gmm, Gmm};
use super::maxflow::BkGraph;

pub const COMPONENTS: usize = 5;
pub const LAMBDA: f64 = 50.0;
pub const DEFAULT_ITERATIONS: usize = 5;
/// Stand-in for an infinite terminal capacity.
pub const HARD_CAPACITY: f64 = 1e9;
/// Unary cost when one side has no pixels to fit: `−ln(1e-9)`.
pub const EMPTY_SIDE_COST: f64 = 20.723_265_836_946_41;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrimapLabel {
    Bg,
    Fg,
    ProbBg,
    ProbFg,
}

impl TrimapLabel {
    pub fn is_hard(self) -> bool {
        matches!(self, TrimapLabel::Bg | TrimapLabel::Fg)
    }

    /// Initial segmentation: `Fg` and `ProbFg` start as foreground.
    pub fn initial_fg(self) -> bool {
        matches!(self, TrimapLabel::Fg | TrimapLabel::ProbFg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trimap {
    width: usize,
    height: usize,
    labels: Vec<TrimapLabel>,
}

impl Trimap {
    pub fn new(width: usize, height: usize, fill: TrimapLabel) -> Self {
        Self {
            width,
            height,
            labels: vec![fill; width * height],
        }
    }

    pub fn from_labels(width: usize, height: usize, labels: Vec<TrimapLabel>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (width, height),
                got: (labels.len(), 1),
            });
        }
        Ok(Self { width, height, labels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> TrimapLabel {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, l: TrimapLabel) {
        self.labels[y * self.width + x] = l;
    }

    pub fn labels(&self) -> &[TrimapLabel] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [TrimapLabel] {
        &mut self.labels
    }

    /// Pixels carrying label `l`.
    pub fn mask_of(&self, l: TrimapLabel) -> Mask {
        let bits = self.labels.iter().map(|&x| x == l).collect();
        Mask::from_bits(self.width, self.height, bits).expect("same shape")
    }

    pub fn initial_segmentation(&self) -> Mask {
        let bits = self.labels.iter().map(|l| l.initial_fg()).collect();
        Mask::from_bits(self.width, self.height, bits).expect("same shape")
    }
}

/// Gibbs energy before and after one cut, both at that iteration's GMMs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutEnergy {
    pub before: f64,
    pub after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrabCutOutput {
    pub mask: Mask,
    /// Set when the trimap had no probable pixels, so nothing was optimized.
    pub all_hard: bool,
    pub energies: Vec<CutEnergy>,
}

/// Contrast-sensitive smoothness weights for right and down neighbours.
#[derive(Debug, Clone)]
pub struct Smoothness {
    pub beta: f64,
    /// Weight between `(x, y)` and `(x + 1, y)`; zero in the last column.
    pub right: Vec<f64>,
    /// Weight between `(x, y)` and `(x, y + 1)`; zero in the last row.
    pub down: Vec<f64>,
}

#[inline]
fn color_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
}

impl Smoothness {
    /// `β = 1 / (2·mean ‖z_p − z_q‖²)` over 4-neighbour pairs, zero for flat images.
    pub fn new(image: &ImageBuf, lambda: f64) -> Self {
        let (w, h) = image.dims();
        let px = image.pixels();
        let mut right = vec![0.0; w * h];
        let mut down = vec![0.0; w * h];
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    right[i] = color_sq(&px[i], &px[i + 1]);
                    sum += right[i];
                    pairs += 1;
                }
                if y + 1 < h {
                    down[i] = color_sq(&px[i], &px[i + w]);
                    sum += down[i];
                    pairs += 1;
                }
            }
        }
        let beta = if sum > 0.0 { pairs as f64 / (2.0 * sum) } else { 0.0 };
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                right[i] = if x + 1 < w { lambda * (-beta * right[i]).exp() } else { 0.0 };
                down[i] = if y + 1 < h { lambda * (-beta * down[i]).exp() } else { 0.0 };
            }
        }
        Self { beta, right, down }
    }
}

/// Per-pixel unary costs `(cost if fg, cost if bg)`.
pub fn unary_costs(image: &ImageBuf, fg: Option<&Gmm>, bg: Option<&Gmm>) -> Vec<(f64, f64)> {
    let cost = |g: Option<&Gmm>, z: &[f64; 3]| match g {
        Some(g) => -g.log_likelihood(z),
        None => EMPTY_SIDE_COST,
    };
    image
        .pixels()
        .iter()
        .map(|z| (cost(fg, z), cost(bg, z)))
        .collect()
}

/// `Σ unary + Σ pairwise` over label-changing 4-neighbour pairs.
pub fn gibbs_energy(mask: &Mask, unary: &[(f64, f64)], smooth: &Smoothness) -> f64 {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut e = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            e += if bits[i] { unary[i].0 } else { unary[i].1 };
            if x + 1 < w && bits[i] != bits[i + 1] {
                e += smooth.right[i];
            }
            if y + 1 < h && bits[i] != bits[i + w] {
                e += smooth.down[i];
            }
        }
    }
    e
}

fn fit_side(image: &ImageBuf, mask: &Mask, want: bool, seed: u64) -> Result<Option<Gmm>> {
    let pixels: Vec<[f64; 3]> = image
        .pixels()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &b)| b == want)
        .map(|(p, _)| *p)
        .collect();
    if pixels.is_empty() {
        return Ok(None);
    }
    fit_gmm(&pixels, COMPONENTS, seed).map(Some)
}

/// Runs `iterations` rounds of GMM fitting and minimum cut.
///
/// Hard `Fg`/`Bg` pixels never change; only `ProbFg`/`ProbBg` pixels are
/// relabelled. The same `seed` drives every GMM fit.
pub fn grabcut_refine(image: &ImageBuf, trimap: &Trimap, iterations: usize, seed: u64) -> Result<GrabCutOutput> {
    if image.dims() != trimap.dims() {
        return Err(Error::ShapeMismatch {
            expected: image.dims(),
            got: trimap.dims(),
        });
    }
    let (w, h) = image.dims();
    let mut mask = trimap.initial_segmentation();
    let all_hard = trimap.labels().iter().all(|l| l.is_hard());
    let mut energies = Vec::new();
    if all_hard || iterations == 0 {
        return Ok(GrabCutOutput { mask, all_hard, energies });
    }
    let smooth = Smoothness::new(image, LAMBDA);
    let labels = trimap.labels();
    for _ in 0..iterations {
        let fg = fit_side(image, &mask, true, seed)?;
        let bg = fit_side(image, &mask, false, seed)?;
        let unary = unary_costs(image, fg.as_ref(), bg.as_ref());
        let before = gibbs_energy(&mask, &unary, &smooth);

        let mut g = BkGraph::with_capacity(w * h, 2 * w * h);
        g.add_nodes(w * h);
        for (i, (&l, &(cf, cb))) in labels.iter().zip(&unary).enumerate() {
            match l {
                TrimapLabel::Fg => g.add_tweights(i, HARD_CAPACITY, 0.0),
                TrimapLabel::Bg => g.add_tweights(i, 0.0, HARD_CAPACITY),
                // Source side is foreground: cutting s→i pays the background cost.
                _ => {
                    let m = cf.min(cb);
                    g.add_tweights(i, cb - m, cf - m);
                }
            }
        }
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if x + 1 < w {
                    g.add_edge(i, i + 1, smooth.right[i], smooth.right[i]);
                }
                if y + 1 < h {
                    g.add_edge(i, i + w, smooth.down[i], smooth.down[i]);
                }
            }
        }
        g.maxflow();
        let bits: Vec<bool> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| match l {
                TrimapLabel::Fg => true,
                TrimapLabel::Bg => false,
                _ => g.is_source_side(i),
            })
            .collect();
        let next = Mask::from_bits(w, h, bits)?;
        let after = gibbs_energy(&next, &unary, &smooth);
        energies.push(CutEnergy { before, after });
        let converged = next == mask;
        mask = next;
        if converged {
            // Refitting on an unchanged labelling reproduces the same cut.
            break;
        }
    }
    Ok(GrabCutOutput {
        mask,
        all_hard: false,
        energies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob_image() -> (ImageBuf, Mask) {
        let (w, h) = (32, 24);
        let truth = Mask::from_fn(w, h, |x, y| {
            let dx = x as f64 + 0.5 - 16.0;
            let dy = y as f64 + 0.5 - 12.0;
            dx * dx + dy * dy <= 36.0
        });
        let img = ImageBuf::from_fn(w, h, |x, y| {
            if truth.get(x, y) {
                [0.9, 0.1, 0.1]
            } else {
                [0.1, 0.1, 0.9]
            }
        });
        (img, truth)
    }

    #[test]
    fn hard_only_trimap_is_returned_verbatim() {
        let (img, truth) = blob_image();
        let labels = truth
            .bits()
            .iter()
            .map(|&b| if b { TrimapLabel::Fg } else { TrimapLabel::Bg })
            .collect();
        let t = Trimap::from_labels(32, 24, labels).unwrap();
        let out = grabcut_refine(&img, &t, 5, 0).unwrap();
        assert!(out.all_hard);
        assert_eq!(out.mask, truth);
    }

    #[test]
    fn zero_iterations_is_initial_segmentation() {
        let (img, _) = blob_image();
        let mut t = Trimap::new(32, 24, TrimapLabel::ProbBg);
        t.set(3, 3, TrimapLabel::ProbFg);
        t.set(4, 3, TrimapLabel::Fg);
        let out = grabcut_refine(&img, &t, 0, 0).unwrap();
        assert_eq!(out.mask.count(), 2);
        assert!(out.mask.get(3, 3) && out.mask.get(4, 3));
    }

    #[test]
    fn recovers_two_tone_blob() {
        let (img, truth) = blob_image();
        let mut t = Trimap::new(32, 24, TrimapLabel::ProbBg);
        for y in 0..24 {
            for x in 0..32 {
                let dx = x as f64 + 0.5 - 16.0;
                let dy = y as f64 + 0.5 - 12.0;
                let r2 = dx * dx + dy * dy;
                if r2 <= 4.0 {
                    t.set(x, y, TrimapLabel::Fg);
                } else if r2 >= 100.0 {
                    t.set(x, y, TrimapLabel::Bg);
                }
            }
        }
        let out = grabcut_refine(&img, &t, 5, 3).unwrap();
        let tp = out.mask.and(&truth).count() as f64;
        let f1 = 2.0 * tp / (out.mask.count() + truth.count()) as f64;
        assert!(f1 >= 0.95, "f1 {f1}");
        for e in &out.energies {
            assert!(e.after <= e.before + 1e-9 * (1.0 + e.before.abs()));
        }
    }

    #[test]
    fn flat_image_has_zero_beta() {
        let img = ImageBuf::new(4, 4, [0.5; 3]);
        let s = Smoothness::new(&img, LAMBDA);
        assert_eq!(s.beta, 0.0);
        assert_eq!(s.right[0], LAMBDA);
        assert_eq!(s.right[3], 0.0);
    }
}
