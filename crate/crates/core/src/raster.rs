//! Dense row-major rasters, Otsu thresholding and square-element binary morphology.

use crate::error::{Error, Result};

/// Color image with channels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    pixels: Vec<[f64; 3]>,
}

impl ImageBuf {
    pub fn new(width: usize, height: usize, fill: [f64; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![fill; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<[f64; 3]>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (width, height),
                got: (pixels.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
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

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[f64; 3]] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: [f64; 3]) {
        self.pixels[y * self.width + x] = v;
    }

    /// Arithmetic mean of the three channels.
    pub fn to_gray(&self) -> GrayBuf {
        GrayBuf {
            width: self.width,
            height: self.height,
            values: self
                .pixels
                .iter()
                .map(|p| (p[0] + p[1] + p[2]) / 3.0)
                .collect(),
        }
    }

    /// Clamps every channel into `[0, 1]`.
    pub fn clamp_unit(&mut self) {
        for p in &mut self.pixels {
            for c in p.iter_mut() {
                *c = c.clamp(0.0, 1.0);
            }
        }
    }
}

/// Single-channel real raster.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayBuf {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl GrayBuf {
    pub fn new(width: usize, height: usize, fill: f64) -> Self {
        Self {
            width,
            height,
            values: vec![fill; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (width, height),
                got: (values.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            values,
        }
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.values[y * self.width + x] = v;
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Strict threshold: foreground where `value > threshold`.
    pub fn threshold(&self, threshold: f64) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            bits: self.values.iter().map(|&v| v > threshold).collect(),
        }
    }
}

/// Binary raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (width, height),
                got: (bits.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
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

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn not(&self) -> Mask {
        self.map(|b| !b)
    }

    pub fn and(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &Mask) -> Mask {
        self.zip(other, |a, b| a && !b)
    }

    fn map(&self, f: impl Fn(bool) -> bool) -> Mask {
        Mask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| f(b)).collect(),
        }
    }

    fn zip(&self, other: &Mask, f: impl Fn(bool, bool) -> bool) -> Mask {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        Mask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Foreground pixel coordinates in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Nearest-neighbor resize using pixel-center alignment.
    pub fn resize_nearest(&self, width: usize, height: usize) -> Mask {
        if (width, height) == self.dims() {
            return self.clone();
        }
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        Mask::from_fn(width, height, |x, y| {
            let src_x = (((x as f64 + 0.5) * sx) as usize).min(self.width - 1);
            let src_y = (((y as f64 + 0.5) * sy) as usize).min(self.height - 1);
            self.get(src_x, src_y)
        })
    }
}

/// Number of histogram bins used by [`otsu_threshold`].
pub const OTSU_BINS: usize = 256;

/// Otsu threshold over a 256-bin histogram spanning the data range.
///
/// Returns the center of the last bin of the lower class for the split that
/// maximizes between-class variance (lowest split on ties). Variances are
/// compared exactly on bin indices, so mathematically tied splits always
/// resolve to the lowest one.
pub fn otsu_threshold(values: &GrayBuf) -> Result<f64> {
    otsu_threshold_slice(values.values())
}

pub fn otsu_threshold_slice(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi - lo >= 1e-12) {
        return Err(Error::ConstantInput);
    }
    let hist = histogram(values, lo, hi);
    let total_n: u64 = hist.iter().sum();
    let total_s: u64 = hist.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
    let mut best: Option<(usize, Between)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (k, &c) in hist.iter().enumerate().take(OTSU_BINS - 1) {
        n0 += c;
        s0 += k as u64 * c;
        let n1 = total_n - n0;
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let b = Between::new(n0, s0, n1, total_s - s0);
        if best.as_ref().is_none_or(|(_, top)| b.exceeds(top)) {
            best = Some((k, b));
        }
    }
    let k = best.map_or(0, |(k, _)| k);
    let bin_width = (hi - lo) / OTSU_BINS as f64;
    Ok(lo + (k as f64 + 0.5) * bin_width)
}

/// Between-class variance of a split on bin indices, up to the positive
/// factor `1 / N²`, held as the fraction `(n1·s0 − n0·s1)² / (n0·n1)`.
#[derive(Debug, Clone, Copy)]
struct Between {
    /// `None` when the square overflows; `approx` decides then.
    num: Option<u128>,
    den: u128,
    approx: f64,
}

impl Between {
    fn new(n0: u64, s0: u64, n1: u64, s1: u64) -> Self {
        let d = (n1 as i128 * s0 as i128 - n0 as i128 * s1 as i128).unsigned_abs();
        let den = n0 as u128 * n1 as u128;
        Self {
            num: d.checked_mul(d),
            den,
            approx: (d as f64) * (d as f64) / den as f64,
        }
    }

    fn exceeds(&self, other: &Between) -> bool {
        match (self.num, other.num) {
            (Some(a), Some(b)) => wide_mul(a, other.den) > wide_mul(b, self.den),
            _ => self.approx > other.approx,
        }
    }
}

/// Full 256-bit product as `(high, low)` halves.
fn wide_mul(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a1, a0) = (a >> 64, a & MASK);
    let (b1, b0) = (b >> 64, b & MASK);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & MASK) + (p10 & MASK);
    let lo = (p00 & MASK) | (mid << 64);
    let hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    (hi, lo)
}

/// Linear 256-bin histogram over `[lo, hi]`; the maximum lands in the last bin.
pub(crate) fn histogram(values: &[f64], lo: f64, hi: f64) -> [u64; OTSU_BINS] {
    let mut hist = [0u64; OTSU_BINS];
    let scale = OTSU_BINS as f64 / (hi - lo);
    for &v in values {
        let k = (((v - lo) * scale) as usize).min(OTSU_BINS - 1);
        hist[k] += 1;
    }
    hist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphKind {
    Erode,
    Dilate,
}

/// Binary morphology with a `(2r+1)×(2r+1)` square element.
///
/// Pixels outside the raster count as background for both operations.
pub fn morph(mask: &Mask, kind: MorphKind, radius: usize) -> Mask {
    let (w, h) = mask.dims();
    if w == 0 || h == 0 || radius == 0 {
        return mask.clone();
    }
    // Separable: rows then columns.
    let pass = |src: &[bool], len: usize, stride: usize, lines: usize, line_stride: usize| {
        let mut out = vec![false; src.len()];
        for line in 0..lines {
            let base = line * line_stride;
            // Prefix count of foreground along the line.
            let mut prefix = vec![0usize; len + 1];
            for i in 0..len {
                prefix[i + 1] = prefix[i] + src[base + i * stride] as usize;
            }
            for i in 0..len {
                let lo = i.saturating_sub(radius);
                let hi = (i + radius + 1).min(len);
                let fg = prefix[hi] - prefix[lo];
                out[base + i * stride] = match kind {
                    // Out-of-bounds neighbors are background, so a clipped window erodes.
                    MorphKind::Erode => fg == 2 * radius + 1,
                    MorphKind::Dilate => fg > 0,
                };
            }
        }
        out
    };
    let rows = pass(&mask.bits, w, 1, h, w);
    let bits = pass(&rows, h, w, w, 1);
    Mask {
        width: w,
        height: h,
        bits,
    }
}

pub fn erode(mask: &Mask, radius: usize) -> Mask {
    morph(mask, MorphKind::Erode, radius)
}

pub fn dilate(mask: &Mask, radius: usize) -> Mask {
    morph(mask, MorphKind::Dilate, radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erode_empty_is_empty() {
        let m = Mask::new(7, 5, false);
        assert_eq!(erode(&m, 1), m);
    }

    #[test]
    fn dilate_single_pixel_gives_block() {
        let mut m = Mask::new(7, 7, false);
        m.set(3, 3, true);
        let d = dilate(&m, 1);
        for y in 0..7 {
            for x in 0..7 {
                let inside = (2..=4).contains(&x) && (2..=4).contains(&y);
                assert_eq!(d.get(x, y), inside, "({x},{y})");
            }
        }
    }

    #[test]
    fn erode_block_leaves_interior() {
        let m = Mask::from_fn(16, 16, |x, y| (3..13).contains(&x) && (3..13).contains(&y));
        let e = erode(&m, 1);
        let expected = Mask::from_fn(16, 16, |x, y| (4..12).contains(&x) && (4..12).contains(&y));
        assert_eq!(e, expected);
        assert_eq!(e.count(), 64);
    }

    #[test]
    fn erosion_shrinks_at_border() {
        let m = Mask::new(6, 6, true);
        let e = erode(&m, 1);
        assert_eq!(e.count(), 16);
        assert!(!e.get(0, 3));
        assert_eq!(dilate(&m, 2), m);
    }

    #[test]
    fn otsu_two_levels() {
        let mut v = vec![0.1; 50];
        v.extend(vec![0.9; 50]);
        let t = otsu_threshold_slice(&v).unwrap();
        assert!(t > 0.1 && t < 0.9);
    }

    #[test]
    fn otsu_tied_splits_take_the_lowest() {
        // Three equal levels: splitting after the first or the second level
        // gives the same between-class variance.
        let mut v = vec![0.0; 10];
        v.extend(vec![0.5; 10]);
        v.extend(vec![1.0; 10]);
        let t = otsu_threshold_slice(&v).unwrap();
        assert_eq!(t, 0.5 / 256.0);
    }

    #[test]
    fn wide_mul_matches_small_products() {
        assert_eq!(wide_mul(7, 9), (0, 63));
        assert_eq!(wide_mul(u128::MAX, 2), (1, u128::MAX - 1));
        assert_eq!(wide_mul(1 << 127, 4), (2, 0));
    }

    #[test]
    fn otsu_constant_fails() {
        let g = GrayBuf::new(4, 4, 0.3);
        assert_eq!(otsu_threshold(&g), Err(Error::ConstantInput));
        assert_eq!(otsu_threshold_slice(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn resize_nearest_identity_and_upscale() {
        let m = Mask::from_fn(4, 2, |x, _| x < 2);
        assert_eq!(m.resize_nearest(4, 2), m);
        let up = m.resize_nearest(8, 4);
        assert_eq!(up.count(), 16);
        assert!(up.get(3, 3) && !up.get(4, 0));
    }

    #[test]
    fn gray_is_channel_mean() {
        let img = ImageBuf::new(2, 2, [0.3, 0.6, 0.9]);
        assert!((img.to_gray().get(1, 1) - 0.6).abs() < 1e-12);
    }
}
