//! Fixed-weight convolutional glyph reader.
//!
//! The input is first rectified: the text band is located from colour-edge
//! evidence and an affine map brings it to the nominal height, centre and
//! slant. Three rectified layers follow: an oriented-edge/blob filter bank
//! at full resolution and two 2×2 stride-2 average stages. Text is read from
//! the deepest map by normalized cross-correlation against the deep features
//! of each rendered glyph, sweeping columns left to right.

use super::font::{self, Glyph, QuadFrame, TextLine, GLYPH_FILL, GLYPH_H, GLYPH_W};
use super::{ActivationStack, Prediction, RecognitionModel};
use crate::geometry::{warp_image_clamped, Homography};
use crate::raster::ImageBuf;

/// First-layer filter bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterBank {
    /// 3×3 Sobel gradients in four orientations plus a 3×3 Laplacian.
    Sobel3,
    /// 5×5 derivative-of-Gaussian gradients (σ = 1) plus a Laplacian of Gaussian.
    Gaussian5,
}

impl FilterBank {
    fn kernel_size(self) -> usize {
        match self {
            FilterBank::Sobel3 => 3,
            FilterBank::Gaussian5 => 5,
        }
    }

    /// Five kernels, row-major, each `k × k`.
    fn kernels(self) -> Vec<Vec<f32>> {
        match self {
            FilterBank::Sobel3 => vec![
                vec![-1., 0., 1., -2., 0., 2., -1., 0., 1.],
                vec![-1., -2., -1., 0., 0., 0., 1., 2., 1.],
                vec![0., 1., 2., -1., 0., 1., -2., -1., 0.],
                vec![-2., -1., 0., -1., 0., 1., 0., 1., 2.],
                vec![0., 1., 0., 1., -4., 1., 0., 1., 0.],
            ]
            .into_iter()
            .map(normalize_l1)
            .collect(),
            FilterBank::Gaussian5 => {
                let r = 2i32;
                let g = |x: f32, y: f32| (-(x * x + y * y) / 2.0).exp();
                let build = |f: &dyn Fn(f32, f32) -> f32| {
                    let mut k = Vec::with_capacity(25);
                    for y in -r..=r {
                        for x in -r..=r {
                            k.push(f(x as f32, y as f32));
                        }
                    }
                    normalize_l1(k)
                };
                let s = std::f32::consts::FRAC_1_SQRT_2;
                let mut bank = vec![
                    build(&|x, y| x * g(x, y)),
                    build(&|x, y| y * g(x, y)),
                    build(&|x, y| (x - y) * s * g(x, y)),
                    build(&|x, y| (x + y) * s * g(x, y)),
                ];
                let mut log = build(&|x, y| (x * x + y * y - 2.0) * g(x, y));
                let mean = log.iter().sum::<f32>() / log.len() as f32;
                log.iter_mut().for_each(|v| *v -= mean);
                bank.push(normalize_l1(log));
                bank
            }
        }
    }
}

fn normalize_l1(mut k: Vec<f32>) -> Vec<f32> {
    let s: f32 = k.iter().map(|v| v.abs()).sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

const CHANNELS: usize = 5;
/// Total downscaling of the deepest layer.
const DEEP_STRIDE: usize = 4;
/// Minimum colour-gradient magnitude counted as edge evidence.
const EDGE_FLOOR: f64 = 0.2;
/// Fraction of the strongest gradient counted as edge evidence.
const EDGE_RELATIVE: f64 = 0.35;
/// Fewer edge hits than this leaves the input unrectified.
const MIN_HITS: usize = 12;
const SCALE_RANGE: (f64, f64) = (0.6, 1.6);
const MAX_SLANT: f64 = 0.25;

/// Text-band measurement in input pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Band {
    x_mid: f64,
    y_mid: f64,
    height: f64,
    slant: f64,
}

/// Best template match for one window start column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnScore {
    /// Normalized cross-correlation; −∞ for windows below the energy gate.
    pub score: f32,
    pub ch: char,
    /// Input-frame x of the matched glyph's left edge.
    pub origin: f64,
}

#[derive(Debug, Clone)]
struct Template {
    ch: char,
    /// Glyph origin offset from the window start, in input pixels.
    phase: usize,
    /// Zero-mean, unit-norm deep features over the window, laid out `[x][y][c]`.
    values: Vec<f32>,
}

/// Deterministic recognizer for the built-in 5×7 glyph alphabet.
///
/// Tuned for crops of the configured size holding one line of glyphs whose
/// rows span about `GLYPH_FILL` of the height; other sizes are resampled.
#[derive(Debug, Clone)]
pub struct ToyGlyphRecognizer {
    name: String,
    bank: FilterBank,
    kernels: Vec<Vec<f32>>,
    crop_w: usize,
    crop_h: usize,
    alphabet: Vec<char>,
    /// Band of a cleanly rendered, centred line; the rectification target.
    nominal: Band,
    /// Deep columns per matching window.
    window: usize,
    templates: Vec<Template>,
    score_threshold: f32,
    energy_gate: f32,
}

impl ToyGlyphRecognizer {
    pub fn new(bank: FilterBank, crop_w: usize, crop_h: usize) -> Self {
        Self::with_alphabet(bank, crop_w, crop_h, font::DEFAULT_ALPHABET)
    }

    pub fn with_alphabet(bank: FilterBank, crop_w: usize, crop_h: usize, alphabet: &str) -> Self {
        assert!(crop_w >= 16 && crop_h >= 16, "recognizer input must be at least 16x16");
        let alphabet: Vec<char> = alphabet
            .chars()
            .filter(|c| font::glyph(*c).is_some())
            .collect();
        let name = match bank {
            FilterBank::Sobel3 => "toy-sobel3",
            FilterBank::Gaussian5 => "toy-gauss5",
        };
        let scale = crop_h as f64 * GLYPH_FILL / GLYPH_H as f64;
        let window = ((GLYPH_W as f64 * scale + DEEP_STRIDE as f64) / DEEP_STRIDE as f64).ceil() as usize;
        let mut rec = Self {
            name: name.to_string(),
            bank,
            kernels: bank.kernels(),
            crop_w,
            crop_h,
            alphabet,
            nominal: Band {
                x_mid: crop_w as f64 / 2.0,
                y_mid: crop_h as f64 / 2.0,
                height: GLYPH_H as f64 * scale,
                slant: 0.0,
            },
            window,
            templates: Vec::new(),
            score_threshold: 0.6,
            energy_gate: 0.1,
        };
        rec.nominal = rec.calibrate();
        rec.templates = rec.build_templates();
        rec
    }

    /// The default two-member ensemble.
    pub fn ensemble(crop_w: usize, crop_h: usize) -> Vec<ToyGlyphRecognizer> {
        vec![
            Self::new(FilterBank::Sobel3, crop_w, crop_h),
            Self::new(FilterBank::Gaussian5, crop_w, crop_h),
        ]
    }

    pub fn bank(&self) -> FilterBank {
        self.bank
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    /// Font pixel size in input pixels.
    pub fn font_scale(&self) -> f64 {
        self.crop_h as f64 * GLYPH_FILL / GLYPH_H as f64
    }

    /// Crop-space y of the top glyph row for a vertically centered line.
    fn nominal_top(&self) -> f64 {
        (self.crop_h as f64 - GLYPH_H as f64 * self.font_scale()) / 2.0
    }

    /// Average band measured on clean renders of a few lines.
    fn calibrate(&self) -> Band {
        let samples = ["HI", "TEXT", "QUAWM", "B2", "J7L", "0189", "SZK", "CORN"];
        let mut acc = Band {
            x_mid: 0.0,
            y_mid: 0.0,
            height: 0.0,
            slant: 0.0,
        };
        let mut n = 0.0;
        for s in samples {
            let line = render_line(s, self.crop_w, self.crop_h);
            if let Some(b) = measure_band(&line) {
                acc.x_mid += b.x_mid;
                acc.y_mid += b.y_mid;
                acc.height += b.height;
                n += 1.0;
            }
        }
        assert!(n > 0.0, "calibration lines produced no edges");
        Band {
            x_mid: acc.x_mid / n,
            y_mid: acc.y_mid / n,
            height: acc.height / n,
            slant: 0.0,
        }
    }

    /// Map from model-input pixels to `crop` pixels that brings the text band
    /// to its nominal placement.
    fn rectification(&self, crop: &ImageBuf) -> Homography {
        let to_crop = Homography::scaling(
            crop.width() as f64 / self.crop_w as f64,
            crop.height() as f64 / self.crop_h as f64,
        );
        let Some(b) = measure_band(crop) else {
            return to_crop;
        };
        // Measure in model-input units.
        let sx = self.crop_w as f64 / crop.width() as f64;
        let sy = self.crop_h as f64 / crop.height() as f64;
        let (x_mid, y_mid, height) = (b.x_mid * sx, b.y_mid * sy, b.height * sy);
        let slant = (b.slant * sy / sx).clamp(-MAX_SLANT, MAX_SLANT);
        let s = (height / self.nominal.height).clamp(SCALE_RANGE.0, SCALE_RANGE.1);
        let (x0, y0) = (self.nominal.x_mid, self.nominal.y_mid);
        let m = [
            [s, 0.0, x_mid - s * x0],
            [slant * s, s, y_mid - slant * s * x0 - s * y0],
            [0.0, 0.0, 1.0],
        ];
        match Homography::from_matrix(m) {
            Ok(h) => to_crop.compose(&h),
            Err(_) => to_crop,
        }
    }

    fn layers(&self, input: &ImageBuf) -> Vec<ActivationStack> {
        let l1 = self.edge_layer(input);
        let l2 = avg_pool2(&l1);
        let l3 = avg_pool2(&l2);
        vec![l1, l2, l3]
    }

    /// Rectified filter responses averaged over the color channels, replicate padding.
    fn edge_layer(&self, input: &ImageBuf) -> ActivationStack {
        let (w, h) = input.dims();
        let k = self.bank.kernel_size();
        let r = k / 2;
        let (pw, ph) = (w + 2 * r, h + 2 * r);
        let mut out = ActivationStack::zeros(CHANNELS, w, h, 1, k);
        let plane = w * h;
        let mut padded = vec![0.0f32; pw * ph];
        let mut acc = vec![0.0f32; w];
        for c in 0..3 {
            for py in 0..ph {
                let y = py.saturating_sub(r).min(h - 1);
                for px in 0..pw {
                    let x = px.saturating_sub(r).min(w - 1);
                    padded[py * pw + px] = input.get(x, y)[c] as f32;
                }
            }
            for (ki, kern) in self.kernels.iter().enumerate() {
                let dst = &mut out.values[ki * plane..(ki + 1) * plane];
                for y in 0..h {
                    acc.iter_mut().for_each(|a| *a = 0.0);
                    for dy in 0..k {
                        let row = &padded[(y + dy) * pw..(y + dy + 1) * pw];
                        for dx in 0..k {
                            let kv = kern[dy * k + dx];
                            if kv == 0.0 {
                                continue;
                            }
                            for (a, v) in acc.iter_mut().zip(&row[dx..dx + w]) {
                                *a += kv * v;
                            }
                        }
                    }
                    for (d, a) in dst[y * w..(y + 1) * w].iter_mut().zip(&acc) {
                        *d += a.abs() / 3.0;
                    }
                }
            }
        }
        out
    }

    fn build_templates(&self) -> Vec<Template> {
        let scale = self.font_scale();
        let top = self.nominal_top();
        let canvas_w = (self.window + 2) * DEEP_STRIDE;
        let mut templates = Vec::new();
        for &ch in &self.alphabet {
            let g = font::glyph(ch).expect("filtered alphabet");
            for phase in 0..DEEP_STRIDE {
                let x0 = (DEEP_STRIDE + phase) as f64;
                let canvas = render_glyph(&g, canvas_w, self.crop_h, x0, top, scale);
                let deep = self.layers(&canvas).pop().expect("three layers");
                let mut values = window_features(&deep, 1, self.window);
                let mean = values.iter().sum::<f32>() / values.len() as f32;
                values.iter_mut().for_each(|v| *v -= mean);
                let norm = values.iter().map(|v| v * v).sum::<f32>().sqrt().max(1e-12);
                values.iter_mut().for_each(|v| *v /= norm);
                templates.push(Template { ch, phase, values });
            }
        }
        templates
    }

    /// Best match per window start column, from column −1 rightwards.
    pub fn column_scores(&self, crop: &ImageBuf) -> Vec<ColumnScore> {
        let p = self.predict(crop);
        self.scores(p.layers.last().expect("three layers"))
    }

    fn scores(&self, deep: &ActivationStack) -> Vec<ColumnScore> {
        let max_e = (0..deep.height)
            .flat_map(|y| (0..deep.width).map(move |x| (x, y)))
            .map(|(x, y)| (0..CHANNELS).map(|c| deep.get(c, x, y)).sum::<f32>())
            .fold(0.0f32, f32::max);
        if max_e <= 1e-6 {
            return (-1..deep.width as isize).map(|col| ColumnScore::empty(col)).collect();
        }
        let cells = (self.window * deep.height) as f32;
        let gate = self.energy_gate * max_e * cells;
        let n = (self.window * deep.height * CHANNELS) as f32;
        (-1..deep.width as isize)
            .map(|col| {
                let v = window_features(deep, col, self.window);
                let sum: f32 = v.iter().sum();
                if sum < gate {
                    return ColumnScore::empty(col);
                }
                let sq: f32 = v.iter().map(|x| x * x).sum::<f32>() - sum * sum / n;
                if sq <= 1e-20 {
                    return ColumnScore::empty(col);
                }
                let inv = 1.0 / sq.sqrt();
                let mut best = ColumnScore::empty(col);
                for t in &self.templates {
                    let score = t.values.iter().zip(&v).map(|(a, b)| a * b).sum::<f32>() * inv;
                    if score > best.score {
                        best = ColumnScore {
                            score,
                            ch: t.ch,
                            origin: (col * DEEP_STRIDE as isize) as f64 + t.phase as f64,
                        };
                    }
                }
                best
            })
            .collect()
    }

    /// Greedy selection by descending score of matches at or above the
    /// threshold whose glyph boxes do not
    /// overlap an already chosen one; read out left to right.
    fn decode(&self, deep: &ActivationStack) -> String {
        let mut cands: Vec<ColumnScore> = self
            .scores(deep)
            .into_iter()
            .filter(|c| c.score >= self.score_threshold)
            .collect();
        cands.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.origin.total_cmp(&b.origin)));
        let min_sep = GLYPH_W as f64 * self.font_scale();
        let mut chosen: Vec<ColumnScore> = Vec::new();
        for c in cands {
            if chosen.iter().all(|k| (k.origin - c.origin).abs() >= min_sep) {
                chosen.push(c);
            }
        }
        chosen.sort_by(|a, b| a.origin.total_cmp(&b.origin));
        chosen.into_iter().map(|c| c.ch).collect()
    }
}

impl ColumnScore {
    fn empty(col: isize) -> Self {
        Self {
            score: f32::NEG_INFINITY,
            ch: '\0',
            origin: (col * DEEP_STRIDE as isize) as f64,
        }
    }
}

/// Deep features of columns `[col, col + width)`, laid out `[x][y][c]`,
/// zero outside the map.
fn window_features(deep: &ActivationStack, col: isize, width: usize) -> Vec<f32> {
    let mut out = vec![0.0f32; width * deep.height * CHANNELS];
    for i in 0..width {
        let x = col + i as isize;
        if x < 0 || x >= deep.width as isize {
            continue;
        }
        for y in 0..deep.height {
            for c in 0..CHANNELS {
                out[(i * deep.height + y) * CHANNELS + c] = deep.get(c, x as usize, y);
            }
        }
    }
    out
}

/// Colour-gradient magnitude (central differences, summed over channels).
fn gradient_magnitude(img: &ImageBuf) -> Vec<f64> {
    let (w, h) = img.dims();
    let mut g = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
            let (l, r, u, d) = (img.get(xl, y), img.get(xr, y), img.get(x, yu), img.get(x, yd));
            g[y * w + x] = (0..3).map(|c| (r[c] - l[c]).abs() + (d[c] - u[c]).abs()).sum();
        }
    }
    g
}

/// Locates the text band from strong colour edges. `None` when the evidence is too thin.
fn measure_band(img: &ImageBuf) -> Option<Band> {
    let (w, h) = img.dims();
    let g = gradient_magnitude(img);
    let max = g.iter().copied().fold(0.0, f64::max);
    let thr = (EDGE_RELATIVE * max).max(EDGE_FLOOR);
    let hits: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| g[y * w + x] >= thr)
        .collect();
    if hits.len() < MIN_HITS {
        return None;
    }
    let mut xs: Vec<usize> = hits.iter().map(|p| p.0).collect();
    xs.sort_unstable();
    let q = |v: &[usize], f: f64| v[((v.len() - 1) as f64 * f).round() as usize] as f64;
    let x_lo = q(&xs, 0.01);
    let x_hi = q(&xs, 0.99) + 1.0;
    let x_mid = (x_lo + x_hi) / 2.0;
    // Top and bottom per half, from rows holding at least two hits.
    let half = |left: bool| -> Option<(f64, f64, f64)> {
        let mut rows = vec![0usize; h];
        let mut sx = 0.0;
        let mut n = 0usize;
        for &(x, y) in &hits {
            if ((x as f64 + 0.5) < x_mid) == left {
                rows[y] += 1;
                sx += x as f64 + 0.5;
                n += 1;
            }
        }
        let top = rows.iter().position(|&c| c >= 2)?;
        let bottom = rows.iter().rposition(|&c| c >= 2)?;
        Some((sx / n as f64, top as f64, bottom as f64 + 1.0))
    };
    let (l, r) = match (half(true), half(false)) {
        (Some(l), Some(r)) => (l, r),
        (Some(one), None) | (None, Some(one)) => (one, one),
        (None, None) => return None,
    };
    let (cl, cr) = ((l.1 + l.2) / 2.0, (r.1 + r.2) / 2.0);
    let slant = if r.0 - l.0 > 4.0 { (cr - cl) / (r.0 - l.0) } else { 0.0 };
    let y_mid = cl + slant * (x_mid - l.0);
    let height = ((l.2 - l.1) + (r.2 - r.1)) / 2.0;
    Some(Band {
        x_mid,
        y_mid,
        height,
        slant,
    })
}

/// 2×2, stride-2 average pooling (rectified input stays nonnegative).
fn avg_pool2(input: &ActivationStack) -> ActivationStack {
    let w = input.width / 2;
    let h = input.height / 2;
    let mut out = ActivationStack::zeros(input.channels, w, h, 2, 2);
    for c in 0..input.channels {
        let src = input.channel(c);
        for y in 0..h {
            for x in 0..w {
                let i = 2 * y * input.width + 2 * x;
                let v = src[i] + src[i + 1] + src[i + input.width] + src[i + input.width + 1];
                out.values[(c * h + y) * w + x] = v * 0.25;
            }
        }
    }
    out
}

/// Renders one glyph (ink 1, paper 0) with its top-left font corner at `(x0, y0)`.
fn render_glyph(g: &Glyph, w: usize, h: usize, x0: f64, y0: f64, scale: f64) -> ImageBuf {
    ImageBuf::from_fn(w, h, |x, y| {
        let u = (x as f64 + 0.5 - x0) / scale;
        let v = (y as f64 + 0.5 - y0) / scale;
        let ink = u >= 0.0
            && v >= 0.0
            && u < GLYPH_W as f64
            && v < GLYPH_H as f64
            && g.ink(u.floor() as usize, v.floor() as usize);
        if ink {
            [1.0; 3]
        } else {
            [0.0; 3]
        }
    })
}

/// Renders `text` centred in a `w × h` frame the way a corpus crop places it.
fn render_line(text: &str, w: usize, h: usize) -> ImageBuf {
    let frame = QuadFrame::default();
    let line = TextLine::new(text).expect("calibration text uses the font");
    let (ox, oy) = frame.text_origin(&line);
    let (sx, sy) = (w as f64 / frame.width, h as f64 / frame.height);
    ImageBuf::from_fn(w, h, |x, y| {
        let u = (x as f64 + 0.5) / sx - ox;
        let v = (y as f64 + 0.5) / sy - oy;
        if line.ink_at(u, v) {
            [1.0; 3]
        } else {
            [0.0; 3]
        }
    })
}

impl RecognitionModel for ToyGlyphRecognizer {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict(&self, crop: &ImageBuf) -> Prediction {
        let input_to_crop = self.rectification(crop);
        let input = warp_image_clamped(crop, &input_to_crop, self.crop_w, self.crop_h);
        let layers = self.layers(&input);
        let text = self.decode(layers.last().expect("three layers"));
        Prediction {
            text,
            layers,
            input_to_crop,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{project_point, warp_image, Point2};

    fn crop_of(text: &str, w: usize, h: usize, ink: [f64; 3], paper: [f64; 3]) -> ImageBuf {
        let line = render_line(text, w, h);
        ImageBuf::from_fn(w, h, |x, y| if line.get(x, y)[0] > 0.5 { ink } else { paper })
    }

    #[test]
    fn reads_clean_text() {
        for bank in [FilterBank::Sobel3, FilterBank::Gaussian5] {
            let rec = ToyGlyphRecognizer::new(bank, 128, 32);
            for text in ["AB", "E0D", "LOL", "WXYZ9", "I1"] {
                let crop = crop_of(text, 128, 32, [0.1, 0.1, 0.1], [0.9, 0.8, 0.7]);
                assert_eq!(rec.predict(&crop).text, text, "{bank:?}");
            }
        }
    }

    #[test]
    fn reads_shifted_and_scaled_text() {
        let rec = ToyGlyphRecognizer::new(FilterBank::Gaussian5, 128, 32);
        let clean = crop_of("K7Q", 128, 32, [0.9, 0.2, 0.2], [0.5; 3]);
        // Output pixel p samples the clean crop at 1.12·p + (-10, -3).
        let h = Homography::from_matrix([[1.12, 0.0, -10.0], [0.0, 1.12, -3.0], [0.0, 0.0, 1.0]]).unwrap();
        let moved = warp_image(&clean, &h, 128, 32, [0.5; 3]);
        assert_eq!(rec.predict(&moved).text, "K7Q");
    }

    #[test]
    fn canonical_line_is_left_in_place() {
        let rec = ToyGlyphRecognizer::new(FilterBank::Sobel3, 128, 32);
        let crop = crop_of("TEXT", 128, 32, [0.0; 3], [1.0; 3]);
        let h = rec.predict(&crop).input_to_crop;
        for p in [Point2::new(10.0, 5.0), Point2::new(120.0, 28.0)] {
            let q = project_point(&h, p).unwrap();
            assert!(q.dist(&p) < 1.5, "{p:?} -> {q:?}");
        }
    }

    #[test]
    fn other_sizes_are_resampled() {
        let rec = ToyGlyphRecognizer::new(FilterBank::Gaussian5, 128, 32);
        let crop = crop_of("HI", 256, 64, [0.1; 3], [0.9; 3]);
        let p = rec.predict(&crop);
        assert_eq!(p.text, "HI");
        assert_eq!((p.layers[0].width, p.layers[0].height), (128, 32));
    }

    #[test]
    fn uniform_crop_reads_nothing() {
        let rec = ToyGlyphRecognizer::new(FilterBank::Sobel3, 128, 32);
        let crop = ImageBuf::new(128, 32, [0.5; 3]);
        assert_eq!(rec.predict(&crop).text, "");
    }

    #[test]
    fn layer_geometry_is_consistent() {
        let rec = ToyGlyphRecognizer::new(FilterBank::Gaussian5, 128, 32);
        let p = rec.predict(&ImageBuf::new(128, 32, [0.2; 3]));
        assert_eq!(p.layers.len(), 3);
        assert_eq!((p.layers[0].width, p.layers[0].height), (128, 32));
        for pair in p.layers.windows(2) {
            assert_eq!(pair[1].width, pair[0].width / pair[1].stride);
            assert_eq!(pair[1].height, pair[0].height / pair[1].stride);
        }
        assert!(p.layers.iter().flat_map(|l| &l.values).all(|v| *v >= 0.0));
    }
}
