//! Synthetic text corpus with exact per-instance glyph masks.
//!
//! Each instance is a rotated 4:1 quad holding a centered line of the
//! built-in 5×7 glyphs; a pixel is ink when its center falls on an ink cell.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use pseudolabel::geometry::{Point2, Quadrilateral};
use pseudolabel::raster::{dilate, ImageBuf, Mask};
use pseudolabel::recognizer::font::{QuadFrame, TextLine, DEFAULT_ALPHABET, GLYPH_FILL, GLYPH_H};

use crate::annotations::{write_annotations, Instance};
use crate::error::CliError;
use crate::imageio::{quantize, write_mask, write_rgb};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackgroundStyle {
    Solid,
    Gradient,
    NoiseTexture,
    /// Picks one of the other styles per image.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub images: usize,
    pub width: usize,
    pub height: usize,
    pub instances_per_image: usize,
    /// Rendered glyph height range in pixels.
    pub glyph_height: (f64, f64),
    /// Rotation is drawn from `±rotation_deg`.
    pub rotation_deg: f64,
    pub background: BackgroundStyle,
    /// Minimum L∞ distance between ink and every background colour.
    pub separation: f64,
    /// Minimum L∞ distance between ink and the attention fill colour.
    pub fill_separation: f64,
    pub fill: [f64; 3],
    pub min_chars: usize,
    pub max_chars: usize,
    /// Sensor noise standard deviation.
    pub noise: f64,
    /// Probability that a line sits on a soft-edged backdrop panel.
    pub backdrop_prob: f64,
    /// Peak opacity range of a backdrop.
    pub backdrop_opacity: (f64, f64),
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            images: 50,
            width: 320,
            height: 240,
            instances_per_image: 4,
            glyph_height: (10.0, 16.0),
            rotation_deg: 15.0,
            background: BackgroundStyle::Mixed,
            separation: 0.35,
            fill_separation: 0.25,
            fill: [0.5; 3],
            min_chars: 2,
            max_chars: 5,
            noise: 0.01,
            backdrop_prob: 0.5,
            backdrop_opacity: (0.6, 0.95),
            seed: 7,
        }
    }
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(format!("corpus: {m}")));
        if !(1..=5).contains(&self.instances_per_image) {
            return bad("instances_per_image must be in 1..=5");
        }
        if self.min_chars == 0 || self.min_chars > self.max_chars || self.max_chars > QuadFrame::default().max_chars() {
            return bad("character counts out of range");
        }
        let (lo, hi) = self.glyph_height;
        if !(lo >= 7.0 && lo <= hi) {
            return bad("glyph height range must satisfy 7 <= lo <= hi");
        }
        if self.width < 16 || self.height < 16 {
            return bad("image too small");
        }
        if !(0.0..=0.5).contains(&self.separation) || !(0.0..=0.5).contains(&self.fill_separation) {
            return bad("separations must lie in [0, 0.5]");
        }
        let (o0, o1) = self.backdrop_opacity;
        if !(0.0..=1.0).contains(&self.backdrop_prob) || !(0.0 <= o0 && o0 <= o1 && o1 <= 1.0) {
            return bad("backdrop probability and opacity must lie in [0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusImage {
    pub id: String,
    pub image: ImageBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub images: Vec<CorpusImage>,
    pub instances: Vec<Instance>,
    /// Image-resolution glyph mask per instance, aligned with `instances`.
    pub gt_masks: Vec<Mask>,
}

impl Corpus {
    pub fn image(&self, id: &str) -> Option<&ImageBuf> {
        self.images.iter().find(|i| i.id == id).map(|i| &i.image)
    }
}

/// Background colour field of one image.
enum Field {
    Solid([f64; 3]),
    Gradient { c0: [f64; 3], c1: [f64; 3], dir: (f64, f64), lo: f64, span: f64 },
    Noise { base: [f64; 3], amp: f64, cell: f64, grid: Vec<f64>, gw: usize },
}

impl Field {
    fn sample(rng: &mut ChaCha8Rng, style: BackgroundStyle, w: usize, h: usize) -> Self {
        let style = match style {
            BackgroundStyle::Mixed => *[BackgroundStyle::Solid, BackgroundStyle::Gradient, BackgroundStyle::NoiseTexture]
                .choose(rng)
                .expect("nonempty"),
            s => s,
        };
        let color = |rng: &mut ChaCha8Rng| -> [f64; 3] { [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)] };
        match style {
            BackgroundStyle::Gradient => {
                let c0 = color(rng);
                let c1 = c0.map(|v| (v + rng.random_range(-0.25..0.25)).clamp(0.0, 1.0));
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                let dir = (theta.cos(), theta.sin());
                let proj = |x: f64, y: f64| x * dir.0 + y * dir.1;
                let corners = [proj(0.0, 0.0), proj(w as f64, 0.0), proj(0.0, h as f64), proj(w as f64, h as f64)];
                let lo = corners.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Field::Gradient { c0, c1, dir, lo, span: hi - lo }
            }
            BackgroundStyle::NoiseTexture => {
                let base = color(rng).map(|v| v.clamp(0.15, 0.85));
                let cell = 16.0;
                let gw = (w as f64 / cell).ceil() as usize + 2;
                let gh = (h as f64 / cell).ceil() as usize + 2;
                let grid = (0..gw * gh).map(|_| rng.random_range(-1.0..1.0)).collect();
                Field::Noise { base, amp: 0.12, cell, grid, gw }
            }
            _ => Field::Solid(color(rng)),
        }
    }

    fn at(&self, x: f64, y: f64) -> [f64; 3] {
        match self {
            Field::Solid(c) => *c,
            Field::Gradient { c0, c1, dir, lo, span } => {
                let t = ((x * dir.0 + y * dir.1 - lo) / span).clamp(0.0, 1.0);
                [0, 1, 2].map(|i| c0[i] + t * (c1[i] - c0[i]))
            }
            Field::Noise { base, amp, cell, grid, gw } => {
                let (gx, gy) = (x / cell, y / cell);
                let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
                let (fx, fy) = (gx - ix as f64, gy - iy as f64);
                let g = |i: usize, j: usize| grid[j * gw + i];
                let n = g(ix, iy) * (1.0 - fx) * (1.0 - fy)
                    + g(ix + 1, iy) * fx * (1.0 - fy)
                    + g(ix, iy + 1) * (1.0 - fx) * fy
                    + g(ix + 1, iy + 1) * fx * fy;
                base.map(|v| (v + amp * n).clamp(0.0, 1.0))
            }
        }
    }
}

/// Channel-wise `(min, max)` of `image` over the pixels of `region`.
fn color_range(image: &ImageBuf, region: &Mask) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for (x, y) in region.foreground() {
        let c = image.get(x, y);
        for i in 0..3 {
            lo[i] = lo[i].min(c[i]);
            hi[i] = hi[i].max(c[i]);
        }
    }
    (lo, hi)
}

/// Draws an ink colour at L∞ distance ≥ `sep` from the whole background
/// range and ≥ `fill_sep` from `fill`.
fn pick_ink(rng: &mut ChaCha8Rng, lo: [f64; 3], hi: [f64; 3], spec: &CorpusSpec) -> Option<[f64; 3]> {
    for _ in 0..200 {
        let c = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        let bg_ok = (0..3).any(|i| c[i] >= hi[i] + spec.separation || c[i] <= lo[i] - spec.separation);
        let fill_ok = (0..3).any(|i| (c[i] - spec.fill[i]).abs() >= spec.fill_separation);
        if bg_ok && fill_ok {
            return Some(c);
        }
    }
    None
}

/// Rotated quad of a text line and the inverse map from image pixels to font units.
struct Placement {
    center: Point2,
    theta: f64,
    /// Pixels per font unit.
    scale: f64,
    frame: QuadFrame,
}

impl Placement {
    fn quad(&self) -> Quadrilateral {
        let (hw, hh) = (self.frame.width * self.scale / 2.0, self.frame.height * self.scale / 2.0);
        let (s, c) = self.theta.sin_cos();
        let corner = |dx: f64, dy: f64| Point2::new(self.center.x + c * dx - s * dy, self.center.y + s * dx + c * dy);
        Quadrilateral::new([corner(-hw, -hh), corner(hw, -hh), corner(hw, hh), corner(-hw, hh)]).expect("positive size")
    }

    /// Font-unit coordinates of image point `(x, y)` relative to the quad's top-left corner.
    fn to_frame(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let (dx, dy) = (x - self.center.x, y - self.center.y);
        let lx = c * dx + s * dy;
        let ly = -s * dx + c * dy;
        (lx / self.scale + self.frame.width / 2.0, ly / self.scale + self.frame.height / 2.0)
    }
}

/// Blends a colour panel behind the line. Opacity follows a flat-topped
/// falloff in quad-normalized coordinates, so the panel fades out around
/// the quad boundary without a hard edge. Pixels in `keep` are untouched.
fn paint_backdrop(image: &mut ImageBuf, p: &Placement, color: [f64; 3], opacity: f64, keep: &Mask) {
    let (w, h) = image.dims();
    let (x0, y0, x1, y1) = p.quad().bounds();
    let pad = 0.5 * p.frame.height * p.scale;
    let xs = (x0 - pad).max(0.0) as usize..((x1 + pad).ceil() as usize).min(w);
    let ys = (y0 - pad).max(0.0) as usize..((y1 + pad).ceil() as usize).min(h);
    for y in ys {
        for x in xs.clone() {
            if keep.get(x, y) {
                continue;
            }
            let (u, v) = p.to_frame(x as f64 + 0.5, y as f64 + 0.5);
            let du = (u / p.frame.width - 0.5) / 0.45;
            let dv = (v / p.frame.height - 0.5) / 0.55;
            let d2 = du * du + dv * dv;
            let a = opacity * (-d2 * d2).exp();
            let c = image.get(x, y);
            image.set(x, y, [0, 1, 2].map(|i| c[i] + a * (color[i] - c[i])));
        }
    }
}

fn render_mask(p: &Placement, line: &TextLine, quad: &Quadrilateral, w: usize, h: usize) -> Mask {
    let (ox, oy) = p.frame.text_origin(line);
    let inside = quad.rasterize(w, h);
    let mut m = Mask::new(w, h, false);
    for (x, y) in inside.foreground() {
        let (u, v) = p.to_frame(x as f64 + 0.5, y as f64 + 0.5);
        if line.ink_at(u - ox, v - oy) {
            m.set(x, y, true);
        }
    }
    m
}

/// Renders the corpus; deterministic under `spec.seed`.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<Corpus, CliError> {
    spec.validate()?;
    let alphabet: Vec<char> = DEFAULT_ALPHABET.chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width, spec.height);
    let mut corpus = Corpus {
        images: Vec::with_capacity(spec.images),
        instances: Vec::new(),
        gt_masks: Vec::new(),
    };
    for i in 0..spec.images {
        let id = format!("img_{i:04}");
        let field = Field::sample(&mut rng, spec.background, w, h);
        let mut image = ImageBuf::from_fn(w, h, |x, y| field.at(x as f64 + 0.5, y as f64 + 0.5));
        let mut occupied = Mask::new(w, h, false);
        for k in 0..spec.instances_per_image {
            let len = rng.random_range(spec.min_chars..=spec.max_chars);
            let text: String = (0..len).map(|_| *alphabet.choose(&mut rng).expect("nonempty")).collect();
            let line = TextLine::new(&text).expect("alphabet glyphs");
            let mut placed = None;
            for _ in 0..500 {
                let glyph_h = rng.random_range(spec.glyph_height.0..=spec.glyph_height.1);
                let frame = QuadFrame::default();
                let scale = glyph_h / GLYPH_H as f64;
                debug_assert!((frame.height * scale * GLYPH_FILL - glyph_h).abs() < 1e-9);
                let theta = rng.random_range(-spec.rotation_deg..=spec.rotation_deg).to_radians();
                let center = Point2::new(rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
                let p = Placement { center, theta, scale, frame };
                let quad = p.quad();
                let (x0, y0, x1, y1) = quad.bounds();
                if x0 < 2.0 || y0 < 2.0 || x1 > w as f64 - 2.0 || y1 > h as f64 - 2.0 {
                    continue;
                }
                let area = quad.rasterize(w, h);
                if !dilate(&area, 2).and(&occupied).is_empty() {
                    continue;
                }
                placed = Some((p, quad, area));
                break;
            }
            let (p, quad, area) = placed.ok_or_else(|| {
                CliError::Config(format!("corpus: could not place instance {k} of {id}; image too crowded"))
            })?;
            let mut ink = None;
            if rng.random::<f64>() < spec.backdrop_prob {
                let color = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
                let opacity = rng.random_range(spec.backdrop_opacity.0..=spec.backdrop_opacity.1);
                let mut panel = image.clone();
                paint_backdrop(&mut panel, &p, color, opacity, &occupied);
                let (lo, hi) = color_range(&panel, &area);
                // A panel that leaves no room for a separated ink is dropped.
                ink = pick_ink(&mut rng, lo, hi, spec);
                if ink.is_some() {
                    image = panel;
                }
            }
            let ink = match ink {
                Some(c) => c,
                None => {
                    let (lo, hi) = color_range(&image, &area);
                    pick_ink(&mut rng, lo, hi, spec)
                        .ok_or_else(|| CliError::Config("corpus: no ink colour meets the separation".into()))?
                }
            };
            let gt = render_mask(&p, &line, &quad, w, h);
            for (x, y) in gt.foreground() {
                image.set(x, y, ink);
            }
            occupied = occupied.or(&area);
            corpus.instances.push(Instance {
                image_id: id.clone(),
                index: k,
                quad,
                transcription: text,
                illegible: false,
            });
            corpus.gt_masks.push(gt);
        }
        if spec.noise > 0.0 {
            let noise = rand_distr::Normal::new(0.0, spec.noise).expect("finite sigma");
            for px in image.pixels_mut() {
                for v in px.iter_mut() {
                    *v = (*v + rand_distr::Distribution::sample(&noise, &mut rng)).clamp(0.0, 1.0);
                }
            }
        }
        quantize(&mut image);
        corpus.images.push(CorpusImage { id, image });
    }
    Ok(corpus)
}

/// Writes images and annotations to `dir` and masks to `dir/gt`.
pub fn write_corpus(dir: &Path, corpus: &Corpus, spec: &CorpusSpec) -> Result<(), CliError> {
    let gt_dir = dir.join("gt");
    fs::create_dir_all(&gt_dir).map_err(|e| CliError::io(&gt_dir, e))?;
    for img in &corpus.images {
        write_rgb(&dir.join(format!("{}.png", img.id)), &img.image)?;
    }
    write_annotations(dir, &corpus.instances)?;
    for (inst, m) in corpus.instances.iter().zip(&corpus.gt_masks) {
        write_mask(&gt_dir.join(format!("{}.png", inst.key())), m)?;
    }
    let spec_path = dir.join("corpus.toml");
    let body = toml::to_string(spec).map_err(|e| CliError::Config(e.to_string()))?;
    fs::write(&spec_path, body).map_err(|e| CliError::io(&spec_path, e))
}
