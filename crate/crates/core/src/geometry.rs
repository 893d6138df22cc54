//! Quadrilaterals, homographies, perspective crops and rotated rectangles.
//!
//! Pixel `(i, j)` has its center at `(i + 0.5, j + 0.5)`; a `w × h` raster
//! spans the rectangle `[0, w] × [0, h]`.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::raster::{GrayBuf, ImageBuf, Mask};

const MIN_QUAD_AREA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }
}

/// Z component of `(b - a) × (c - a)`.
#[inline]
pub(crate) fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Shoelace signed area; positive for clockwise order in y-down image coordinates.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        acc += p.x * q.y - q.x * p.y;
    }
    acc / 2.0
}

fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point2, b: Point2, p: Point2, d: f64| {
        d == 0.0
            && p.x >= a.x.min(b.x)
            && p.x <= a.x.max(b.x)
            && p.y >= a.y.min(b.y)
            && p.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// A simple, positively oriented four-corner polygon.
///
/// Corners are stored clockwise (in y-down image coordinates) starting from
/// the first corner supplied by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrilateral {
    corners: [Point2; 4],
}

impl Quadrilateral {
    pub fn new(corners: [Point2; 4]) -> Result<Self> {
        if corners.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegenerateQuad("non-finite corner".into()));
        }
        let [a, b, c, d] = corners;
        if segments_intersect(a, b, c, d) || segments_intersect(b, c, d, a) {
            return Err(Error::DegenerateQuad("self-intersecting".into()));
        }
        let area = signed_area(&corners);
        if area.abs() <= MIN_QUAD_AREA {
            return Err(Error::DegenerateQuad(format!("area {area:e}")));
        }
        let corners = if area > 0.0 { corners } else { [a, d, c, b] };
        Ok(Self { corners })
    }

    pub fn from_xy(xy: [f64; 8]) -> Result<Self> {
        Self::new([
            Point2::new(xy[0], xy[1]),
            Point2::new(xy[2], xy[3]),
            Point2::new(xy[4], xy[5]),
            Point2::new(xy[6], xy[7]),
        ])
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new([
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn corners(&self) -> &[Point2; 4] {
        &self.corners
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.corners)
    }

    pub fn centroid(&self) -> Point2 {
        let (sx, sy) = self
            .corners
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Point2::new(sx / 4.0, sy / 4.0)
    }

    pub fn is_convex(&self) -> bool {
        (0..4).all(|i| {
            cross(
                self.corners[i],
                self.corners[(i + 1) % 4],
                self.corners[(i + 2) % 4],
            ) >= 0.0
        })
    }

    /// Inside or on the boundary (within `1e-9`).
    pub fn contains(&self, p: Point2) -> bool {
        polygon_contains(&self.corners, p, 1e-9)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Quadrilateral {
        Quadrilateral {
            corners: self.corners.map(|p| Point2::new(p.x + dx, p.y + dy)),
        }
    }

    /// Axis-aligned bounds `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        self.corners.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.x), b.min(p.y), c.max(p.x), d.max(p.y)),
        )
    }

    /// Rasterizes the quad: a pixel is set when its center is inside or on the boundary.
    pub fn rasterize(&self, width: usize, height: usize) -> Mask {
        let (x0, y0, x1, y1) = self.bounds();
        let mut mask = Mask::new(width, height, false);
        let xs = (x0 - 0.5).floor().max(0.0) as usize;
        let ys = (y0 - 0.5).floor().max(0.0) as usize;
        let xe = ((x1 - 0.5).ceil().max(-1.0) + 1.0).min(width as f64) as usize;
        let ye = ((y1 - 0.5).ceil().max(-1.0) + 1.0).min(height as f64) as usize;
        for y in ys..ye {
            for x in xs..xe {
                if self.contains(Point2::new(x as f64 + 0.5, y as f64 + 0.5)) {
                    mask.set(x, y, true);
                }
            }
        }
        mask
    }
}

/// Point-in-polygon (even-odd) with an on-boundary tolerance.
pub(crate) fn polygon_contains(poly: &[Point2], p: Point2, tol: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let len = a.dist(&b);
        if len == 0.0 {
            if a.dist(&p) <= tol {
                return true;
            }
            continue;
        }
        let t = p.sub(a).dot(b.sub(a)) / (len * len);
        if (-1e-12..=1.0 + 1e-12).contains(&t) && (cross(a, b, p) / len).abs() <= tol {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (pi, pj) = (poly[i], poly[j]);
        if (pi.y > p.y) != (pj.y > p.y) {
            let x_cross = (pj.x - pi.x) * (p.y - pi.y) / (pj.y - pi.y) + pi.x;
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// 3×3 projective transform acting on column vectors `(x, y, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        Self {
            m: [[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]],
        }
    }

    pub fn scaling(sx: f64, sy: f64) -> Self {
        Self {
            m: [[sx, 0.0, 0.0], [0.0, sy, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Validates invertibility and rescales so that `m[2][2] = 1` when nonzero.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        let h = Self { m }.normalized();
        if h.det().abs() <= 1e-12 {
            return Err(Error::SingularSystem);
        }
        Ok(h)
    }

    fn normalized(mut self) -> Self {
        let s = self.m[2][2];
        if s != 0.0 {
            for row in &mut self.m {
                for v in row.iter_mut() {
                    *v /= s;
                }
            }
        }
        self
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn inverse(&self) -> Result<Self> {
        let m = &self.m;
        let det = self.det();
        if det.abs() <= 1e-300 {
            return Err(Error::SingularSystem);
        }
        let inv = [
            [
                (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det,
                (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det,
                (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det,
            ],
            [
                (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det,
                (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det,
                (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det,
            ],
            [
                (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det,
                (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det,
                (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det,
            ],
        ];
        Ok(Self { m: inv }.normalized())
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Homography) -> Homography {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m: out }.normalized()
    }

    #[inline]
    fn apply_raw(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let m = &self.m;
        (
            m[0][0] * x + m[0][1] * y + m[0][2],
            m[1][0] * x + m[1][1] * y + m[1][2],
            m[2][0] * x + m[2][1] * y + m[2][2],
        )
    }
}

/// Applies `h` to `p` with projective division.
pub fn project_point(h: &Homography, p: Point2) -> Result<Point2> {
    let (x, y, w) = h.apply_raw(p.x, p.y);
    if w.abs() <= 1e-12 {
        return Err(Error::PointAtInfinity);
    }
    Ok(Point2::new(x / w, y / w))
}

/// Zero-mean, unit-RMS-distance similarity normalizing `pts`.
fn normalizing_transform(pts: &[Point2; 4]) -> Option<[[f64; 3]; 3]> {
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let rms = (pts
        .iter()
        .map(|p| (p.x - cx).powi(2) + (p.y - cy).powi(2))
        .sum::<f64>()
        / 4.0)
        .sqrt();
    if rms <= 1e-15 {
        return None;
    }
    let s = 1.0 / rms;
    Some([[s, 0.0, -s * cx], [0.0, s, -s * cy], [0.0, 0.0, 1.0]])
}

/// Homography mapping each corner of `src` onto the matching corner of `dst`.
///
/// Normalized DLT over the eight-unknown corner system (`h22` fixed to one in
/// normalized coordinates).
pub fn solve_homography(src: &Quadrilateral, dst: &Quadrilateral) -> Result<Homography> {
    for q in [src, dst] {
        if q.area().abs() <= MIN_QUAD_AREA {
            return Err(Error::DegenerateQuad("zero area".into()));
        }
    }
    let ts = normalizing_transform(src.corners())
        .ok_or_else(|| Error::DegenerateQuad("collinear corners".into()))?;
    let td = normalizing_transform(dst.corners())
        .ok_or_else(|| Error::DegenerateQuad("collinear corners".into()))?;
    let apply = |t: &[[f64; 3]; 3], p: &Point2| {
        Point2::new(t[0][0] * p.x + t[0][2], t[1][1] * p.y + t[1][2])
    };

    let mut a = SMatrix::<f64, 8, 8>::zeros();
    let mut b = SVector::<f64, 8>::zeros();
    for i in 0..4 {
        let s = apply(&ts, &src.corners()[i]);
        let d = apply(&td, &dst.corners()[i]);
        let r = 2 * i;
        a[(r, 0)] = s.x;
        a[(r, 1)] = s.y;
        a[(r, 2)] = 1.0;
        a[(r, 6)] = -s.x * d.x;
        a[(r, 7)] = -s.y * d.x;
        b[r] = d.x;
        a[(r + 1, 3)] = s.x;
        a[(r + 1, 4)] = s.y;
        a[(r + 1, 5)] = 1.0;
        a[(r + 1, 6)] = -s.x * d.y;
        a[(r + 1, 7)] = -s.y * d.y;
        b[r + 1] = d.y;
    }
    let lu = a.full_piv_lu();
    if lu.determinant().abs() <= 1e-12 {
        return Err(Error::SingularSystem);
    }
    let h = lu.solve(&b).ok_or(Error::SingularSystem)?;
    let hn = Homography {
        m: [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]],
    };
    let td_inv = Homography { m: td }.inverse()?;
    let out = td_inv.compose(&hn).compose(&Homography { m: ts });
    Homography::from_matrix(out.m)
}

/// Rectangle `[0, w] × [0, h]` as a quadrilateral (clockwise from the origin).
pub fn raster_quad(w: usize, h: usize) -> Quadrilateral {
    Quadrilateral::rect(0.0, 0.0, w as f64, h as f64).expect("positive raster size")
}

trait Texel: Copy {
    fn zero() -> Self;
    fn mul_add(self, w: f64, acc: Self) -> Self;
}

impl Texel for f64 {
    fn zero() -> Self {
        0.0
    }
    fn mul_add(self, w: f64, acc: Self) -> Self {
        acc + self * w
    }
}

impl Texel for [f64; 3] {
    fn zero() -> Self {
        [0.0; 3]
    }
    fn mul_add(self, w: f64, acc: Self) -> Self {
        [acc[0] + self[0] * w, acc[1] + self[1] * w, acc[2] + self[2] * w]
    }
}

fn warp_generic<T: Texel>(
    src: &[T],
    src_w: usize,
    src_h: usize,
    h: &Homography,
    out_w: usize,
    out_h: usize,
    fill: Option<T>,
) -> Vec<T> {
    let mut out = Vec::with_capacity(out_w * out_h);
    // The source covers [0, w] x [0, h]; inside that extent neighbors clamp to the edge.
    let fetch = |x: i64, y: i64| -> T {
        let x = x.clamp(0, src_w as i64 - 1) as usize;
        let y = y.clamp(0, src_h as i64 - 1) as usize;
        src[y * src_w + x]
    };
    for oy in 0..out_h {
        for ox in 0..out_w {
            let (x, y, w) = h.apply_raw(ox as f64 + 0.5, oy as f64 + 0.5);
            if w.abs() <= 1e-12 {
                out.push(fill.unwrap_or_else(|| fetch(0, 0)));
                continue;
            }
            // Back to index space, where pixel centers are integers.
            let mut sx = x / w - 0.5;
            let mut sy = y / w - 0.5;
            let inside = sx >= -0.5 && sy >= -0.5 && sx <= src_w as f64 - 0.5 && sy <= src_h as f64 - 0.5;
            if !inside {
                match fill {
                    Some(f) => {
                        out.push(f);
                        continue;
                    }
                    None if sx.is_finite() && sy.is_finite() => {
                        sx = sx.clamp(-0.5, src_w as f64 - 0.5);
                        sy = sy.clamp(-0.5, src_h as f64 - 0.5);
                    }
                    None => {
                        out.push(fetch(0, 0));
                        continue;
                    }
                }
            }
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let (x0, y0) = (x0 as i64, y0 as i64);
            let mut acc = T::zero();
            for (dx, dy, wt) in [
                (0, 0, (1.0 - fx) * (1.0 - fy)),
                (1, 0, fx * (1.0 - fy)),
                (0, 1, (1.0 - fx) * fy),
                (1, 1, fx * fy),
            ] {
                if wt != 0.0 {
                    acc = fetch(x0 + dx, y0 + dy).mul_add(wt, acc);
                }
            }
            out.push(acc);
        }
    }
    out
}

/// Bilinear perspective resampling: output pixel center `p` reads the source at `h(p)`.
///
/// Samples falling outside the source read as `fill`.
pub fn warp_crop(
    image: &ImageBuf,
    h: &Homography,
    out_w: usize,
    out_h: usize,
    fill: [f64; 3],
) -> Result<ImageBuf> {
    if out_w < 8 || out_h < 8 {
        return Err(Error::InvalidArgument(format!(
            "crop size {out_w}x{out_h} below 8x8"
        )));
    }
    let px = warp_generic(image.pixels(), image.width(), image.height(), h, out_w, out_h, Some(fill));
    ImageBuf::from_pixels(out_w, out_h, px)
}

/// [`warp_crop`] without the size floor.
pub fn warp_image(image: &ImageBuf, h: &Homography, out_w: usize, out_h: usize, fill: [f64; 3]) -> ImageBuf {
    let px = warp_generic(image.pixels(), image.width(), image.height(), h, out_w, out_h, Some(fill));
    ImageBuf::from_pixels(out_w, out_h, px).expect("sized by construction")
}

/// Like [`warp_image`], but samples outside the source repeat its edge pixels.
pub fn warp_image_clamped(image: &ImageBuf, h: &Homography, out_w: usize, out_h: usize) -> ImageBuf {
    let px = warp_generic(image.pixels(), image.width(), image.height(), h, out_w, out_h, None);
    ImageBuf::from_pixels(out_w, out_h, px).expect("sized by construction")
}

/// Single-channel variant of [`warp_crop`] without the size floor.
pub fn warp_gray(src: &GrayBuf, h: &Homography, out_w: usize, out_h: usize, fill: f64) -> GrayBuf {
    let v = warp_generic(src.values(), src.width(), src.height(), h, out_w, out_h, Some(fill));
    GrayBuf::from_values(out_w, out_h, v).expect("sized by construction")
}

/// Nearest-neighbor warp of a mask; used to carry masks between crop and image space.
pub fn warp_mask(src: &Mask, h: &Homography, out_w: usize, out_h: usize) -> Mask {
    Mask::from_fn(out_w, out_h, |ox, oy| {
        let (x, y, w) = h.apply_raw(ox as f64 + 0.5, oy as f64 + 0.5);
        if w.abs() <= 1e-12 {
            return false;
        }
        let (sx, sy) = ((x / w).floor(), (y / w).floor());
        if sx < 0.0 || sy < 0.0 || sx >= src.width() as f64 || sy >= src.height() as f64 {
            return false;
        }
        src.get(sx as usize, sy as usize)
    })
}

/// Rotated rectangle; may be degenerate (zero width and/or height).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedRect {
    /// Corners in order around the rectangle.
    pub corners: [Point2; 4],
}

impl RotatedRect {
    pub fn area(&self) -> f64 {
        signed_area(&self.corners).abs()
    }

    pub fn width(&self) -> f64 {
        self.corners[0].dist(&self.corners[1])
    }

    pub fn height(&self) -> f64 {
        self.corners[1].dist(&self.corners[2])
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        polygon_contains(&self.corners, p, tol)
    }

    pub fn to_quad(&self) -> Result<Quadrilateral> {
        Quadrilateral::new(self.corners)
    }
}

/// Convex hull (Andrew's monotone chain), counterclockwise in math orientation,
/// collinear points dropped.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Minimum-area enclosing rectangle of a point set via rotating calipers.
pub fn min_area_rect_points(points: &[Point2]) -> Result<RotatedRect> {
    let hull = convex_hull(points);
    match hull.len() {
        0 => return Err(Error::EmptyMask),
        1 => return Ok(RotatedRect { corners: [hull[0]; 4] }),
        2 => {
            let (a, b) = (hull[0], hull[1]);
            return Ok(RotatedRect {
                corners: [a, b, b, a],
            });
        }
        _ => {}
    }
    let n = hull.len();
    let at = |i: usize| hull[i % n];
    let proj = |i: usize, a: Point2, d: Point2| at(i).sub(a).dot(d);
    let mut best: Option<(f64, [Point2; 4])> = None;
    // Calipers: j = farthest along the edge, k = farthest from it, l = least along it.
    let (mut j, mut k, mut l) = (0usize, 0usize, 0usize);
    for i in 0..n {
        let a = at(i);
        let b = at(i + 1);
        let len = a.dist(&b);
        let e = Point2::new((b.x - a.x) / len, (b.y - a.y) / len);
        let nrm = Point2::new(-e.y, e.x);
        if i == 0 {
            let arg = |key: &dyn Fn(usize) -> f64| {
                (0..n).fold(0, |bi, c| if key(c) > key(bi) { c } else { bi })
            };
            j = arg(&|c| proj(c, a, e));
            k = arg(&|c| proj(c, a, nrm));
            l = arg(&|c| -proj(c, a, e));
        } else {
            while proj(j + 1, a, e) > proj(j, a, e) + 1e-12 {
                j += 1;
            }
            while proj(k + 1, a, nrm) > proj(k, a, nrm) + 1e-12 {
                k += 1;
            }
            while proj(l + 1, a, e) < proj(l, a, e) - 1e-12 {
                l += 1;
            }
        }
        let max_e = proj(j, a, e);
        let min_e = proj(l, a, e);
        let height = proj(k, a, nrm);
        let area = (max_e - min_e) * height;
        if best.as_ref().is_none_or(|(ba, _)| area < *ba) {
            let p = |s: f64, t: f64| {
                Point2::new(a.x + e.x * s + nrm.x * t, a.y + e.y * s + nrm.y * t)
            };
            best = Some((
                area,
                [p(min_e, 0.0), p(max_e, 0.0), p(max_e, height), p(min_e, height)],
            ));
        }
    }
    let (_, corners) = best.expect("hull has at least three edges");
    Ok(RotatedRect { corners })
}

/// Minimum-area rotated rectangle around the mask's foreground pixel centers.
pub fn min_area_rect(mask: &Mask) -> Result<RotatedRect> {
    let pts: Vec<Point2> = mask
        .foreground()
        .map(|(x, y)| Point2::new(x as f64 + 0.5, y as f64 + 0.5))
        .collect();
    if pts.is_empty() {
        return Err(Error::EmptyMask);
    }
    min_area_rect_points(&pts)
}

/// Matched prior box used to normalize regression targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub var_w: f64,
    pub var_h: f64,
}

impl PriorBox {
    pub fn new(center: (f64, f64), size: (f64, f64), variances: (f64, f64)) -> Result<Self> {
        if !(size.0 > 0.0 && size.1 > 0.0 && variances.0 > 0.0 && variances.1 > 0.0) {
            return Err(Error::InvalidArgument(
                "prior box sizes and variances must be positive".into(),
            ));
        }
        Ok(Self {
            cx: center.0,
            cy: center.1,
            w: size.0,
            h: size.1,
            var_w: variances.0,
            var_h: variances.1,
        })
    }
}

/// Center-offset, size-and-variance-scaled corner coordinates of a target quad.
pub fn encode_target_quad(corners: &[Point2; 4], prior: &PriorBox) -> [Point2; 4] {
    corners.map(|p| {
        Point2::new(
            (p.x - prior.cx) / (prior.w * prior.var_w),
            (p.y - prior.cy) / (prior.h * prior.var_h),
        )
    })
}
