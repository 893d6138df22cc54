//! Pixel precision/recall, quadrilateral IoU, detection matching and
//! proposal refinement by edge growth.

use crate::error::{Error, Result};
use crate::geometry::{
    cross, min_area_rect_points, project_point, raster_quad, signed_area, solve_homography, warp_crop, Point2,
    Quadrilateral, RotatedRect,
};
use crate::raster::{ImageBuf, Mask};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl PixelMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
        }
    }
}

/// Foreground-class counts of `pred` against `gt`; `pred` is resized to the
/// ground-truth resolution (nearest) when the sizes differ.
pub fn pixel_metrics(pred: &Mask, gt: &Mask) -> PixelMetrics {
    let resized;
    let pred = if pred.dims() != gt.dims() {
        resized = pred.resize_nearest(gt.width(), gt.height());
        &resized
    } else {
        pred
    };
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    PixelMetrics::from_counts(tp, fp, fn_)
}

/// Clips `subject` against the convex, positively oriented `clip`.
fn clip_convex(subject: &[Point2], clip: &[Point2]) -> Vec<Point2> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (dp, dq) = (cross(a, b, p), cross(a, b, q));
            if dp >= 0.0 {
                out.push(p);
            }
            if (dp >= 0.0) != (dq >= 0.0) {
                let t = dp / (dp - dq);
                out.push(Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
            }
        }
    }
    out
}

/// Area of `a ∩ b` over area of `a ∪ b` for convex quads.
pub fn quad_iou(a: &Quadrilateral, b: &Quadrilateral) -> Result<f64> {
    if !a.is_convex() || !b.is_convex() {
        return Err(Error::NonConvex);
    }
    let inter = clip_convex(a.corners(), b.corners());
    let inter_area = if inter.len() >= 3 {
        signed_area(&inter).abs()
    } else {
        0.0
    };
    let union = a.area() + b.area() - inter_area;
    if !(union > 0.0) {
        return Err(Error::DegenerateQuad("zero union area".into()));
    }
    Ok((inter_area / union).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionMatch {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub matches: Vec<DetectionMatch>,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Predictions dropped because their best overlap is a don't-care region.
    pub ignored_preds: usize,
    pub dont_care_gts: usize,
}

/// Greedy one-to-one matching by descending IoU (ties: lowest prediction
/// index, then lowest ground-truth index). A pair matches when its IoU
/// exceeds `thr`.
pub fn match_detections(
    preds: &[Quadrilateral],
    gts: &[Quadrilateral],
    dont_care: &[bool],
    thr: f64,
) -> Result<DetectionReport> {
    if dont_care.len() != gts.len() {
        return Err(Error::InvalidArgument(format!(
            "{} don't-care flags for {} ground truths",
            dont_care.len(),
            gts.len()
        )));
    }
    let iou: Vec<Vec<f64>> = preds
        .iter()
        .map(|p| gts.iter().map(|g| quad_iou(p, g)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let ignored: Vec<bool> = iou
        .iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (g, &v) in row.iter().enumerate() {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((g, v));
                }
            }
            best.is_some_and(|(g, v)| dont_care[g] && v > thr)
        })
        .collect();
    let mut pairs: Vec<DetectionMatch> = Vec::new();
    for (p, row) in iou.iter().enumerate() {
        if ignored[p] {
            continue;
        }
        for (g, &v) in row.iter().enumerate() {
            if !dont_care[g] && v > thr {
                pairs.push(DetectionMatch { pred: p, gt: g, iou: v });
            }
        }
    }
    pairs.sort_by(|a, b| b.iou.total_cmp(&a.iou).then(a.pred.cmp(&b.pred)).then(a.gt.cmp(&b.gt)));
    let mut pred_used = vec![false; preds.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut matches = Vec::new();
    for m in pairs {
        if !pred_used[m.pred] && !gt_used[m.gt] {
            pred_used[m.pred] = true;
            gt_used[m.gt] = true;
            matches.push(m);
        }
    }
    let ignored_preds = ignored.iter().filter(|&&b| b).count();
    let dont_care_gts = dont_care.iter().filter(|&&b| b).count();
    let counted_preds = preds.len() - ignored_preds;
    let counted_gts = gts.len() - dont_care_gts;
    let tp = matches.len();
    let m = PixelMetrics::from_counts(tp, counted_preds - tp, counted_gts - tp);
    Ok(DetectionReport {
        matches,
        tp,
        fp: m.fp,
        fn_: m.fn_,
        precision: m.precision,
        recall: m.recall,
        f1: m.f1,
        ignored_preds,
        dont_care_gts,
    })
}

/// Proposal refinement defaults.
pub const PRP_MIN_EDGE_PIXELS: usize = 3;
pub const PRP_MAX_ITERS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct PrpOutcome {
    pub quad: Quadrilateral,
    /// Rectangle proposals, one per segmentation.
    pub proposals: Vec<Quadrilateral>,
    pub grown: usize,
}

fn crop_dims(q: &Quadrilateral) -> (usize, usize) {
    let c = q.corners();
    let w = c[0].dist(&c[1]).round().max(8.0) as usize;
    let h = c[1].dist(&c[2]).round().max(8.0) as usize;
    (w, h)
}

fn segment_rect<F>(image: &ImageBuf, rect: &Quadrilateral, segment: &F) -> Result<(Mask, crate::geometry::Homography)>
where
    F: Fn(&ImageBuf) -> Mask,
{
    let (w, h) = crop_dims(rect);
    let to_image = solve_homography(&raster_quad(w, h), rect)?;
    let crop = warp_crop(image, &to_image, w, h, [0.5; 3])?;
    let mask = segment(&crop);
    if mask.dims() != (w, h) {
        return Err(Error::ShapeMismatch {
            expected: (w, h),
            got: mask.dims(),
        });
    }
    Ok((mask, to_image))
}

/// Counts of foreground pixels on the top, right, bottom and left crop edges.
fn edge_counts(mask: &Mask) -> [usize; 4] {
    let (w, h) = mask.dims();
    let top = (0..w).filter(|&x| mask.get(x, 0)).count();
    let bottom = (0..w).filter(|&x| mask.get(x, h - 1)).count();
    let left = (0..h).filter(|&y| mask.get(0, y)).count();
    let right = (0..h).filter(|&y| mask.get(w - 1, y)).count();
    [top, right, bottom, left]
}

fn unit(v: Point2) -> Point2 {
    let n = (v.x * v.x + v.y * v.y).sqrt();
    Point2::new(v.x / n, v.y / n)
}

/// Grows the rectangle `c` by one pixel on each flagged edge (top, right,
/// bottom, left in crop orientation).
fn grow(c: &[Point2; 4], flags: [bool; 4]) -> Result<Quadrilateral> {
    let mut c = *c;
    let diff = |a: Point2, b: Point2| Point2::new(a.x - b.x, a.y - b.y);
    // Edge k joins corners k and k+1; its outward normal points away from the opposite edge.
    let normals = [
        unit(diff(c[0], c[3])),
        unit(diff(c[1], c[0])),
        unit(diff(c[3], c[0])),
        unit(diff(c[0], c[1])),
    ];
    for k in 0..4 {
        if flags[k] {
            let n = normals[k];
            for idx in [k, (k + 1) % 4] {
                c[idx] = Point2::new(c[idx].x + n.x, c[idx].y + n.y);
            }
        }
    }
    Quadrilateral::new(c)
}

fn mask_rect(mask: &Mask, to_image: &crate::geometry::Homography) -> Result<Option<Quadrilateral>> {
    let mut centers = Vec::with_capacity(mask.count());
    for (x, y) in mask.foreground() {
        centers.push(project_point(to_image, Point2::new(x as f64 + 0.5, y as f64 + 0.5))?);
    }
    if centers.is_empty() {
        return Ok(None);
    }
    let rect = min_area_rect_points(&centers)?;
    if let Ok(q) = rect.to_quad() {
        return Ok(Some(q));
    }
    // Thin masks: enclose pixel footprints instead of centers.
    let mut corners = Vec::with_capacity(4 * centers.len());
    for (x, y) in mask.foreground() {
        for (dx, dy) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)] {
            corners.push(project_point(to_image, Point2::new(x as f64 + dx, y as f64 + dy))?);
        }
    }
    Ok(min_area_rect_points(&corners)?.to_quad().ok())
}

fn rect_quad(rect: &RotatedRect, fallback: &Quadrilateral) -> Quadrilateral {
    rect.to_quad().unwrap_or(*fallback)
}

/// Grows a detection proposal while the segmentation touches its edges,
/// then returns the minimum rotated rectangle of the final segmentation.
///
/// `segment` maps an axis-aligned crop of the current rectangle to a mask of
/// the same size. An empty first segmentation returns the proposal.
pub fn prp_refine<F>(image: &ImageBuf, proposal: &Quadrilateral, segment: F, n: usize, max_iters: usize) -> Result<PrpOutcome>
where
    F: Fn(&ImageBuf) -> Mask,
{
    if n == 0 {
        return Err(Error::InvalidArgument("edge pixel threshold must be at least 1".into()));
    }
    let rect = rect_quad(&min_area_rect_points(proposal.corners())?, proposal);
    let (mut mask, mut to_image) = segment_rect(image, &rect, &segment)?;
    let mut proposals = vec![rect];
    if mask.is_empty() {
        return Ok(PrpOutcome {
            quad: *proposal,
            proposals,
            grown: 0,
        });
    }
    let mut current = rect;
    let mut grown = 0;
    for _ in 0..max_iters {
        let flags = edge_counts(&mask).map(|c| c >= n);
        if !flags.iter().any(|&f| f) {
            break;
        }
        let next = grow(current.corners(), flags)?;
        let (m, t) = segment_rect(image, &next, &segment)?;
        current = next;
        proposals.push(next);
        grown += 1;
        if m.is_empty() {
            break;
        }
        mask = m;
        to_image = t;
    }
    let quad = mask_rect(&mask, &to_image)?.unwrap_or(*proposal);
    Ok(PrpOutcome { quad, proposals, grown })
}
