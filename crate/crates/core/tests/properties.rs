//! Invariants over generated inputs.

use proptest::prelude::*;

use pseudolabel::baselines::{naive_psl, pyramid_mask};
use pseudolabel::eval::{match_detections, pixel_metrics, quad_iou};
use pseudolabel::geometry::{Point2, Quadrilateral};
use pseudolabel::pipeline::{binary_search_step, SearchState};
use pseudolabel::raster::{dilate, erode, otsu_threshold_slice, GrayBuf, Mask};
use pseudolabel::vbp::softmax_weights;

fn mask() -> impl Strategy<Value = Mask> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<bool>(), w * h).prop_map(move |bits| Mask::from_bits(w, h, bits).unwrap())
    })
}

fn mask_pair() -> impl Strategy<Value = (Mask, Mask)> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        (
            prop::collection::vec(any::<bool>(), w * h),
            prop::collection::vec(any::<bool>(), w * h),
        )
            .prop_map(move |(a, b)| (Mask::from_bits(w, h, a).unwrap(), Mask::from_bits(w, h, b).unwrap()))
    })
}

/// Jittered axis-aligned box; the jitter is small enough to stay convex.
fn quad() -> impl Strategy<Value = Quadrilateral> {
    (
        -50.0..50.0f64,
        -50.0..50.0f64,
        4.0..60.0f64,
        4.0..60.0f64,
        prop::array::uniform8(-0.2..0.2f64),
    )
        .prop_map(|(x0, y0, w, h, j)| {
            let s = w.min(h);
            Quadrilateral::new([
                Point2::new(x0 + j[0] * s, y0 + j[1] * s),
                Point2::new(x0 + w + j[2] * s, y0 + j[3] * s),
                Point2::new(x0 + w + j[4] * s, y0 + h + j[5] * s),
                Point2::new(x0 + j[6] * s, y0 + h + j[7] * s),
            ])
            .unwrap()
        })
}

proptest! {
    #[test]
    fn morphology_sandwiches_the_mask(m in mask(), r in 0usize..4) {
        let (e, d) = (erode(&m, r), dilate(&m, r));
        prop_assert!(e.and_not(&m).is_empty());
        prop_assert!(m.and_not(&d).is_empty());
        prop_assert_eq!(erode(&m, 0), m.clone());
        prop_assert_eq!(dilate(&m, 0), m.clone());
        // Away from the border, eroding the foreground is dilating the background.
        let dual = dilate(&m.not(), r);
        for y in r..m.height().saturating_sub(r) {
            for x in r..m.width().saturating_sub(r) {
                prop_assert_eq!(e.get(x, y), !dual.get(x, y));
            }
        }
    }

    #[test]
    fn otsu_commutes_with_positive_affine_maps(
        values in prop::collection::vec(0u8..=255, 2..300),
        scale in prop::sample::select(vec![0.5f64, 2.0, 4.0]),
        shift in prop::sample::select(vec![-8.0f64, 0.0, 16.0]),
    ) {
        let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        prop_assume!(values.iter().min() != values.iter().max());
        let t = otsu_threshold_slice(&v).unwrap();
        let mapped: Vec<f64> = v.iter().map(|x| x * scale + shift).collect();
        let tm = otsu_threshold_slice(&mapped).unwrap();
        let tol = 1e-9 * (1.0 + tm.abs());
        prop_assert!((tm - (t * scale + shift)).abs() < tol, "{} vs {}", tm, t * scale + shift);
    }

    #[test]
    fn otsu_splits_inside_the_range(values in prop::collection::vec(-1e3..1e3f64, 2..300)) {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi - lo > 1e-6);
        let t = otsu_threshold_slice(&values).unwrap();
        prop_assert!(lo < t && t < hi);
        let g = GrayBuf::from_values(values.len(), 1, values.clone()).unwrap();
        let m = g.threshold(t);
        prop_assert!(m.count() > 0 && m.count() < values.len());
    }

    #[test]
    fn softmax_is_a_distribution(costs in prop::collection::vec(0.0..20.0f64, 1..12)) {
        let w = softmax_weights(&costs);
        prop_assert_eq!(w.len(), costs.len());
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&x| x > 0.0));
        // Cheaper entries never weigh less.
        for i in 0..costs.len() {
            for j in 0..costs.len() {
                if costs[i] < costs[j] {
                    prop_assert!(w[i] >= w[j]);
                }
            }
        }
        let shifted: Vec<f64> = costs.iter().map(|c| c + 3.0).collect();
        for (a, b) in w.iter().zip(softmax_weights(&shifted)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pixel_counts_add_up((p, g) in mask_pair()) {
        let m = pixel_metrics(&p, &g);
        prop_assert_eq!(m.tp + m.fp, p.count());
        prop_assert_eq!(m.tp + m.fn_, g.count());
        prop_assert_eq!(m.tp, p.and(&g).count());
        prop_assert!((0.0..=1.0).contains(&m.precision));
        prop_assert!((0.0..=1.0).contains(&m.recall));
        prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
        prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12 || m.tp == 0);
    }

    #[test]
    fn iou_is_symmetric_and_bounded(a in quad(), b in quad()) {
        let ab = quad_iou(&a, &b).unwrap();
        let ba = quad_iou(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((quad_iou(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matching_ignores_prediction_order(
        gts in prop::collection::vec(quad(), 0..5),
        preds in prop::collection::vec(quad(), 0..5),
        dc_bits in prop::collection::vec(any::<bool>(), 5),
        rot in 0usize..5,
    ) {
        let dc: Vec<bool> = dc_bits[..gts.len()].to_vec();
        let a = match_detections(&preds, &gts, &dc, 0.5).unwrap();
        let mut rotated = preds.clone();
        if !rotated.is_empty() {
            let k = rot % rotated.len();
            rotated.rotate_left(k);
        }
        let b = match_detections(&rotated, &gts, &dc, 0.5).unwrap();
        prop_assert_eq!((a.tp, a.fp, a.fn_), (b.tp, b.fp, b.fn_));
        prop_assert_eq!(a.ignored_preds, b.ignored_preds);
        prop_assert!(a.tp <= preds.len().min(gts.len()));
    }

    #[test]
    fn raising_the_threshold_shrinks_the_mask(
        values in prop::collection::vec(0.0..1.0f64, 1..200),
        t1 in 0.0..1.0f64,
        dt in 0.0..0.5f64,
    ) {
        let g = GrayBuf::from_values(values.len(), 1, values).unwrap();
        let (lo, hi) = (g.threshold(t1), g.threshold(t1 + dt));
        prop_assert!(hi.and_not(&lo).is_empty());
    }

    #[test]
    fn search_stays_inside_its_bracket(
        l0 in 0.0..1.0f64,
        width in 0.1..4.0f64,
        costs in prop::collection::vec(0.0..3.0f64, 1..10),
    ) {
        let u0 = l0 + width;
        let mut s = SearchState::new(1.0, l0, u0);
        for &c in &costs {
            let next = binary_search_step(s, c, 1.0);
            prop_assert!(l0 <= next.lower && next.lower <= next.alpha && next.alpha <= next.upper && next.upper <= u0);
            prop_assert!(next.upper - next.lower <= s.upper - s.lower);
            prop_assert!(l0 <= next.best_alpha && next.best_alpha <= u0);
            if next.feasible_found {
                prop_assert!(next.best_cost < 1.0);
            }
            s = next;
        }
        prop_assert_eq!(s.t, costs.len());
    }

    #[test]
    fn pyramid_lies_inside_naive(q in quad()) {
        let q = q.translate(60.0, 60.0);
        let naive = naive_psl(&q, 140, 140);
        let pyr = pyramid_mask(&q, 140, 140).unwrap();
        prop_assert!(pyr.and_not(&naive).is_empty());
    }
}
