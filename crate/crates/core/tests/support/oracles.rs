//! Independent reference implementations and the randomized checks that
//! compare them with the library. Each check panics on the first mismatch.
//! Shared by the oracle tests and the acceptance suite.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pseudolabel::eval::quad_iou;
use pseudolabel::geometry::{project_point, solve_homography, Point2, Quadrilateral};
use pseudolabel::graphcut::{grabcut_refine, max_flow, FlowGraph, Trimap, TrimapLabel};
use pseudolabel::pipeline::{binary_search_step, build_trimap, SearchState};
use pseudolabel::raster::{dilate, erode, otsu_threshold_slice, ImageBuf, Mask};
use pseudolabel::recognizer::edit_distance;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Otsu

/// Exhaustive scan over all 256 splits minimizing the within-class sum of
/// squares, compared as exact fractions. Lowest split wins ties.
fn otsu_oracle(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut hist = [0u128; 256];
    for &v in values {
        let k = (((v - lo) * (256.0 / (hi - lo))) as usize).min(255);
        hist[k] += 1;
    }
    let total_n: u128 = hist.iter().sum();
    let total_s: u128 = hist.iter().enumerate().map(|(k, &c)| k as u128 * c).sum();
    // Within-class sum of squares is Σk² − S0²/n0 − S1²/n1, so the best
    // split maximizes (S0²·n1 + S1²·n0) / (n0·n1).
    let mut best: Option<(usize, u128, u128)> = None;
    let (mut n0, mut s0) = (0u128, 0u128);
    for k in 0..256 {
        n0 += hist[k];
        s0 += k as u128 * hist[k];
        let (n1, s1) = (total_n - n0, total_s - s0);
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let num = s0 * s0 * n1 + s1 * s1 * n0;
        let den = n0 * n1;
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((k, num, den));
        }
    }
    let k = best.expect("two occupied bins").0;
    lo + (k as f64 + 0.5) * ((hi - lo) / 256.0)
}

fn random_buffer(r: &mut ChaCha8Rng) -> Vec<f64> {
    let n = r.random_range(2..=2000);
    match r.random_range(0..3) {
        0 => (0..n).map(|_| r.random_range(-5.0..5.0)).collect(),
        1 => {
            let levels: Vec<f64> = (0..r.random_range(2..=6)).map(|_| r.random::<f64>()).collect();
            (0..n).map(|_| levels[r.random_range(0..levels.len())]).collect()
        }
        _ => {
            let (a, b) = (r.random_range(0.0..0.4), r.random_range(0.6..1.0));
            (0..n)
                .map(|_| {
                    let c = if r.random_bool(0.3) { b } else { a };
                    c + r.random_range(-0.1..0.1)
                })
                .collect()
        }
    }
}

pub fn otsu_matches_exhaustive_scan() {
    let mut r = rng(1);
    let mut checked = 0;
    while checked < 1000 {
        let values = random_buffer(&mut r);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-12 {
            continue;
        }
        let got = otsu_threshold_slice(&values).unwrap();
        let want = otsu_oracle(&values);
        assert_eq!(got.to_bits(), want.to_bits(), "buffer {checked}: {got} vs {want}");
        checked += 1;
    }
}

// Max-flow

fn brute_force_min_cut(n: usize, edges: &[(usize, usize, f64)]) -> f64 {
    let (s, t) = (0, n - 1);
    let inner = n - 2;
    let mut best = f64::INFINITY;
    for subset in 0u32..(1 << inner) {
        let side = |v: usize| v == s || (v != t && subset >> (v - 1) & 1 == 1);
        let cut: f64 = edges.iter().filter(|&&(u, v, _)| side(u) && !side(v)).map(|e| e.2).sum();
        best = best.min(cut);
    }
    best
}

pub fn max_flow_matches_cut_enumeration() {
    let start = Instant::now();
    let mut r = rng(2);
    for case in 0..500 {
        let n = r.random_range(2..=10);
        let density = r.random_range(0.1..0.9);
        let mut g = FlowGraph::new(n, 0, n - 1).unwrap();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u != v && r.random_bool(density) {
                    let c = r.random_range(0..=9) as f64;
                    g.add_edge(u, v, c).unwrap();
                    edges.push((u, v, c));
                }
            }
        }
        let cut = max_flow(&g);
        let want = brute_force_min_cut(n, &edges);
        assert_eq!(cut.flow, want, "graph {case}");
        assert_eq!(g.cut_value(&cut.source_side), want, "graph {case} cut");
        assert!(cut.source_side[0] && !cut.source_side[n - 1]);
    }
    assert!(start.elapsed() < Duration::from_secs(30));
}

// Edit distance

fn edit_memo(a: &[char], b: &[char], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if i == a.len() {
        return b.len() - j;
    }
    if j == b.len() {
        return a.len() - i;
    }
    if let Some(&d) = memo.get(&(i, j)) {
        return d;
    }
    let d = if a[i] == b[j] {
        edit_memo(a, b, i + 1, j + 1, memo)
    } else {
        1 + edit_memo(a, b, i + 1, j, memo)
            .min(edit_memo(a, b, i, j + 1, memo))
            .min(edit_memo(a, b, i + 1, j + 1, memo))
    };
    memo.insert((i, j), d);
    d
}

pub fn edit_distance_matches_recursive_memo() {
    const ALPHABET: [char; 6] = ['a', 'b', 'c', 'A', '7', 'é'];
    let mut r = rng(3);
    for _ in 0..1000 {
        let word = |r: &mut ChaCha8Rng| -> String {
            let len = r.random_range(0..=12);
            (0..len).map(|_| ALPHABET[r.random_range(0..ALPHABET.len())]).collect()
        };
        let (a, b) = (word(&mut r), word(&mut r));
        let (ca, cb): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let want = edit_memo(&ca, &cb, 0, 0, &mut HashMap::new());
        assert_eq!(edit_distance(&a, &b), want, "{a:?} {b:?}");
    }
}

// Homography

fn random_quad(r: &mut ChaCha8Rng) -> Quadrilateral {
    let (x0, y0) = (r.random_range(-200.0..800.0), r.random_range(-200.0..800.0));
    let (w, h): (f64, f64) = (r.random_range(5.0..300.0), r.random_range(5.0..300.0));
    let j = 0.2 * w.min(h);
    let mut jit = |x: f64, y: f64| Point2::new(x + r.random_range(-j..j), y + r.random_range(-j..j));
    Quadrilateral::new([jit(x0, y0), jit(x0 + w, y0), jit(x0 + w, y0 + h), jit(x0, y0 + h)]).unwrap()
}

pub fn homography_round_trip() {
    let mut r = rng(4);
    for case in 0..1000 {
        let (src, dst) = (random_quad(&mut r), random_quad(&mut r));
        let h = solve_homography(&src, &dst).unwrap();
        let inv = h.inverse().unwrap();
        for (s, d) in src.corners().iter().zip(dst.corners()) {
            let p = project_point(&h, *s).unwrap();
            assert!(p.dist(d) < 1e-6, "case {case}: corner off by {}", p.dist(d));
        }
        // Image corners and centroid survive H then H⁻¹.
        let mut probes: Vec<Point2> = src.corners().to_vec();
        probes.push(src.centroid());
        for p in probes {
            let back = project_point(&inv, project_point(&h, p).unwrap()).unwrap();
            assert!(back.dist(&p) < 1e-9, "case {case}: round trip off by {}", back.dist(&p));
        }
    }
}

// Binary search

pub fn binary_search_brackets_monotone_threshold() {
    let mut r = rng(5);
    for case in 0..500 {
        let l0 = r.random_range(0.0..1.0);
        let u0 = l0 + r.random_range(0.5..4.0);
        let width = u0 - l0;
        let t_max = r.random_range(1..=12);
        let alpha_true = r.random_range(l0..=u0);
        let cost = |a: f64| if a <= alpha_true { 0.0 } else { 2.0 };

        let mut state = SearchState::new((l0 + u0) / 2.0, l0, u0);
        for _ in 0..t_max {
            let s = cost(state.alpha);
            state = binary_search_step(state, s, 1.0);
        }
        let got = state.best_alpha;
        let step = width / 2f64.powi(t_max as i32);

        // The first probe is one half-width from either bound.
        assert!(got - alpha_true <= width / 2.0 + 1e-12, "case {case}");
        if alpha_true >= l0 + step {
            // The lowest reachable probe is feasible, so some probe was.
            assert!(state.feasible_found, "case {case}");
            assert!(got <= alpha_true, "case {case}: {got} above {alpha_true}");
            assert!(alpha_true - got <= step + 1e-12, "case {case}: {got} vs {alpha_true}");
        } else {
            // Every probe exceeded the threshold; the first one is kept.
            assert!(!state.feasible_found);
            assert_eq!(got, (l0 + u0) / 2.0);
        }

        let grid = 10_000;
        let spacing = width / grid as f64;
        let brute = (0..=grid)
            .map(|i| l0 + i as f64 * spacing)
            .filter(|&a| cost(a) < 1.0)
            .fold(f64::NEG_INFINITY, f64::max);
        if state.feasible_found {
            assert!(got <= brute + spacing, "case {case}");
            assert!(brute - got <= step + spacing, "case {case}");
        }
    }
}

// Trimap

fn random_mask(r: &mut ChaCha8Rng) -> Mask {
    let (w, h) = (r.random_range(1..40), r.random_range(1..40));
    match r.random_range(0..3) {
        0 => {
            let p = r.random_range(0.0..1.0);
            Mask::from_fn(w, h, |_, _| r.random_bool(p))
        }
        1 => {
            let blobs: Vec<(f64, f64, f64)> = (0..r.random_range(1..4))
                .map(|_| (r.random_range(0.0..w as f64), r.random_range(0.0..h as f64), r.random_range(1.0..10.0)))
                .collect();
            Mask::from_fn(w, h, |x, y| {
                blobs
                    .iter()
                    .any(|&(cx, cy, rad)| (x as f64 - cx).hypot(y as f64 - cy) < rad)
            })
        }
        _ => Mask::new(w, h, r.random_bool(0.5)),
    }
}

pub fn trimap_identities() {
    let mut r = rng(6);
    for case in 0..200 {
        let binary = random_mask(&mut r);
        let radius = r.random_range(0..4);
        let fg = erode(&binary, radius);
        let bg = dilate(&binary, radius).not();
        let pfg = binary.and_not(&fg);
        let pbg = bg.not().and_not(&fg);

        assert!(fg.and(&pfg).is_empty(), "case {case}");
        assert_eq!(fg.or(&pfg), binary, "case {case}");
        assert_eq!(pbg, dilate(&binary, radius).and_not(&erode(&binary, radius)), "case {case}");

        let tri = build_trimap(&binary, radius);
        let of = |l| tri.mask_of(l);
        assert_eq!(of(TrimapLabel::Fg), fg);
        assert_eq!(of(TrimapLabel::ProbFg), pfg);
        assert_eq!(of(TrimapLabel::ProbBg), pbg.and_not(&pfg));
        assert_eq!(of(TrimapLabel::Bg), bg);
        let labels = [TrimapLabel::Fg, TrimapLabel::ProbFg, TrimapLabel::ProbBg, TrimapLabel::Bg];
        let covered = labels.iter().map(|&l| of(l).count()).sum::<usize>();
        let union = labels.iter().fold(Mask::new(binary.width(), binary.height(), false), |acc, &l| acc.or(&of(l)));
        assert_eq!(covered, binary.bits().len());
        assert_eq!(union.count(), binary.bits().len());
    }
}

// GrabCut energy

pub fn two_tone(r: &mut ChaCha8Rng) -> (ImageBuf, Trimap) {
    let (w, h) = (r.random_range(20..48), r.random_range(16..40));
    let fg: [f64; 3] = [r.random(), r.random(), r.random()];
    let bg: [f64; 3] = [r.random(), r.random(), r.random()];
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let (rx, ry) = (r.random_range(3.0..w as f64 / 3.0), r.random_range(3.0..h as f64 / 3.0));
    let noise = r.random_range(0.0..0.15);
    let inside = |x: usize, y: usize| ((x as f64 + 0.5 - cx) / rx).powi(2) + ((y as f64 + 0.5 - cy) / ry).powi(2) < 1.0;
    let image = ImageBuf::from_fn(w, h, |x, y| {
        let base = if inside(x, y) { fg } else { bg };
        base.map(|c| (c + r.random_range(-noise..=noise)).clamp(0.0, 1.0))
    });
    let margin = r.random_range(1..4) as f64;
    let mut tri = Trimap::new(w, h, TrimapLabel::Bg);
    for y in 0..h {
        for x in 0..w {
            let (dx, dy) = ((x as f64 + 0.5 - cx).abs(), (y as f64 + 0.5 - cy).abs());
            if dx < 1.5 && dy < 1.5 && r.random_bool(0.5) {
                tri.set(x, y, TrimapLabel::Fg);
            } else if dx < rx + margin && dy < ry + margin {
                let l = if r.random_bool(0.7) { TrimapLabel::ProbFg } else { TrimapLabel::ProbBg };
                tri.set(x, y, l);
            }
        }
    }
    (image, tri)
}

pub fn grabcut_energy_never_increases() {
    let mut r = rng(7);
    for case in 0..20 {
        let (image, tri) = two_tone(&mut r);
        let seed = r.random();
        let out = grabcut_refine(&image, &tri, 8, seed).unwrap();
        assert!(!out.energies.is_empty(), "case {case}");
        for (i, e) in out.energies.iter().enumerate() {
            let tol = 1e-9 * e.before.abs().max(1.0);
            assert!(e.after <= e.before + tol, "case {case} iter {i}: {} -> {}", e.before, e.after);
            if let Some(next) = out.energies.get(i + 1) {
                assert!(next.before <= e.after + tol, "case {case} refit {i}: {} -> {}", e.after, next.before);
            }
        }
        for (i, &l) in tri.labels().iter().enumerate() {
            match l {
                TrimapLabel::Fg => assert!(out.mask.bits()[i], "case {case}: hard fg {i}"),
                TrimapLabel::Bg => assert!(!out.mask.bits()[i], "case {case}: hard bg {i}"),
                _ => {}
            }
        }
    }
}

// Quad IoU

pub fn quad_iou_analytic_cases() {
    let a = Quadrilateral::rect(0.0, 0.0, 4.0, 2.0).unwrap();
    assert!((quad_iou(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    let far = a.translate(10.0, 0.0);
    assert!(quad_iou(&a, &far).unwrap().abs() < 1e-9);
    let half = a.translate(2.0, 0.0);
    assert!((quad_iou(&a, &half).unwrap() - 1.0 / 3.0).abs() < 1e-9);
    let touching = a.translate(4.0, 0.0);
    assert!(quad_iou(&a, &touching).unwrap().abs() < 1e-9);
}

/// Point-in-convex-polygon by consistent cross-product signs.
fn inside(q: &Quadrilateral, x: f64, y: f64) -> bool {
    let c = q.corners();
    let mut pos = false;
    let mut neg = false;
    for i in 0..4 {
        let (a, b) = (c[i], c[(i + 1) % 4]);
        let z = (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
        pos |= z > 0.0;
        neg |= z < 0.0;
    }
    !(pos && neg)
}

pub fn quad_iou_matches_monte_carlo() {
    let mut r = rng(9);
    for case in 0..100 {
        let a = random_quad(&mut r);
        // Overlapping partners keep the estimate informative.
        let (x0, y0, x1, y1) = a.bounds();
        let b = random_quad(&mut r);
        let (bx0, by0, _, _) = b.bounds();
        let b = b.translate(
            x0 - bx0 + r.random_range(-0.5..0.5) * (x1 - x0),
            y0 - by0 + r.random_range(-0.5..0.5) * (y1 - y0),
        );
        let (ux0, uy0, ux1, uy1) = {
            let (p, q) = (a.bounds(), b.bounds());
            (p.0.min(q.0), p.1.min(q.1), p.2.max(q.2), p.3.max(q.3))
        };
        let (mut both, mut either) = (0u64, 0u64);
        for _ in 0..1_000_000 {
            let (x, y) = (r.random_range(ux0..ux1), r.random_range(uy0..uy1));
            let (ia, ib) = (inside(&a, x, y), inside(&b, x, y));
            both += (ia && ib) as u64;
            either += (ia || ib) as u64;
        }
        let estimate = both as f64 / either as f64;
        let iou = quad_iou(&a, &b).unwrap();
        assert!((iou - estimate).abs() < 1e-2, "case {case}: {iou} vs {estimate}");
    }
}
