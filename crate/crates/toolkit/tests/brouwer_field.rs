use ppad_toolkit::brouwer::*;
use ppad_toolkit::codes::LinearCode;
use ppad_toolkit::eol::{generate_path_instance, EolInstance, EolSolution};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

fn embed(inst: &EolInstance) -> PathEmbedding {
    let code = LinearCode::preset(inst.n()).unwrap();
    PathEmbedding::embed(inst, &code, BrouwerParams::defaults(16)).unwrap()
}

fn path(n: usize, seed: u64) -> PathEmbedding {
    embed(&generate_path_instance(n, seed).unwrap())
}

/// Exact distance between two segments, by checking the interior
/// critical point and all four clamped edge problems.
fn segment_distance(p0: &[f64], p1: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
    let at = |a: f64, b: f64| -> f64 {
        let p: Vec<f64> = p0.iter().zip(p1).map(|(x, y)| x + a * (y - x)).collect();
        let q: Vec<f64> = q0.iter().zip(q1).map(|(x, y)| x + b * (y - x)).collect();
        dist(&p, &q)
    };
    let u: Vec<f64> = p0.iter().zip(p1).map(|(x, y)| y - x).collect();
    let v: Vec<f64> = q0.iter().zip(q1).map(|(x, y)| y - x).collect();
    let w: Vec<f64> = p0.iter().zip(q0).map(|(x, y)| x - y).collect();
    let (uu, uv, vv, uw, vw) = (dot(&u, &u), dot(&u, &v), dot(&v, &v), dot(&u, &w), dot(&v, &w));
    let mut best = f64::INFINITY;
    let det = uu * vv - uv * uv;
    if det > 1e-12 {
        let a = (uv * vw - vv * uw) / det;
        let b = (uu * vw - uv * uw) / det;
        if (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) {
            best = best.min(at(a, b));
        }
    }
    for b in [0.0, 1.0] {
        let a = ((uv * b - uw) / uu).clamp(0.0, 1.0);
        best = best.min(at(a, b));
    }
    for a in [0.0, 1.0] {
        let b = ((uv * a + vw) / vv).clamp(0.0, 1.0);
        best = best.min(at(a, b));
    }
    best
}

#[test]
fn segment_distance_oracle_agrees_with_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let pts: Vec<Vec<f64>> = (0..4).map(|_| (0..4).map(|_| rng.gen_range(-1.0..2.0)).collect()).collect();
        let exact = segment_distance(&pts[0], &pts[1], &pts[2], &pts[3]);
        let mut grid = f64::INFINITY;
        for i in 0..=200 {
            for j in 0..=200 {
                let (a, b) = (i as f64 / 200.0, j as f64 / 200.0);
                let p: Vec<f64> = (0..4).map(|k| pts[0][k] + a * (pts[1][k] - pts[0][k])).collect();
                let q: Vec<f64> = (0..4).map(|k| pts[2][k] + b * (pts[3][k] - pts[2][k])).collect();
                grid = grid.min(dist(&p, &q));
            }
        }
        assert!(exact <= grid + 1e-12 && grid - exact < 0.02, "{exact} {grid}");
    }
}

#[test]
fn chains_are_axis_block_paths_with_separated_segments() {
    let emb = (0..50).map(|s| path(3, s)).find(|e| e.edges().unwrap().len() >= 3).unwrap();
    let m = emb.params().m;
    let segs = emb.segments().unwrap();
    assert_eq!(segs.len(), 1 + 4 * emb.edges().unwrap().len());
    for seg in &segs {
        let (s, t) = (emb.point(seg.s), emb.point(seg.t));
        let changed: BTreeSet<usize> = (0..4 * m).filter(|&i| s[i] != t[i]).map(|i| i / m).collect();
        assert_eq!(changed.len(), 1, "{seg:?}");
    }
    for w in segs.windows(2).filter(|w| !w[0].open_end) {
        assert_eq!(w[0].t, w[1].s);
        let (a, b, c) = (emb.point(w[0].s), emb.point(w[0].t), emb.point(w[1].t));
        let d0: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
        let d1: Vec<f64> = b.iter().zip(&c).map(|(x, y)| y - x).collect();
        assert!(dot(&d0, &d1) >= 0.0);
    }
    let eta = emb.params().eta;
    for i in 0..segs.len() {
        for j in i + 2..segs.len() {
            let d = segment_distance(
                &emb.point(segs[i].s),
                &emb.point(segs[i].t),
                &emb.point(segs[j].s),
                &emb.point(segs[j].t),
            );
            assert!(d >= eta, "segments {i} and {j} at distance {d}");
        }
    }
}

#[test]
fn endpoints_match_solutions() {
    for (n, seed) in [(2, 0), (3, 1), (4, 5)] {
        let emb = path(n, seed);
        let want: BTreeSet<EolSolution> = emb.instance().enumerate_solutions().unwrap().into_iter().collect();
        let got: BTreeSet<EolSolution> = emb.endpoints().unwrap().into_iter().map(|e| e.solution).collect();
        assert_eq!(got, want);
    }
    // Path 0 -> 1 -> 2, line 4 -> 5 -> 6 and cycle 3 <-> 7.
    let succ = BTreeMap::from([(0, 1), (1, 2), (4, 5), (5, 6), (3, 7), (7, 3)]);
    let pred = BTreeMap::from([(1, 0), (2, 1), (5, 4), (6, 5), (7, 3), (3, 7)]);
    let inst = EolInstance::from_maps(3, &succ, &pred).unwrap();
    let emb = embed(&inst);
    let ends = emb.endpoints().unwrap();
    assert_eq!(ends.len(), 3);
    let want: BTreeSet<EolSolution> = inst.enumerate_solutions().unwrap().into_iter().collect();
    assert_eq!(ends.into_iter().map(|e| e.solution).collect::<BTreeSet<_>>(), want);
    // Broken start: the down segment ends at 0.
    let inst = EolInstance::from_maps(1, &BTreeMap::from([(0, 1)]), &BTreeMap::new()).unwrap();
    let ends = embed(&inst).endpoints().unwrap();
    assert_eq!(ends.len(), 1);
    assert_eq!(ends[0].key, VertexKey::Grid { a: 0, b: 0, c: false });
}

#[test]
fn every_point_near_a_segment_recovers_it() {
    let emb = path(3, 2);
    let h = emb.params().h;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seg in emb.segments().unwrap() {
        let (s, t) = (emb.point(seg.s), emb.point(seg.t));
        for _ in 0..40 {
            let c: Vec<f64> = s.iter().zip(&t).map(|(a, b)| a + rng.gen_range(0.0..1.0) * (b - a)).collect();
            let x = emb.offset_point(&c, rng.gen_range(0.0..3.0 * h), &mut rng);
            let (segs, _) = emb.local_structure(&x);
            assert!(segs.iter().any(|l| l.s == seg.s && l.t == seg.t), "{seg:?}");
        }
    }
}

#[test]
fn containment_on_stratified_samples() {
    let emb = path(2, 0);
    for (_, x) in emb.stratified_samples(20_000, 7).unwrap() {
        let y = emb.f(&x);
        assert!(y.iter().all(|v| (LO..=HI).contains(v)));
    }
}

fn probe_pairs(emb: &PathEmbedding, seed: u64, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = emb.stratified_samples(count, seed).unwrap();
    samples
        .iter()
        .enumerate()
        .map(|(k, (_, x))| {
            let y = if k % 4 == 0 {
                samples[rng.gen_range(0..samples.len())].1.clone()
            } else {
                emb.offset_point(x, 10f64.powf(rng.gen_range(-7.0..-1.5)), &mut rng)
            };
            (x.clone(), y)
        })
        .filter(|(x, y)| dist(x, y) > 0.0)
        .collect()
}

#[test]
fn lipschitz_ratios_stay_below_documented_bounds() {
    let emb = path(2, 0);
    let p = *emb.params();
    let (mut worst_hat, mut worst) = (0.0f64, 0.0f64);
    for (x, y) in probe_pairs(&emb, 11, 20_000) {
        let d = dist(&x, &y);
        worst_hat = worst_hat.max(dist(&emb.displacement_hat(&x), &emb.displacement_hat(&y)) / d);
        worst = worst.max(dist(&emb.displacement(&x), &emb.displacement(&y)) / d);
    }
    assert!(worst_hat <= p.lipschitz_hat(), "{worst_hat} > {}", p.lipschitz_hat());
    assert!(worst <= p.lipschitz(), "{worst} > {}", p.lipschitz());
}

#[test]
fn truncation_is_what_breaks_the_small_bound_near_faces() {
    let emb = path(2, 0);
    let m = emb.params().m;
    let mut x = vec![0.0; 4 * m];
    x[4 * m - 1] = HI - 0.5e-6;
    let mut y = x.clone();
    y[4 * m - 1] = HI - 0.25e-6;
    let ratio = dist(&emb.displacement(&x), &emb.displacement(&y)) / dist(&x, &y);
    assert!((ratio - 1.0).abs() < 1e-6);
    assert!(dist(&emb.displacement_hat(&x), &emb.displacement_hat(&y)) == 0.0);
}

#[test]
fn displacement_floor_away_from_ends() {
    for seed in [0, 3] {
        let emb = path(2, seed);
        let p = *emb.params();
        let mut worst = f64::INFINITY;
        for (_, x) in emb.stratified_samples(20_000, seed).unwrap() {
            if emb.distance_to_ends(&x).unwrap() < 2.0 * p.sqrt_h() {
                continue;
            }
            worst = worst.min(emb.residual(&x) / p.delta);
        }
        assert!(worst >= DISPLACEMENT_FLOOR, "seed {seed}: {worst}");
    }
}

#[test]
fn path_end_carries_a_zero_just_past_it() {
    let emb = path(2, 1);
    let h = emb.params().h;
    for e in emb.endpoints().unwrap() {
        assert!(e.is_end);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let x: Vec<f64> = e.point.iter().zip(&e.direction).map(|(p, d)| p + r * h * d).collect();
        assert!(emb.residual(&x) < 1e-12 * emb.params().delta + 1e-20, "{}", emb.residual(&x));
        assert_eq!(emb.locate_solution(&x), Some(e.solution.clone()));
    }
}

#[test]
fn broken_path_start_carries_a_zero_before_it() {
    let succ = BTreeMap::from([(0, 1), (2, 3)]);
    let pred = BTreeMap::from([(1, 0), (3, 2)]);
    let emb = embed(&EolInstance::from_maps(2, &succ, &pred).unwrap());
    let h = emb.params().h;
    let start = emb.endpoints().unwrap().into_iter().find(|e| !e.is_end).unwrap();
    let r = (5f64.sqrt() + 1.0) / 2.0;
    let x: Vec<f64> = start.point.iter().zip(&start.direction).map(|(p, d)| p - r * h * d).collect();
    assert!(emb.residual(&x) < 1e-18);
    assert_eq!(emb.locate_solution(&x), Some(start.solution));
}

fn assert_band(emb: &PathEmbedding, x: &[f64], y: &[f64], tags: (&str, &str)) {
    assert_eq!((emb.classify(x).tag(), emb.classify(y).tag()), tags);
    let gap = dist(&emb.displacement_hat(x), &emb.displacement_hat(y));
    assert!(gap <= emb.params().lipschitz_hat() * dist(x, y), "{tags:?}: {gap}");
}

#[test]
fn interface_bands_agree() {
    let emb = path(2, 0);
    let (h, sh, m) = (emb.params().h, emb.params().sqrt_h(), emb.params().m);
    let eps = 1e-9;
    let (u, v) = emb.edges().unwrap()[0];
    let chain = PathEmbedding::edge_chain(u, v);
    let (s, y, t) = (emb.point(chain[1]), emb.point(chain[2]), emb.point(chain[3]));
    // Offsets inside the special block are orthogonal to every grid segment;
    // raising all of it by `2r` moves a point by `r`.
    let lift = |p: &[f64], r: f64| -> Vec<f64> {
        let mut q = p.to_vec();
        for v in &mut q[3 * m..] {
            *v += 2.0 * r;
        }
        q
    };
    let mid: Vec<f64> = y.iter().zip(&t).map(|(a, b)| (a + b) / 2.0).collect();
    assert_band(&emb, &lift(&mid, 3.0 * h - eps), &lift(&mid, 3.0 * h + eps), ("line", "far"));
    // Along the segment, where the corner takes over.
    let l1 = dist(&s, &y);
    let at = |along: f64| -> Vec<f64> {
        let p: Vec<f64> = s.iter().zip(&y).map(|(a, b)| a + along / l1 * (b - a)).collect();
        lift(&p, h)
    };
    assert_band(&emb, &at(l1 - sh - eps), &at(l1 - sh + eps), ("line", "vertex"));
    // Picture boundary on the down line.
    let down = |theta: f64| -> Vec<f64> { (0..4 * m).map(|i| if i >= 3 * m { theta } else { 0.0 }).collect() };
    let off = |theta: f64| -> Vec<f64> {
        let mut x = down(theta);
        x[0] = 2.5 * h * 8.0;
        x
    };
    for make in [&down as &dyn Fn(f64) -> Vec<f64>, &off] {
        assert_band(&emb, &make(0.5 - eps), &make(0.5 + eps), ("line", "outside"));
    }
    let far = |theta: f64| -> Vec<f64> {
        let mut x = down(theta);
        x[0] = 0.7;
        x
    };
    assert_band(&emb, &far(0.5 - eps), &far(0.5 + eps), ("far", "outside"));
}

#[test]
fn local_eval_reproduces_f() {
    let emb = path(2, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = emb.stratified_samples(10_000, 5).unwrap();
    let mut tags = BTreeSet::new();
    for (_, x) in &samples {
        let meta = emb.classify(x);
        tags.insert(meta.tag());
        let i = rng.gen_range(0..emb.dim());
        let fx = emb.f(x);
        let local = emb.local_eval(i, &meta, x[i]).unwrap();
        assert!((local - fx[i]).abs() <= 1e-15, "{} {local} {}", meta.tag(), fx[i]);
    }
    assert_eq!(tags.len(), 4);
}

#[test]
fn local_eval_is_robust_to_metadata_noise() {
    let emb = path(2, 0);
    let p = *emb.params();
    let eps = 1e-7;
    // Every metadata value enters linearly or through a δ/h-scaled term.
    let lambda = 64.0 * p.lipschitz_hat() + 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let jiggle = |v: &mut f64, rng: &mut ChaCha8Rng| *v += rng.gen_range(-eps..=eps);
    for (_, x) in emb.stratified_samples(3_000, 8).unwrap() {
        let meta = emb.classify(&x);
        let mut noisy = meta.clone();
        match &mut noisy {
            RegionClassification::FarInsidePicture => {}
            RegionClassification::NearLine { s, t, z, dist, .. } => {
                for v in s.iter_mut().chain(t.iter_mut()).chain(z.iter_mut()) {
                    jiggle(v, &mut rng);
                }
                jiggle(dist, &mut rng);
            }
            RegionClassification::NearVertex { s, y, t, z, alpha, dist, .. } => {
                for v in s.iter_mut().chain(y.iter_mut()).chain(t.iter_mut()).chain(z.iter_mut()) {
                    jiggle(v, &mut rng);
                }
                *alpha = (*alpha + rng.gen_range(-eps..=eps)).clamp(0.0, 1.0);
                jiggle(dist, &mut rng);
            }
            RegionClassification::OutsidePicture { theta, dist } => {
                *theta = (*theta + rng.gen_range(0.0..=eps)).max(0.5);
                *dist = (*dist + rng.gen_range(0.0..=eps)).max(0.0);
            }
        }
        let i = rng.gen_range(0..emb.dim());
        let xi = x[i] + rng.gen_range(-eps..=eps);
        let a = emb.local_eval(i, &noisy, xi).unwrap();
        let b = emb.local_eval(i, &meta, x[i]).unwrap();
        assert!((a - b).abs() <= lambda * eps, "{}: {}", meta.tag(), (a - b).abs());
    }
}

#[test]
fn inconsistent_metadata_is_rejected() {
    let emb = path(2, 0);
    let bad = RegionClassification::OutsidePicture { theta: 0.1, dist: 0.0 };
    assert!(emb.local_eval(0, &bad, 0.0).is_err());
    assert!(emb.local_eval(10_000, &RegionClassification::FarInsidePicture, 0.0).is_err());
    let m = emb.params().m;
    let far = emb.local_eval(3 * m, &RegionClassification::FarInsidePicture, 0.25).unwrap();
    assert_eq!(far, 0.25 + emb.params().delta);
}

#[test]
fn unit_cube_rescaling() {
    let emb = path(2, 0);
    let f01 = rescale_to_unit(&emb);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let y: Vec<f64> = (0..emb.dim()).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let back = to_unit(&from_unit(&y));
        assert!(y.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
        let x = from_unit(&y);
        let r01 = dist(&f01(&y), &y);
        assert!((r01 - emb.residual(&x) / 3.0).abs() < 1e-15);
    }
    let e = &emb.endpoints().unwrap()[0];
    let r = (5f64.sqrt() - 1.0) / 2.0 * emb.params().h;
    let x: Vec<f64> = e.point.iter().zip(&e.direction).map(|(p, d)| p + r * d).collect();
    let y = to_unit(&x);
    assert!(dist(&f01(&y), &y) < 1e-18);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn f_stays_in_the_cube(seed in 0u64..1000, raw in proptest::collection::vec(-1.0f64..=2.0, 64)) {
        let emb = path(2, seed % 4);
        let y = emb.f(&raw);
        prop_assert!(y.iter().all(|v| (LO..=HI).contains(v)));
    }

    #[test]
    fn beta_is_affine_along_the_segment(a in -2.0f64..3.0, s in proptest::collection::vec(-1.0f64..2.0, 8), t in proptest::collection::vec(-1.0f64..2.0, 8)) {
        prop_assume!(dist(&s, &t) > 1e-3);
        let x: Vec<f64> = s.iter().zip(&t).map(|(p, q)| p + a * (q - p)).collect();
        prop_assert!((beta(&s, &t, &x).unwrap() - a).abs() < 1e-9);
    }
}
