use std::collections::BTreeMap;

use crlscore::aggregate::{
    normalize, origami_area, origami_max_area, origami_score, radar_area, MetricDescriptor, NormalizeOptions, Orientation,
};
use crlscore::generation::{fid, iou, kid, EmbeddingSet};
use crlscore::graph::junction_census;
use crlscore::report::{emit_report, Report, ReportFormat};
use crlscore::representation::{hungarian_match, irs, jemmig, mic_pair, AssociationMatrix};
use crlscore::scm::{render_pendulum, Scm};
use crlscore::{BinaryMask, CausalGraph, DataTable};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn embeddings(dim: usize, rows: usize) -> impl Strategy<Value = EmbeddingSet> {
    prop::collection::vec(prop::collection::vec(-3.0..3.0f64, dim), rows)
        .prop_map(|r| EmbeddingSet::new(r).unwrap())
}

fn masks(w: usize, h: usize) -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
    (prop::collection::vec(any::<bool>(), w * h), prop::collection::vec(any::<bool>(), w * h))
        .prop_map(move |(a, b)| (BinaryMask::new(w, h, a).unwrap(), BinaryMask::new(w, h, b).unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn origami_ignores_axis_order(r in prop::collection::vec(0.0..1.0f64, 3..10), h in 0.05..1.0f64, seed: u64) {
        let mut p = r.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..p.len()).rev() {
            p.swap(i, rng.random_range(0..=i));
        }
        prop_assert!(close(origami_area(&r, h).unwrap(), origami_area(&p, h).unwrap(), 1e-12));
    }

    #[test]
    fn radar_is_rotation_invariant(r in prop::collection::vec(0.0..1.0f64, 3..10), k in 0usize..10) {
        let mut p = r.clone();
        p.rotate_left(k % r.len());
        prop_assert!(close(radar_area(&r).unwrap(), radar_area(&p).unwrap(), 1e-12));
    }

    #[test]
    fn origami_score_bounded(r in prop::collection::vec(0.0..1.0f64, 3..10), h in 0.05..1.0f64) {
        let s = origami_score(&r, h).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&s));
        let full = origami_area(&vec![1.0; r.len()], h).unwrap();
        prop_assert!(close(full, origami_max_area(r.len(), h).unwrap(), 1e-12));
    }

    #[test]
    fn normalization_spans_unit_interval(raw in prop::collection::vec(-100.0..100.0f64, 2..8), down: bool) {
        prop_assume!(raw.iter().any(|v| *v != raw[0]));
        let orientation = if down { Orientation::Downward } else { Orientation::Upward };
        let d = [MetricDescriptor::new("m", orientation, false)];
        let rows: Vec<Vec<f64>> = raw.iter().map(|v| vec![*v]).collect();
        let out = normalize(&rows, &d, NormalizeOptions::default()).unwrap();
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (v, n) in raw.iter().zip(&out) {
            prop_assert!((0.0..=1.0).contains(&n[0]));
            let (best, worst) = if down { (lo, hi) } else { (hi, lo) };
            if *v == best { prop_assert_eq!(n[0], 1.0); }
            if *v == worst { prop_assert_eq!(n[0], 0.0); }
        }
    }

    #[test]
    fn fid_symmetric_and_translation_invariant(a in embeddings(3, 12), b in embeddings(3, 12), shift in prop::collection::vec(-5.0..5.0f64, 3)) {
        let ab = fid(&a, &b).unwrap();
        prop_assert!(close(ab, fid(&b, &a).unwrap(), 1e-8));
        prop_assert!(ab >= 0.0);
        let move_by = |e: &EmbeddingSet| EmbeddingSet::new(e.rows().iter().map(|r| r.iter().zip(&shift).map(|(x, s)| x + s).collect()).collect()).unwrap();
        prop_assert!(close(ab, fid(&move_by(&a), &move_by(&b)).unwrap(), 1e-7));
        prop_assert!(fid(&a, &a).unwrap().abs() < 1e-8);
    }

    #[test]
    fn kid_symmetric(a in embeddings(4, 6), b in embeddings(4, 9)) {
        prop_assert!(close(kid(&a, &b).unwrap(), kid(&b, &a).unwrap(), 1e-10));
    }

    #[test]
    fn iou_symmetric_and_bounded((a, b) in masks(5, 4)) {
        let ab = iou(&a, &b).unwrap();
        prop_assert_eq!(ab, iou(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(iou(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn hungarian_total_invariant_under_row_permutation(values in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 4), 3), k in 0usize..3) {
        let mut rotated = values.clone();
        rotated.rotate_left(k);
        let a = hungarian_match(&AssociationMatrix::new("m", values).unwrap()).unwrap();
        let b = hungarian_match(&AssociationMatrix::new("m", rotated).unwrap()).unwrap();
        prop_assert!(close(a.total, b.total, 1e-12));
    }

    #[test]
    fn pendulum_shadow_moves_right_with_angle(a in -45.0..44.0f64, step in 0.5..1.0f64, light in 60.0..120.0f64) {
        let left = render_pendulum(a, light).unwrap();
        let right = render_pendulum(a + step, light).unwrap();
        prop_assert!(right.shadow_position > left.shadow_position);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mic_symmetric(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..300).map(|_| rng.random()).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v + 0.3 * rng.random::<f64>()).collect();
        prop_assert!(close(mic_pair(&x, &y).unwrap(), mic_pair(&y, &x).unwrap(), 1e-12));
    }

    #[test]
    fn irs_and_jemmig_ignore_positive_affine_maps(seed: u64, scale in 0.1..10.0f64, offset in -5.0..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 1000;
        let f: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.random()).collect()).collect();
        let z: Vec<Vec<f64>> = (0..2).map(|i| (0..n).map(|r| f[i][r] + 0.2 * rng.random::<f64>()).collect()).collect();
        let moved: Vec<Vec<f64>> = z.iter().map(|c| c.iter().map(|v| scale * v + offset).collect()).collect();
        let factors = DataTable::from_numeric(&["a", "b"], f).unwrap();
        let z = DataTable::from_numeric(&["z0", "z1"], z).unwrap();
        let moved = DataTable::from_numeric(&["z0", "z1"], moved).unwrap();
        prop_assert!(close(irs(&factors, &z, 10).unwrap(), irs(&factors, &moved, 10).unwrap(), 1e-9));
        prop_assert!(close(jemmig(&factors, &z, 10).unwrap(), jemmig(&factors, &moved, 10).unwrap(), 1e-9));
    }
}

fn chain_scm() -> Scm {
    Scm::from_json_str(include_str!("../fixtures/chain_scm.json")).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn intervention_is_idempotent(a in -5.0..5.0f64, seed in 0u64..1000) {
        let scm = chain_scm();
        let once = scm.intervene(&BTreeMap::from([("B".to_string(), a)])).unwrap();
        let twice = once.intervene(&BTreeMap::from([("B".to_string(), a)])).unwrap();
        prop_assert_eq!(once.sample(20, seed).unwrap(), twice.sample(20, seed).unwrap());
    }

    #[test]
    fn disjoint_interventions_commute(a in -5.0..5.0f64, c in -5.0..5.0f64, seed in 0u64..1000) {
        let scm = chain_scm();
        let da = BTreeMap::from([("A".to_string(), a)]);
        let dc = BTreeMap::from([("C".to_string(), c)]);
        let ac = scm.intervene(&da).unwrap().intervene(&dc).unwrap();
        let ca = scm.intervene(&dc).unwrap().intervene(&da).unwrap();
        prop_assert_eq!(ac.sample(20, seed).unwrap(), ca.sample(20, seed).unwrap());
    }

    #[test]
    fn report_rendering_is_deterministic(values in prop::collection::vec(-1e6..1e6f64, 0..6), warn in "[a-z ]{0,12}") {
        let build = || {
            let mut r = Report::new("crlscore", "0.1.0", vec!["score".into()]);
            r.add_section("values", &values).unwrap();
            r.add_section("alpha", &0.05).unwrap();
            if !warn.is_empty() { r.warn(warn.clone()); }
            r
        };
        for format in [ReportFormat::Text, ReportFormat::Structured] {
            prop_assert_eq!(emit_report(&build(), format), emit_report(&build(), format));
        }
    }
}

/// Triple-loop census: every ordered (a, b, c) of distinct nodes with a–b and
/// b–c adjacent counts once per unordered endpoint pair, shielded or not.
#[test]
fn census_matches_cubic_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let n = rng.random_range(3..8);
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < 0.4 {
                    edges.push((names[i].as_str(), names[j].as_str()));
                }
            }
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let g = CausalGraph::from_names(&refs, &edges).unwrap();
        let census = junction_census(&g);
        let (mut chains, mut forks, mut colliders) = (0, 0, 0);
        for b in 0..n {
            for a in 0..n {
                for c in a + 1..n {
                    if a == b || c == b {
                        continue;
                    }
                    let adj = |x: usize, y: usize| g.has_edge(x, y) || g.has_edge(y, x);
                    if !adj(a, b) || !adj(b, c) {
                        continue;
                    }
                    match (g.has_edge(a, b), g.has_edge(c, b)) {
                        (true, true) => colliders += 1,
                        (false, false) => forks += 1,
                        _ => chains += 1,
                    }
                }
            }
        }
        assert_eq!(census.chains.len(), chains);
        assert_eq!(census.forks.len(), forks);
        assert_eq!(census.colliders.len(), colliders);
    }
}
