//! Cross-module invariants as property tests.

use proptest::prelude::*;

use radcount::baselines::{DistanceMetric, KnnModel, RfConfig, RfModel};
use radcount::cube::{FrameMap, RadarCube};
use radcount::dataset::PeopleCount;
use radcount::metrics::{CompositeWeights, EvalReport};
use radcount::preprocess::{preprocess_pipeline, PreprocessConfig, StdMap};
use radcount::rulecc::{
    aggregate_window_counts, binarize, count_field, dilate4, erode4, label_components_4,
    predict_sequence, BinaryMask, RuleCCConfig,
};
use radcount::synth::{generate_samples, LayoutPreset, SynthParams};
use radcount::tuner::{count_class, tune, GridSpec};

fn arb_cube() -> impl Strategy<Value = RadarCube> {
    cube_with_frames(1..9)
}

fn cube_with_frames(frames: std::ops::Range<usize>) -> impl Strategy<Value = RadarCube> {
    (1usize..6, 1usize..6, frames).prop_flat_map(|(r, c, t)| {
        proptest::collection::vec(-1e6f32..1e6, r * c * t)
            .prop_map(move |data| RadarCube::new(r, c, t, data).unwrap())
    })
}

fn arb_mask() -> impl Strategy<Value = BinaryMask> {
    (1usize..10, 1usize..14, 0.0f64..1.0, any::<u64>()).prop_map(|(r, c, p, seed)| {
        let mut s = seed | 1;
        BinaryMask::from_fn(r, c, |_, _| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s % 1000) as f64 / 1000.0 < p
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn radc_round_trip(cube in arb_cube()) {
        let back = RadarCube::from_radc_bytes(&cube.to_radc_bytes().unwrap()).unwrap();
        prop_assert_eq!(&back, &cube);
        prop_assert!(back.data().iter().zip(cube.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn full_slice_and_reassembly(cube in arb_cube(), k in 0usize..9) {
        let t = cube.frames();
        prop_assert_eq!(&cube.slice_window(0, t).unwrap(), &cube);
        let k = k.min(t);
        if k > 0 && k < t {
            let parts = [cube.slice_window(0, k).unwrap(), cube.slice_window(k, t - k).unwrap()];
            prop_assert_eq!(&RadarCube::concat_frames(&parts).unwrap(), &cube);
        }
    }

    #[test]
    fn pipeline_bitwise_deterministic(cube in cube_with_frames(2..9)) {
        let cube = cube.map(|v| v.abs()).unwrap();
        let cfg = PreprocessConfig::default();
        let a = preprocess_pipeline(&cube, &cfg).unwrap();
        let b = preprocess_pipeline(&cube.clone(), &cfg).unwrap();
        prop_assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn morphology_brackets_the_mask(m in arb_mask()) {
        let e = erode4(&m, 1);
        let d = dilate4(&m, 1);
        prop_assert!(e.is_subset_of(&m));
        prop_assert!(m.is_subset_of(&d));
        // opening is anti-extensive
        prop_assert!(dilate4(&e, 1).is_subset_of(&m));
    }

    #[test]
    fn components_partition_the_ones(m in arb_mask()) {
        let cs = label_components_4(&m);
        let mut all: Vec<(usize, usize)> = cs.components.iter().flat_map(|c| c.pixels.clone()).collect();
        prop_assert_eq!(cs.total_area(), m.count_ones());
        all.sort_unstable();
        let before = all.len();
        all.dedup();
        prop_assert_eq!(all.len(), before);
        prop_assert_eq!(all, m.ones().collect::<Vec<_>>());
    }

    #[test]
    fn binarize_threshold_homogeneous(
        vals in proptest::collection::vec(0.0f64..1.0, 12 * 91),
        tau in 0.01f64..0.9,
        k in -8i32..8,
    ) {
        let alpha = 2f64.powi(k);
        let map = FrameMap::new(12, 91, vals).unwrap();
        prop_assert_eq!(binarize(&map, tau), binarize(&map.map(|v| v * alpha), tau * alpha));
    }

    #[test]
    fn binarize_homogeneous_off_the_boundary(
        vals in proptest::collection::vec(0.0f64..1.0, 12 * 91),
        tau in 0.01f64..0.9,
        alpha in 1e-3f64..1e3,
    ) {
        // away from exact ties any positive scale preserves the mask
        let map = FrameMap::new(12, 91, vals).unwrap();
        let clear = map.data().iter().all(|v| (v - tau).abs() > 1e-9);
        prop_assume!(clear);
        prop_assert_eq!(binarize(&map, tau), binarize(&map.map(|v| v * alpha), tau * alpha));
    }

    #[test]
    fn aggregation_ignores_window_order(mut counts in proptest::collection::vec(0usize..5, 1..60), seed in any::<u64>()) {
        let a = aggregate_window_counts(&counts, 0.3);
        let mut s = seed | 1;
        for i in (1..counts.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            counts.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(aggregate_window_counts(&counts, 0.3), a);
    }

    #[test]
    fn count_monotone_when_adding_a_blob(present in proptest::collection::vec(any::<bool>(), 9), extra in 0usize..9, level in 0.03f64..0.2) {
        let cfg = RuleCCConfig::default();
        let slots: Vec<usize> = (0..9).map(|i| 5 + 10 * i).collect();
        let field = |on: &[bool]| {
            let mut m = FrameMap::filled(12, 91, 0.0);
            for (i, &c) in slots.iter().enumerate() {
                if on[i] {
                    for r in 4..7 {
                        for cc in c - 1..=c + 1 {
                            m.set(r, cc, level);
                        }
                    }
                }
            }
            StdMap::new(m).unwrap()
        };
        let before = count_field(&field(&present), &cfg);
        prop_assert_eq!(before, present.iter().filter(|&&b| b).count());
        let mut more = present.clone();
        more[extra] = true;
        prop_assert!(count_field(&field(&more), &cfg) >= before);
    }

    #[test]
    fn knn_within_neighbor_label_range(
        rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 6..30),
        q in proptest::collection::vec(-6.0f64..6.0, 3),
        k in prop_oneof![Just(3usize), Just(5usize)],
        metric in prop_oneof![Just(DistanceMetric::Euclidean), Just(DistanceMetric::Manhattan), Just(DistanceMetric::Mahalanobis)],
    ) {
        let y: Vec<f64> = (0..rows.len()).map(|i| (i % 4) as f64).collect();
        let m = KnnModel::fit(&rows, &y, k, metric, true).unwrap();
        let nn = m.neighbors(&q);
        let labels: Vec<f64> = nn.iter().map(|&i| y[i]).collect();
        let lo = labels.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = labels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let p = m.predict(&q);
        prop_assert!(p >= lo && p <= hi);
    }

    #[test]
    fn forest_predictions_inside_label_hull(
        rows in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 4), 5..40),
        q in proptest::collection::vec(-6.0f64..6.0, 4),
        seed in any::<u64>(),
    ) {
        let y: Vec<f64> = rows.iter().map(|r| (r[0] * 3.0).sin() + r[1]).collect();
        let cfg = RfConfig { n_estimators: 7, seed, ..RfConfig::default() };
        let rf = RfModel::fit(&rows, &y, &cfg).unwrap();
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let p = rf.predict(&q);
        prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        prop_assert_eq!(RfModel::fit(&rows, &y, &cfg).unwrap(), rf);
    }
}

fn small_suite() -> (Vec<RadarCube>, Vec<PeopleCount>) {
    let samples = generate_samples(&[LayoutPreset::AChairs], 2, 19, &SynthParams::default()).unwrap();
    let cfg = PreprocessConfig::default();
    (
        samples.iter().map(|(s, _)| preprocess_pipeline(&s.cube, &cfg).unwrap()).collect(),
        samples.iter().map(|(s, _)| s.label).collect(),
    )
}

#[test]
fn tuner_best_score_rescores_identically() {
    let (cubes, labels) = small_suite();
    let spec = GridSpec {
        window_sizes: vec![10, 25],
        tau_points: 6,
        ..GridSpec::default()
    };
    let w = CompositeWeights::default();
    let result = tune(&cubes, &labels, &spec, &RuleCCConfig::default(), &w).unwrap();
    assert_eq!(result.table.len(), 12);
    let counts: Vec<usize> = cubes
        .iter()
        .map(|c| predict_sequence(c, &result.best_config).unwrap())
        .collect();
    let classes: Vec<u8> = counts.iter().map(|&c| count_class(c)).collect();
    let cont: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let truth: Vec<u8> = labels.iter().map(|l| l.get()).collect();
    let report = EvalReport::new(&cont, &classes, &truth, &w).unwrap();
    assert_eq!(report.composite, result.best_score);
    let again = tune(&cubes, &labels, &spec, &RuleCCConfig::default(), &w).unwrap();
    assert_eq!(again.to_json().unwrap(), result.to_json().unwrap());
    assert_eq!(again.to_csv_bytes().unwrap(), result.to_csv_bytes().unwrap());
}

#[test]
fn tuner_rows_match_grid_size() {
    let (cubes, labels) = small_suite();
    for (windows, points) in [(vec![10], 1), (vec![15, 60], 3), (vec![10, 20, 30], 4)] {
        let spec = GridSpec {
            window_sizes: windows.clone(),
            tau_points: points,
            ..GridSpec::default()
        };
        let r = tune(&cubes, &labels, &spec, &RuleCCConfig::default(), &CompositeWeights::default()).unwrap();
        assert_eq!(r.table.len(), windows.len() * points);
    }
}
