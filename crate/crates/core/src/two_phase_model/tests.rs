use ndarray::{array, Array1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::silhouette_io::{generate_synthetic, SynthConfig};
use crate::sparse_coding::{omp_encode, Dictionary, ErrorFeature};

fn names(k: usize) -> Vec<String> {
    (1..=k).map(|c| format!("c{c}")).collect()
}

/// Four-dimensional error space: D_0 = {e1}, D_1 = {e2}, D_2 = {e3, (e3+e4)/sqrt2}.
fn hand_model(with_zeroth: bool) -> TwoPhaseModel {
    let first = Dictionary::from_columns(array![[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 0.0, 1.0], [0.0, 0.0, 1.0, 1.0]]).unwrap();
    let d0 = Dictionary::from_columns(array![[1.0], [0.0], [0.0], [0.0]]).unwrap();
    let d1 = Dictionary::from_columns(array![[0.0], [1.0], [0.0], [0.0]]).unwrap();
    let d2 = Dictionary::from_columns(array![[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    let params = TwoPhaseParams {
        length: 3,
        sparsity: 2,
        ..TwoPhaseParams::default()
    };
    TwoPhaseModel::from_parts(params, names(2), first, vec![with_zeroth.then_some(d0), Some(d1), Some(d2)]).unwrap()
}

fn verdict(residuals: Vec<f64>) -> FrameVerdict {
    let mut label = 0;
    for (i, &r) in residuals.iter().enumerate() {
        if r < residuals[label] {
            label = i;
        }
    }
    FrameVerdict { residuals, label }
}

#[test]
fn atom_of_class_two_is_reconstructed_exactly() {
    let model = hand_model(true);
    let x = ErrorFeature::new(vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let v = model.classify_frame(&x).unwrap();
    assert_eq!(v.label, 2);
    assert_eq!(v.residuals[2], 0.0);
    assert_eq!(v.residuals[0], 1.0);
    assert_eq!(v.residuals[1], 1.0);
}

#[test]
fn zero_feature_ties_to_lowest_class() {
    let x = ErrorFeature::new(vec![0.0; 4]).unwrap();
    let v = hand_model(true).classify_frame(&x).unwrap();
    assert_eq!(v.residuals, vec![0.0; 3]);
    assert_eq!(v.label, 0);
    let v = hand_model(false).classify_frame(&x).unwrap();
    assert_eq!(v.label, 1);
    assert!(v.residuals[0].is_infinite());
}

#[test]
fn residuals_match_masked_dense_code() {
    let model = hand_model(true);
    let dict = model.concat_dict();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..2.0)).collect();
        let feature = ErrorFeature::new(x.clone()).unwrap();
        let v = model.classify_frame(&feature).unwrap();
        let a = omp_encode(feature.view(), dict, 2).unwrap().to_dense(dict.num_atoms());
        let x = Array1::from(x);
        let mut total = Array1::zeros(dict.num_atoms());
        let full = &x - &dict.atoms().dot(&a);
        let full_err = full.dot(&full);
        for c in 0..=2 {
            let masked = Array1::from_iter((0..a.len()).map(|j| if model.atom_class()[j] == c { a[j] } else { 0.0 }));
            total += &masked;
            let r = &x - &dict.atoms().dot(&masked);
            assert!((v.residuals[c] - r.dot(&r)).abs() < 1e-12);
            assert!(v.residuals[c] >= full_err - 1e-12);
        }
        assert_eq!(total, a);
    }
}

#[test]
fn unanimous_frames_decide_the_video() {
    let frames: Vec<FrameVerdict> = (0..4).map(|i| verdict(vec![9.0, 5.0 + i as f64, 4.0, 1.0 + i as f64])).collect();
    for pooling in [Pooling::Max, Pooling::Sum] {
        assert_eq!(pool_verdicts(&frames, 3, pooling, true).unwrap().label, 3);
    }
}

#[test]
fn hand_computed_pooling() {
    let frames = vec![verdict(vec![f64::INFINITY, 1.0, 5.0]), verdict(vec![f64::INFINITY, 6.0, 2.0])];
    let max = pool_verdicts(&frames, 2, Pooling::Max, true).unwrap();
    assert_eq!(max.pooled, vec![1.0, 2.0]);
    assert_eq!(max.label, 1);
    let sum = pool_verdicts(&frames, 2, Pooling::Sum, true).unwrap();
    assert_eq!(sum.pooled, vec![7.0, 7.0]);
    assert_eq!(sum.label, 1);
    assert_eq!(sum.filtered, 0);
}

#[test]
fn zeroth_filtering_changes_the_vote() {
    // the zeroth-labelled frame carries a tempting class-2 residual
    let frames = vec![
        verdict(vec![0.1, 5.0, 0.5]),
        verdict(vec![5.0, 1.0, 3.0]),
        verdict(vec![5.0, 2.0, 3.0]),
    ];
    let filtered = pool_verdicts(&frames, 2, Pooling::Max, true).unwrap();
    let unfiltered = pool_verdicts(&frames, 2, Pooling::Max, false).unwrap();
    assert_eq!(filtered.filtered, 1);
    assert_eq!(filtered.label, 1);
    assert_eq!(unfiltered.label, 2);
}

#[test]
fn all_zeroth_falls_back_to_every_frame() {
    let frames = vec![verdict(vec![0.0, 3.0, 2.0]), verdict(vec![0.0, 4.0, 5.0])];
    let v = pool_verdicts(&frames, 2, Pooling::Sum, true).unwrap();
    assert_eq!(v.filtered, 2);
    assert_eq!(v.pooled, vec![7.0, 7.0]);
    assert_eq!(v.label, 1);
    assert!(pool_verdicts(&[], 2, Pooling::Sum, true).is_err());
}

#[test]
fn common_scaling_keeps_the_label() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let frames: Vec<FrameVerdict> = (0..5).map(|_| verdict((0..4).map(|_| rng.gen_range(0.0..1.0)).collect())).collect();
        let s = rng.gen_range(0.1..10.0);
        let scaled: Vec<FrameVerdict> = frames
            .iter()
            .map(|f| FrameVerdict {
                residuals: f.residuals.iter().map(|r| r * s).collect(),
                label: f.label,
            })
            .collect();
        for pooling in [Pooling::Max, Pooling::Sum] {
            assert_eq!(
                pool_verdicts(&frames, 3, pooling, true).unwrap().label,
                pool_verdicts(&scaled, 3, pooling, true).unwrap().label
            );
        }
    }
}

#[test]
fn pooling_parses() {
    assert_eq!("max".parse::<Pooling>().unwrap(), Pooling::Max);
    assert_eq!("sum".parse::<Pooling>().unwrap(), Pooling::Sum);
    assert!("mean".parse::<Pooling>().is_err());
    assert_eq!(Pooling::Sum.to_string(), "sum");
}

fn small_synthetic() -> crate::silhouette_io::Dataset {
    generate_synthetic(&SynthConfig {
        num_classes: 3,
        videos_per_class: 3,
        frames_per_video: 10,
        shared_frame_rate: 0.2,
        noise_frame_rate: 0.1,
        seed: 5,
    })
    .unwrap()
    .dataset
}

fn small_params() -> TwoPhaseParams {
    TwoPhaseParams {
        length: 32,
        sparsity: 4,
        rounds: 10,
        ksvd_iterations: 5,
        seed: 3,
        ..TwoPhaseParams::default()
    }
}

#[test]
fn rate_one_builds_no_zeroth_dictionary() {
    let data = small_synthetic();
    let model = train(&data, &TwoPhaseParams { rate: 1.0, ..small_params() }).unwrap();
    assert!(!model.has_zeroth());
    assert!(model.atom_class().iter().all(|&c| (1..=3).contains(&c)));
    let with = train(&data, &small_params()).unwrap();
    assert!(with.has_zeroth());
    let sizes: usize = (0..=3).filter_map(|c| with.class_dict(c)).map(|d| d.num_atoms()).sum();
    assert_eq!(with.concat_dict().num_atoms(), sizes);
}

#[test]
fn training_is_deterministic_and_serializes() {
    let data = small_synthetic();
    let a = train(&data, &small_params()).unwrap();
    let b = train(&data, &small_params()).unwrap();
    let text = a.to_json().unwrap();
    assert_eq!(text, b.to_json().unwrap());
    let back = TwoPhaseModel::from_json(&text).unwrap();
    assert_eq!(back, a);
    let bumped = text.replacen("\"version\":1", "\"version\":9", 1);
    assert!(matches!(TwoPhaseModel::from_json(&bumped), Err(crate::Error::Version { .. })));
}

#[test]
fn training_videos_are_recognized() {
    // every frame is class specific, so all of them are kept
    let data = generate_synthetic(&SynthConfig {
        num_classes: 3,
        videos_per_class: 3,
        frames_per_video: 12,
        shared_frame_rate: 0.0,
        noise_frame_rate: 0.0,
        seed: 5,
    })
    .unwrap()
    .dataset;
    let params = TwoPhaseParams {
        rate: 1.0,
        ..small_params()
    };
    let model = train(&data, &params).unwrap();
    let described = describe_videos(&data.videos, params.descriptor()).unwrap();
    for v in &described {
        assert_eq!(model.predict_descriptors(v.rows.view(), Pooling::Sum).unwrap().label, v.label, "{}", v.id);
    }
}

#[test]
fn tiny_class_rejected() {
    let mut data = small_synthetic();
    data.videos.retain(|v| v.class_label != 2 || v.id.ends_with("_v0"));
    for v in data.videos.iter_mut().filter(|v| v.class_label == 2) {
        v.frames.truncate(1);
    }
    assert!(train(&data, &small_params()).is_err());
    let single = crate::silhouette_io::Dataset {
        class_names: vec!["only".into()],
        videos: small_synthetic().videos.into_iter().filter(|v| v.class_label == 1).collect(),
    };
    assert!(train(&single, &small_params()).is_err());
}
