use zeroclass::silhouette_io::{generate_synthetic, load_dataset, trace_contour, SilhouetteMask, SynthConfig};
use zeroclass::Error;

#[test]
fn export_then_load_round_trips() {
    let synth = generate_synthetic(&SynthConfig {
        num_classes: 2,
        videos_per_class: 2,
        frames_per_video: 4,
        shared_frame_rate: 0.25,
        noise_frame_rate: 0.25,
        seed: 3,
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    synth.export(dir.path()).unwrap();
    assert!(dir.path().join("truth.csv").is_file());
    let loaded = load_dataset(dir.path()).unwrap();
    assert_eq!(loaded, synth.dataset);
}

#[test]
fn missing_and_empty_directories() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_dataset(&dir.path().join("nope")), Err(Error::MissingDirectory(_))));
    assert!(matches!(load_dataset(dir.path()), Err(Error::EmptyDirectory(_))));
}

#[test]
fn traced_contours_are_closed_boundary_walks() {
    let synth = generate_synthetic(&SynthConfig {
        num_classes: 3,
        videos_per_class: 1,
        frames_per_video: 6,
        shared_frame_rate: 0.2,
        noise_frame_rate: 0.2,
        seed: 11,
    })
    .unwrap();
    for mask in synth.dataset.videos.iter().flat_map(|v| &v.frames) {
        let c = trace_contour(mask).unwrap();
        let pts = c.points();
        assert!(pts.len() >= 3);
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[(i + 1) % pts.len()]);
            assert!((a.0 - b.0).abs() <= 1.0 && (a.1 - b.1).abs() <= 1.0);
            let (x, y) = (a.0 as i64, a.1 as i64);
            assert!(mask.get_signed(x, y));
            let outside = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| !mask.get_signed(x + dx, y + dy));
            assert!(outside, "({x}, {y}) is interior");
        }
    }
}

#[test]
fn empty_mask_cannot_be_traced() {
    let mask = SilhouetteMask::from_fn(5, 5, |_, _| false).unwrap();
    assert!(trace_contour(&mask).is_err());
}
