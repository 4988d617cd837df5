use std::io::Write;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::boost::boost_sorted;
use super::stump::SortedFeatures;

/// Split of the training frames into per-class discriminative sets and the
/// zeroth-class pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePartition {
    /// `discriminative[c - 1]` holds frame indices of class `c`, ascending.
    pub discriminative: Vec<Vec<usize>>,
    /// Relabeled frames, ascending.
    pub zeroth: Vec<usize>,
    /// Each frame's final boosting weight from its own class's pass.
    pub weights: Vec<f64>,
}

impl FramePartition {
    /// Every frame discriminative; used when the zeroth class is disabled.
    pub fn all_discriminative(labels: &[usize]) -> Result<Self> {
        let k = check_labels(labels)?;
        let mut discriminative = vec![Vec::new(); k];
        for (i, &c) in labels.iter().enumerate() {
            discriminative[c - 1].push(i);
        }
        Ok(Self {
            discriminative,
            zeroth: Vec::new(),
            weights: vec![0.0; labels.len()],
        })
    }

    pub fn num_classes(&self) -> usize {
        self.discriminative.len()
    }

    /// Assigned label per frame: the original class, or 0 for the pool.
    pub fn assigned_labels(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (c, frames) in self.discriminative.iter().enumerate() {
            for &i in frames {
                out[i] = c + 1;
            }
        }
        out
    }

    pub fn discriminative_frames(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.discriminative.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }
}

/// How many frames of a class with `n_c` frames stay discriminative.
pub fn discriminative_count(rate: f64, n_c: usize) -> usize {
    ((rate * n_c as f64).round() as usize).clamp(1, n_c.max(1))
}

fn check_labels(labels: &[usize]) -> Result<usize> {
    if labels.iter().any(|&c| c == 0) {
        return Err(Error::input("class labels start at 1"));
    }
    let k = labels.iter().copied().max().unwrap_or(0);
    if k == 0 {
        return Err(Error::input("no frames to partition"));
    }
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&c| counts[c - 1] += 1);
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::input(format!("class {} has no frames", c + 1)));
    }
    Ok(k)
}

/// Each frame's final Gentle AdaBoost weight from the one-vs-rest pass in
/// which its own class is positive.
pub fn selection_weights(features: ArrayView2<f64>, labels: &[usize], rounds: usize) -> Result<Vec<f64>> {
    if rounds == 0 {
        return Err(Error::param("boosting needs at least one round"));
    }
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::input(format!("{n} frames but {} labels", labels.len())));
    }
    if features.ncols() == 0 {
        return Err(Error::input("frames have no features"));
    }
    let k = check_labels(labels)?;
    if n < 2 {
        return Err(Error::input("need at least 2 frames"));
    }

    let sorted = SortedFeatures::new(features);
    let passes: Vec<Vec<f64>> = (1..=k)
        .into_par_iter()
        .map(|c| {
            let targets: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
            boost_sorted(features, &sorted, &targets, rounds).final_weights
        })
        .collect();
    Ok(labels.iter().enumerate().map(|(i, &c)| passes[c - 1][i]).collect())
}

/// Keeps the `max(1, round(rate * n_c))` lowest-weight frames of each class;
/// the rest go to the zeroth class. Weight ties are broken by frame index.
pub fn partition_by_weights(weights: &[f64], labels: &[usize], rate: f64) -> Result<FramePartition> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::param(format!("rate must be in (0, 1], got {rate}")));
    }
    if weights.len() != labels.len() {
        return Err(Error::input(format!("{} weights but {} labels", weights.len(), labels.len())));
    }
    let k = check_labels(labels)?;
    let n = labels.len();
    let mut discriminative = vec![Vec::new(); k];
    let mut zeroth = Vec::new();
    for c in 1..=k {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        members.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
        let keep = discriminative_count(rate, members.len());
        let mut chosen = members[..keep].to_vec();
        chosen.sort_unstable();
        discriminative[c - 1] = chosen;
        zeroth.extend_from_slice(&members[keep..]);
    }
    zeroth.sort_unstable();

    Ok(FramePartition {
        discriminative,
        zeroth,
        weights: weights.to_vec(),
    })
}

/// Ranks frames (rows of `features`) with one-vs-rest Gentle AdaBoost and
/// splits them with [`partition_by_weights`].
pub fn partition_frames(features: ArrayView2<f64>, labels: &[usize], rate: f64, rounds: usize) -> Result<FramePartition> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::param(format!("rate must be in (0, 1], got {rate}")));
    }
    let weights = selection_weights(features, labels, rounds)?;
    partition_by_weights(&weights, labels, rate)
}

/// Identifies one training frame in exported tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameRef {
    pub video_id: String,
    pub frame: usize,
}

/// CSV with columns `video_id,frame,class,assigned,weight`.
pub fn write_partition_csv<W: Write>(
    out: W,
    partition: &FramePartition,
    frames: &[FrameRef],
    labels: &[usize],
) -> Result<()> {
    if frames.len() != labels.len() || frames.len() != partition.weights.len() {
        return Err(Error::input("partition, frame list and labels differ in length"));
    }
    let assigned = partition.assigned_labels(frames.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["video_id", "frame", "class", "assigned", "weight"])?;
    for (i, f) in frames.iter().enumerate() {
        w.write_record([
            f.video_id.clone(),
            f.frame.to_string(),
            labels[i].to_string(),
            assigned[i].to_string(),
            format!("{:.16e}", partition.weights[i]),
        ])?;
    }
    w.flush().map_err(|e| Error::io("writing partition csv", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(seed: u64, per_class: &[usize]) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: usize = per_class.iter().sum();
        let mut x = Array2::zeros((n, 3));
        let mut labels = Vec::with_capacity(n);
        let mut row = 0;
        for (c, &count) in per_class.iter().enumerate() {
            for _ in 0..count {
                for j in 0..3 {
                    x[[row, j]] = c as f64 * 2.0 + rng.gen_range(-1.5..1.5);
                }
                labels.push(c + 1);
                row += 1;
            }
        }
        (x, labels)
    }

    fn assert_cover(p: &FramePartition, n: usize) {
        let mut all = p.discriminative_frames();
        all.extend(&p.zeroth);
        all.sort_unstable();
        assert_eq!(all, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn rate_one_keeps_everything() {
        let (x, labels) = blobs(1, &[6, 7, 5]);
        let p = partition_frames(x.view(), &labels, 1.0, 10).unwrap();
        assert!(p.zeroth.is_empty());
        assert_cover(&p, labels.len());
    }

    #[test]
    fn small_class_keeps_one_frame() {
        assert_eq!(discriminative_count(0.2, 3), 1);
        assert_eq!(discriminative_count(0.2, 10), 2);
        assert_eq!(discriminative_count(0.25, 10), 3);
        let (x, labels) = blobs(2, &[3, 10]);
        let p = partition_frames(x.view(), &labels, 0.2, 10).unwrap();
        assert_eq!(p.discriminative[0].len(), 1);
        assert_eq!(p.discriminative[1].len(), 2);
        assert_eq!(p.zeroth.len(), 10);
        assert_cover(&p, 13);
    }

    #[test]
    fn selected_frames_have_lowest_weights() {
        let (x, labels) = blobs(3, &[12, 12, 12]);
        let p = partition_frames(x.view(), &labels, 0.3, 20).unwrap();
        let assigned = p.assigned_labels(labels.len());
        for c in 1..=3 {
            let kept_max = p.discriminative[c - 1].iter().map(|&i| p.weights[i]).fold(0.0, f64::max);
            let dropped_min = (0..labels.len())
                .filter(|&i| labels[i] == c && assigned[i] == 0)
                .map(|i| p.weights[i])
                .fold(f64::INFINITY, f64::min);
            assert!(kept_max <= dropped_min);
        }
    }

    #[test]
    fn invalid_rate_rejected() {
        let (x, labels) = blobs(4, &[3, 3]);
        for r in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(partition_frames(x.view(), &labels, r, 5).is_err());
        }
        assert!(partition_frames(x.view(), &[1, 1, 1, 3, 3, 3], 0.5, 5).is_err());
    }

    #[test]
    fn csv_export() {
        let (x, labels) = blobs(5, &[2, 2]);
        let p = partition_frames(x.view(), &labels, 0.5, 5).unwrap();
        let frames: Vec<FrameRef> = (0..4)
            .map(|i| FrameRef {
                video_id: format!("v{}", i / 2),
                frame: i % 2,
            })
            .collect();
        let mut buf = Vec::new();
        write_partition_csv(&mut buf, &p, &frames, &labels).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "video_id,frame,class,assigned,weight");
        assert_eq!(lines.len(), 5);
        let zeros = lines[1..].iter().filter(|l| l.split(',').nth(3) == Some("0")).count();
        assert_eq!(zeros, 2);
    }
}
