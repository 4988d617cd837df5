use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Dataset, SilhouetteMask, VideoRecord};

const CANVAS: usize = 80;
const BASE_RADIUS: f64 = 18.0;
const LOBE_AMPLITUDE: f64 = 0.28;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_classes: usize,
    pub videos_per_class: usize,
    pub frames_per_video: usize,
    pub shared_frame_rate: f64,
    pub noise_frame_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_classes: 5,
            videos_per_class: 10,
            frames_per_video: 30,
            shared_frame_rate: 0.2,
            noise_frame_rate: 0.1,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 1 || self.videos_per_class < 1 || self.frames_per_video < 1 {
            return Err(Error::param(
                "synthetic class, video and frame counts must be at least 1",
            ));
        }
        let rates = [
            ("shared_frame_rate", self.shared_frame_rate),
            ("noise_frame_rate", self.noise_frame_rate),
        ];
        for (name, r) in rates {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::param(format!("{name} must lie in [0, 1), got {r}")));
            }
        }
        if self.shared_frame_rate + self.noise_frame_rate >= 1.0 {
            return Err(Error::param(format!(
                "shared_frame_rate + noise_frame_rate must be < 1, got {}",
                self.shared_frame_rate + self.noise_frame_rate
            )));
        }
        Ok(())
    }

    /// (shared, noise) frame counts per video.
    pub fn frame_split(&self) -> (usize, usize) {
        let n = self.frames_per_video;
        let shared = (self.shared_frame_rate * n as f64).round() as usize;
        let noise = (self.noise_frame_rate * n as f64).round() as usize;
        // keep at least one class-specific frame
        let shared = shared.min(n - 1);
        let noise = noise.min(n - 1 - shared);
        (shared, noise)
    }
}

/// Ground truth for each synthetic frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameKind {
    /// Class-specific pose.
    Discriminative,
    /// The class-independent common pose.
    Shared,
    /// Random clutter.
    Noise,
}

impl FrameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameKind::Discriminative => "discriminative",
            FrameKind::Shared => "shared",
            FrameKind::Noise => "noise",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub dataset: Dataset,
    /// Per video, per frame ground truth, aligned with `dataset.videos`.
    pub truth: Vec<Vec<FrameKind>>,
}

impl SyntheticDataset {
    /// Writes the frames in the `load_dataset` layout plus `truth.csv` at the root.
    pub fn export(&self, root: &Path) -> Result<()> {
        super::export_dataset(&self.dataset, root)?;
        let mut w = csv::Writer::from_path(root.join("truth.csv"))?;
        w.write_record(["video_id", "frame", "class", "kind"])?;
        for (video, kinds) in self.dataset.videos.iter().zip(&self.truth) {
            for (i, kind) in kinds.iter().enumerate() {
                w.write_record([
                    video.id.as_str(),
                    &i.to_string(),
                    &video.class_label.to_string(),
                    kind.as_str(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("writing truth.csv", e))?;
        Ok(())
    }
}

struct VideoStyle {
    cx: f64,
    cy: f64,
    scale: f64,
    aspect: f64,
    phase0: f64,
    phase_speed: f64,
}

/// Fills pixels whose centre lies inside the star-shaped curve `radius(theta)`.
fn render_star(cx: f64, cy: f64, radius: impl Fn(f64) -> f64) -> SilhouetteMask {
    SilhouetteMask::from_fn(CANVAS, CANVAS, |x, y| {
        let dx = x as f64 + 0.5 - cx;
        let dy = y as f64 + 0.5 - cy;
        dx.hypot(dy) <= radius(dy.atan2(dx))
    })
    .expect("canvas is nonempty")
}

fn ellipse_radius(a: f64, b: f64, theta: f64) -> f64 {
    a * b / ((b * theta.cos()).powi(2) + (a * theta.sin()).powi(2)).sqrt()
}

fn class_pose(class_label: usize, style: &VideoStyle, t: f64) -> SilhouetteMask {
    let lobes = (class_label + 2) as f64;
    let a = BASE_RADIUS * style.scale * style.aspect;
    let b = BASE_RADIUS * style.scale / style.aspect;
    let phase = style.phase0 + style.phase_speed * t;
    render_star(style.cx, style.cy, |theta| {
        ellipse_radius(a, b, theta) * (1.0 + LOBE_AMPLITUDE * (lobes * theta + phase).sin())
    })
}

fn common_pose(style: &VideoStyle, rng: &mut ChaCha8Rng) -> SilhouetteMask {
    let r = BASE_RADIUS * style.scale * rng.gen_range(0.95..1.05);
    render_star(style.cx, style.cy, |_| r)
}

fn noise_blob(rng: &mut ChaCha8Rng) -> SilhouetteMask {
    let count = rng.gen_range(2..=4);
    let discs: Vec<(f64, f64, f64)> = (0..count)
        .map(|_| {
            (
                rng.gen_range(15.0..65.0),
                rng.gen_range(15.0..65.0),
                rng.gen_range(4.0..12.0),
            )
        })
        .collect();
    SilhouetteMask::from_fn(CANVAS, CANVAS, |x, y| {
        let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
        discs
            .iter()
            .any(|&(cx, cy, r)| (px - cx).hypot(py - cy) <= r)
    })
    .expect("canvas is nonempty")
}

/// Generates a labelled dataset whose classes differ in contour frequency content.
///
/// Class `c` is an ellipse modulated by `c + 2` sinusoidal lobes whose phase
/// advances along the video. A `shared_frame_rate` fraction of each video's frames
/// shows a plain circle common to all classes and a `noise_frame_rate` fraction
/// shows random blobs. The output is a pure function of `config`.
pub fn generate_synthetic(config: &SynthConfig) -> Result<SyntheticDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (n_shared, n_noise) = config.frame_split();
    let n = config.frames_per_video;
    let width = (config.num_classes.max(config.videos_per_class)).to_string().len();

    let class_names = (1..=config.num_classes)
        .map(|c| format!("class{c:0width$}"))
        .collect();
    let mut videos = Vec::with_capacity(config.num_classes * config.videos_per_class);
    let mut truth = Vec::with_capacity(videos.capacity());

    for class_label in 1..=config.num_classes {
        for v in 0..config.videos_per_class {
            let style = VideoStyle {
                cx: CANVAS as f64 / 2.0 + rng.gen_range(-4.0..4.0),
                cy: CANVAS as f64 / 2.0 + rng.gen_range(-4.0..4.0),
                scale: rng.gen_range(0.8..1.2),
                aspect: rng.gen_range(0.9..1.1),
                phase0: rng.gen_range(0.0..TAU),
                phase_speed: rng.gen_range(0.5..1.5) * PI,
            };

            let mut kinds = vec![FrameKind::Discriminative; n];
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            for &i in &order[..n_shared] {
                kinds[i] = FrameKind::Shared;
            }
            for &i in &order[n_shared..n_shared + n_noise] {
                kinds[i] = FrameKind::Noise;
            }

            let frames = kinds
                .iter()
                .enumerate()
                .map(|(i, kind)| match kind {
                    FrameKind::Discriminative => class_pose(class_label, &style, i as f64 / n as f64),
                    FrameKind::Shared => common_pose(&style, &mut rng),
                    FrameKind::Noise => noise_blob(&mut rng),
                })
                .collect();

            videos.push(VideoRecord {
                id: format!("c{class_label:0width$}_v{:0width$}", v + 1),
                class_label,
                frames,
            });
            truth.push(kinds);
        }
    }

    Ok(SyntheticDataset {
        dataset: Dataset {
            class_names,
            videos,
        },
        truth,
    })
}
