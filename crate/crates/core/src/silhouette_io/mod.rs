//! Silhouette masks, boundary tracing, dataset loading and synthetic data.

mod contour;
mod dataset;
mod mask;
mod synth;

pub use contour::{trace_contour, Contour};
pub use dataset::{export_dataset, frame_files, load_dataset, load_mask, load_video_frames, Dataset, VideoRecord};
pub use mask::SilhouetteMask;
pub use synth::{generate_synthetic, FrameKind, SynthConfig, SyntheticDataset};
