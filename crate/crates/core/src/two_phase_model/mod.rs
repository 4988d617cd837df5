//! Zeroth-class two-phase dictionary model: training and classification.

mod classify;
mod features;
mod model;
mod params;
#[cfg(test)]
mod tests;

pub use classify::{classify_frame, classify_video, pool_verdicts, FrameVerdict, Pooling, VideoVerdict};
pub use features::{describe_frames, describe_video, describe_videos, VideoDescriptors};
pub use model::{train, train_on_descriptors, TrainingSet, TwoPhaseModel, MODEL_VERSION};
pub use params::{TwoPhaseParams, DEFAULT_RATE, DEFAULT_SPARSITY, MAX_CLASS_ATOMS, MAX_FIRST_ATOMS};
