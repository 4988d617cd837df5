use log::warn;
use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::shape_descriptor::{Describer, DescriptorParams};
use crate::silhouette_io::{trace_contour, SilhouetteMask, VideoRecord};

/// Descriptors of one video, one row per usable frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoDescriptors {
    pub id: String,
    pub label: usize,
    /// Original frame positions of the rows.
    pub frame_index: Vec<usize>,
    /// `frames x L`.
    pub rows: Array2<f64>,
}

impl VideoDescriptors {
    pub fn num_frames(&self) -> usize {
        self.rows.nrows()
    }
}

fn describe_masks(describer: &Describer, id: &str, frames: &[SilhouetteMask]) -> Result<(Vec<usize>, Array2<f64>)> {
    let length = describer.params().length;
    let mut index = Vec::with_capacity(frames.len());
    let mut flat = Vec::with_capacity(frames.len() * length);
    for (i, mask) in frames.iter().enumerate() {
        let described = trace_contour(mask).and_then(|c| describer.describe(&c));
        match described {
            Ok(d) => {
                index.push(i);
                flat.extend_from_slice(d.values());
            }
            Err(e) => warn!("{id} frame {i}: skipped ({e})"),
        }
    }
    if index.is_empty() {
        return Err(Error::input(format!("video {id} has no describable frames")));
    }
    let rows = Array2::from_shape_vec((index.len(), length), flat).expect("row count matches");
    Ok((index, rows))
}

/// Traces and describes every frame; frames that cannot be traced are skipped.
pub fn describe_video(video: &VideoRecord, params: DescriptorParams) -> Result<VideoDescriptors> {
    let describer = Describer::new(params)?;
    let (frame_index, rows) = describe_masks(&describer, &video.id, &video.frames)?;
    Ok(VideoDescriptors {
        id: video.id.clone(),
        label: video.class_label,
        frame_index,
        rows,
    })
}

pub fn describe_videos(videos: &[VideoRecord], params: DescriptorParams) -> Result<Vec<VideoDescriptors>> {
    Describer::new(params)?;
    videos.par_iter().map(|v| describe_video(v, params)).collect()
}

/// Unlabelled frames (for prediction), described the same way.
pub fn describe_frames(id: &str, frames: &[SilhouetteMask], params: DescriptorParams) -> Result<Array2<f64>> {
    let describer = Describer::new(params)?;
    Ok(describe_masks(&describer, id, frames)?.1)
}
