use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse_coding::{squared_distance, ErrorFeature, OmpCoder};

use super::model::TwoPhaseModel;

/// Video-level vote over per-frame class residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    /// Class of the smallest residual over all frames.
    Max,
    /// Class with the smallest residual total.
    Sum,
}

impl FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Self::Max),
            "sum" => Ok(Self::Sum),
            other => Err(Error::param(format!("pooling must be max or sum, got {other}"))),
        }
    }
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Max => "max",
            Self::Sum => "sum",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameVerdict {
    /// `r_0..r_K`; `r_0` is infinite when the model has no zeroth class.
    pub residuals: Vec<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoVerdict {
    /// Predicted class in `1..=K`.
    pub label: usize,
    /// Pooled residual of classes `1..=K`.
    pub pooled: Vec<f64>,
    /// Frames labelled zeroth and left out of the vote.
    pub filtered: usize,
    pub frames: usize,
}

fn argmin(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn frame_verdict(coder: &OmpCoder, model: &TwoPhaseModel, x: &ErrorFeature) -> Result<FrameVerdict> {
    let code = coder.encode(x.view(), model.params().sparsity)?;
    let map = model.atom_class();
    let residuals: Vec<f64> = (0..=model.num_classes())
        .map(|c| {
            if c == 0 && !model.has_zeroth() {
                return f64::INFINITY;
            }
            let rec = code.reconstruct_where(model.concat_dict(), |j| map[j] == c);
            squared_distance(x.view(), rec.view())
        })
        .collect();
    Ok(FrameVerdict {
        label: argmin(residuals.iter().copied()),
        residuals,
    })
}

/// Combines frame verdicts into a video label. With `filter_zeroth`, frames
/// labelled 0 are left out unless every frame is.
pub fn pool_verdicts(verdicts: &[FrameVerdict], num_classes: usize, pooling: Pooling, filter_zeroth: bool) -> Result<VideoVerdict> {
    if verdicts.is_empty() {
        return Err(Error::input("cannot classify a video without frames"));
    }
    if let Some(v) = verdicts.iter().find(|v| v.residuals.len() != num_classes + 1) {
        return Err(Error::input(format!(
            "frame verdict has {} residuals, expected {}",
            v.residuals.len(),
            num_classes + 1
        )));
    }
    let filtered = verdicts.iter().filter(|v| v.label == 0).count();
    let voters: Vec<&FrameVerdict> = if filter_zeroth && filtered < verdicts.len() {
        verdicts.iter().filter(|v| v.label != 0).collect()
    } else {
        verdicts.iter().collect()
    };
    let pooled: Vec<f64> = (1..=num_classes)
        .map(|c| {
            let r = voters.iter().map(|v| v.residuals[c]);
            match pooling {
                Pooling::Max => r.fold(f64::INFINITY, f64::min),
                Pooling::Sum => r.sum(),
            }
        })
        .collect();
    Ok(VideoVerdict {
        label: 1 + argmin(pooled.iter().copied()),
        pooled,
        filtered,
        frames: verdicts.len(),
    })
}

impl TwoPhaseModel {
    /// Error features of descriptor rows (`frames x L`) against `D`.
    pub fn error_features(&self, descriptors: ArrayView2<f64>) -> Result<Vec<ErrorFeature>> {
        let coder = OmpCoder::new(self.first_dict());
        descriptors
            .rows()
            .into_iter()
            .map(|row| coder.error_features(row, self.params().sparsity))
            .collect()
    }

    pub fn classify_frame(&self, x: &ErrorFeature) -> Result<FrameVerdict> {
        frame_verdict(&OmpCoder::new(self.concat_dict()), self, x)
    }

    pub fn frame_verdicts(&self, frames: &[ErrorFeature]) -> Result<Vec<FrameVerdict>> {
        let coder = OmpCoder::new(self.concat_dict());
        frames.iter().map(|x| frame_verdict(&coder, self, x)).collect()
    }

    pub fn classify_video(&self, frames: &[ErrorFeature], pooling: Pooling) -> Result<VideoVerdict> {
        let verdicts = self.frame_verdicts(frames)?;
        pool_verdicts(&verdicts, self.num_classes(), pooling, true)
    }

    /// Full test path from descriptor rows to a video label.
    pub fn predict_descriptors(&self, descriptors: ArrayView2<f64>, pooling: Pooling) -> Result<VideoVerdict> {
        if descriptors.ncols() != self.params().length {
            return Err(Error::input(format!(
                "descriptors have length {}, model expects {}",
                descriptors.ncols(),
                self.params().length
            )));
        }
        self.classify_video(&self.error_features(descriptors)?, pooling)
    }
}

pub fn classify_frame(x: &ErrorFeature, model: &TwoPhaseModel) -> Result<FrameVerdict> {
    model.classify_frame(x)
}

pub fn classify_video(frames: &[ErrorFeature], model: &TwoPhaseModel, pooling: Pooling) -> Result<VideoVerdict> {
    model.classify_video(frames, pooling)
}
