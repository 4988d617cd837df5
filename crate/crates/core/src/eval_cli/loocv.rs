use std::collections::BTreeMap;
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::silhouette_io::Dataset;
use crate::frame_selection::{partition_by_weights, selection_weights, FramePartition};
use crate::two_phase_model::{describe_videos, Pooling, TrainingSet, TwoPhaseParams, VideoDescriptors};

/// What a cross-validation fold holds out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FoldUnit {
    /// One video per fold.
    Video,
    /// All videos sharing the id prefix before the first `_`.
    Actor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPrediction {
    pub fold: usize,
    pub video_id: String,
    pub true_label: usize,
    pub predicted: usize,
    /// Pooled residuals of classes `1..=K`.
    pub pooled: Vec<f64>,
    pub filtered: usize,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub params: TwoPhaseParams,
    pub pooling: Pooling,
    pub fold_unit: FoldUnit,
    pub class_names: Vec<String>,
    pub accuracy: f64,
    /// `confusion[true - 1][predicted - 1]`.
    pub confusion: Vec<Vec<usize>>,
    /// Ordered by video position in the dataset.
    pub folds: Vec<FoldPrediction>,
    /// Shared by all cells of a grid search.
    pub wall_time_secs: f64,
}

impl EvalReport {
    pub fn num_folds(&self) -> usize {
        self.folds.iter().map(|f| f.fold + 1).max().unwrap_or(0)
    }
}

pub fn actor_of(video_id: &str) -> &str {
    video_id.split('_').next().unwrap_or(video_id)
}

/// Fold index of every video; folds are numbered in order of first appearance.
pub fn assign_folds(videos: &[&VideoDescriptors], unit: FoldUnit) -> Vec<usize> {
    match unit {
        FoldUnit::Video => (0..videos.len()).collect(),
        FoldUnit::Actor => {
            let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
            let mut next = 0;
            videos
                .iter()
                .map(|v| {
                    *seen.entry(actor_of(&v.id)).or_insert_with(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        }
    }
}

/// Leave-one-out evaluation on a loaded dataset with video folds.
pub fn loocv(dataset: &Dataset, params: &TwoPhaseParams, pooling: Pooling) -> Result<EvalReport> {
    params.validate()?;
    let described = describe_videos(&dataset.videos, params.descriptor())?;
    let refs: Vec<&VideoDescriptors> = described.iter().collect();
    loocv_described(&refs, &dataset.class_names, params, pooling, FoldUnit::Video)
}

/// Leave-one-out evaluation on precomputed descriptors. Fold `i` trains with
/// seed `params.seed + i`.
pub fn loocv_described(
    videos: &[&VideoDescriptors],
    class_names: &[String],
    params: &TwoPhaseParams,
    pooling: Pooling,
    unit: FoldUnit,
) -> Result<EvalReport> {
    let mut reports = evaluate_cells(videos, class_names, &[*params], pooling, unit)?;
    Ok(reports.remove(0))
}

/// Runs every cell over the same folds. Cells may differ only in rate and
/// sparsity, so the boosting weights of a fold are shared by all of them.
pub(crate) fn evaluate_cells(
    videos: &[&VideoDescriptors],
    class_names: &[String],
    cells: &[TwoPhaseParams],
    pooling: Pooling,
    unit: FoldUnit,
) -> Result<Vec<EvalReport>> {
    let Some(first) = cells.first() else {
        return Err(Error::param("nothing to evaluate"));
    };
    for cell in cells {
        cell.validate()?;
        let shared = TwoPhaseParams {
            rate: first.rate,
            sparsity: first.sparsity,
            ..*cell
        };
        if shared != *first {
            return Err(Error::param("grid cells may differ only in rate and sparsity"));
        }
    }
    let start = Instant::now();
    let k = class_names.len();
    if k < 2 {
        return Err(Error::input(format!("need at least 2 classes, got {k}")));
    }
    let mut per_class = vec![0usize; k + 1];
    for v in videos {
        if v.label == 0 || v.label > k {
            return Err(Error::input(format!("video {} has label {} outside 1..={k}", v.id, v.label)));
        }
        per_class[v.label] += 1;
    }
    if let Some(c) = (1..=k).find(|&c| per_class[c] < 2) {
        return Err(Error::input(format!(
            "class {} has {} video(s); leave-one-out needs at least 2",
            class_names[c - 1], per_class[c]
        )));
    }

    let fold_of = assign_folds(videos, unit);
    let num_folds = fold_of.iter().max().map_or(0, |m| m + 1);
    // results[fold][cell] = predictions of the held-out videos
    let results: Vec<Vec<Vec<(usize, FoldPrediction)>>> = (0..num_folds)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<&VideoDescriptors> = videos
                .iter()
                .zip(&fold_of)
                .filter(|(_, &f)| f != fold)
                .map(|(v, _)| *v)
                .collect();
            if let Some(c) = (1..=k).find(|&c| !train.iter().any(|v| v.label == c)) {
                return Err(Error::input(format!(
                    "fold {fold} leaves no training video of class {}",
                    class_names[c - 1]
                )));
            }
            let set = TrainingSet::new(&train, class_names)?;
            let weights = if first.zeroth {
                Some(selection_weights(set.x.view(), &set.labels, first.rounds)?)
            } else {
                None
            };
            cells
                .iter()
                .map(|cell| {
                    let partition = match &weights {
                        Some(w) => partition_by_weights(w, &set.labels, cell.rate)?,
                        None => FramePartition::all_discriminative(&set.labels)?,
                    };
                    let fold_params = TwoPhaseParams {
                        seed: cell.seed.wrapping_add(fold as u64),
                        ..*cell
                    };
                    let model = set.train_partitioned(&fold_params, &partition)?;
                    videos
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| fold_of[i] == fold)
                        .map(|(i, v)| {
                            let verdict = model.predict_descriptors(v.rows.view(), pooling)?;
                            Ok((
                                i,
                                FoldPrediction {
                                    fold,
                                    video_id: v.id.clone(),
                                    true_label: v.label,
                                    predicted: verdict.label,
                                    pooled: verdict.pooled,
                                    filtered: verdict.filtered,
                                    frames: verdict.frames,
                                },
                            ))
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let wall_time_secs = start.elapsed().as_secs_f64();
    let mut per_cell: Vec<Vec<(usize, FoldPrediction)>> = vec![Vec::new(); cells.len()];
    for fold in results {
        for (slot, preds) in per_cell.iter_mut().zip(fold) {
            slot.extend(preds);
        }
    }
    Ok(cells
        .iter()
        .zip(per_cell)
        .map(|(cell, mut folds)| {
            folds.sort_by_key(|(i, _)| *i);
            let folds: Vec<FoldPrediction> = folds.into_iter().map(|(_, f)| f).collect();
            let confusion = confusion_matrix(&folds, k);
            let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
            let accuracy = correct as f64 / folds.len() as f64;
            info!(
                "rate {} sparsity {}: {num_folds} folds, accuracy {accuracy:.4}",
                cell.rate, cell.sparsity
            );
            EvalReport {
                params: *cell,
                pooling,
                fold_unit: unit,
                class_names: class_names.to_vec(),
                accuracy,
                confusion,
                folds,
                wall_time_secs,
            }
        })
        .collect())
}

/// `confusion[true - 1][predicted - 1]` over `k` classes.
pub fn confusion_matrix(folds: &[FoldPrediction], k: usize) -> Vec<Vec<usize>> {
    let mut confusion = vec![vec![0usize; k]; k];
    for f in folds {
        confusion[f.true_label - 1][f.predicted - 1] += 1;
    }
    confusion
}
