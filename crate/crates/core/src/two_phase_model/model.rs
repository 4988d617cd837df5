use std::fs;
use std::path::Path;

use log::{debug, info};
use ndarray::{concatenate, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_selection::{partition_frames, FramePartition};
use crate::silhouette_io::Dataset;
use crate::sparse_coding::{ksvd_train, Dictionary, OmpCoder};

use super::features::{describe_videos, VideoDescriptors};
use super::params::TwoPhaseParams;

pub const MODEL_VERSION: u32 = 1;

/// First-phase dictionary `D` on descriptors plus the class dictionaries
/// `D_0..D_K` on error features and their concatenation.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseModel {
    params: TwoPhaseParams,
    class_names: Vec<String>,
    first_dict: Dictionary,
    /// Indexed by class, `0..=K`; only slot 0 may be empty.
    class_dicts: Vec<Option<Dictionary>>,
    concat_dict: Dictionary,
    /// Owning class of every column of `concat_dict`.
    atom_class: Vec<usize>,
}

impl TwoPhaseModel {
    pub fn from_parts(
        params: TwoPhaseParams,
        class_names: Vec<String>,
        first_dict: Dictionary,
        class_dicts: Vec<Option<Dictionary>>,
    ) -> Result<Self> {
        let k = class_names.len();
        if k < 2 {
            return Err(Error::input(format!("need at least 2 classes, got {k}")));
        }
        if class_dicts.len() != k + 1 {
            return Err(Error::input(format!(
                "expected {} class dictionaries (zeroth included), got {}",
                k + 1,
                class_dicts.len()
            )));
        }
        if let Some(c) = (1..=k).find(|&c| class_dicts[c].is_none()) {
            return Err(Error::input(format!("class {c} has no dictionary")));
        }
        let m = first_dict.num_atoms();
        let mut parts = Vec::new();
        let mut atom_class = Vec::new();
        for (c, d) in class_dicts.iter().enumerate() {
            if let Some(d) = d {
                if d.dim() != m {
                    return Err(Error::input(format!(
                        "class {c} dictionary has dimension {}, first phase has {m} atoms",
                        d.dim()
                    )));
                }
                parts.push(d);
                atom_class.extend(std::iter::repeat(c).take(d.num_atoms()));
            }
        }
        let concat_dict = Dictionary::concat(&parts)?;
        Ok(Self {
            params,
            class_names,
            first_dict,
            class_dicts,
            concat_dict,
            atom_class,
        })
    }

    pub fn params(&self) -> &TwoPhaseParams {
        &self.params
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn first_dict(&self) -> &Dictionary {
        &self.first_dict
    }

    pub fn class_dict(&self, class: usize) -> Option<&Dictionary> {
        self.class_dicts.get(class).and_then(Option::as_ref)
    }

    pub fn has_zeroth(&self) -> bool {
        self.class_dicts[0].is_some()
    }

    pub fn concat_dict(&self) -> &Dictionary {
        &self.concat_dict
    }

    pub fn atom_class(&self) -> &[usize] {
        &self.atom_class
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocOut {
            version: MODEL_VERSION,
            params: &self.params,
            class_names: &self.class_names,
            first_dict: &self.first_dict,
            class_dicts: &self.class_dicts,
            atom_class: &self.atom_class,
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocIn = serde_json::from_str(text)?;
        if doc.version != MODEL_VERSION {
            return Err(Error::Version {
                found: doc.version,
                expected: MODEL_VERSION,
            });
        }
        let model = Self::from_parts(doc.params, doc.class_names, doc.first_dict, doc.class_dicts)?;
        if model.atom_class != doc.atom_class {
            return Err(Error::input("atom class map does not match the class dictionaries"));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize)]
struct ModelDocOut<'a> {
    version: u32,
    params: &'a TwoPhaseParams,
    class_names: &'a [String],
    first_dict: &'a Dictionary,
    class_dicts: &'a [Option<Dictionary>],
    atom_class: &'a [usize],
}

#[derive(Deserialize)]
struct ModelDocIn {
    version: u32,
    params: TwoPhaseParams,
    class_names: Vec<String>,
    first_dict: Dictionary,
    class_dicts: Vec<Option<Dictionary>>,
    atom_class: Vec<usize>,
}

/// Describes every frame of `dataset`, then trains.
pub fn train(dataset: &Dataset, params: &TwoPhaseParams) -> Result<TwoPhaseModel> {
    params.validate()?;
    let described = describe_videos(&dataset.videos, params.descriptor())?;
    let refs: Vec<&VideoDescriptors> = described.iter().collect();
    train_on_descriptors(&refs, &dataset.class_names, params)
}

/// Training frames stacked as rows (`frames x L`) with per-frame labels.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

impl TrainingSet {
    /// Checks labels and that every class has at least 2 frames.
    pub fn new(videos: &[&VideoDescriptors], class_names: &[String]) -> Result<Self> {
        let k = class_names.len();
        if k < 2 {
            return Err(Error::input(format!("need at least 2 classes, got {k}")));
        }
        let views: Vec<ArrayView2<f64>> = videos.iter().map(|v| v.rows.view()).collect();
        if views.is_empty() {
            return Err(Error::input("no training videos"));
        }
        let x = concatenate(Axis(0), &views).map_err(|e| Error::input(format!("descriptor lengths differ: {e}")))?;
        let labels: Vec<usize> = videos
            .iter()
            .flat_map(|v| std::iter::repeat(v.label).take(v.num_frames()))
            .collect();
        if let Some(&bad) = labels.iter().find(|&&c| c == 0 || c > k) {
            return Err(Error::input(format!("label {bad} outside 1..={k}")));
        }
        let mut counts = vec![0usize; k + 1];
        labels.iter().for_each(|&c| counts[c] += 1);
        if let Some(c) = (1..=k).find(|&c| counts[c] < 2) {
            return Err(Error::input(format!(
                "class {} has {} training frames, need at least 2",
                class_names[c - 1], counts[c]
            )));
        }
        Ok(Self {
            x,
            labels,
            class_names: class_names.to_vec(),
        })
    }

    /// Boosting-driven partition, or all frames discriminative when the
    /// zeroth class is disabled.
    pub fn partition(&self, params: &TwoPhaseParams) -> Result<FramePartition> {
        if params.zeroth {
            partition_frames(self.x.view(), &self.labels, params.rate, params.rounds)
        } else {
            FramePartition::all_discriminative(&self.labels)
        }
    }

    /// Trains both phases on a given frame partition.
    pub fn train_partitioned(&self, params: &TwoPhaseParams, partition: &FramePartition) -> Result<TwoPhaseModel> {
        params.validate()?;
        if self.x.ncols() != params.length {
            return Err(Error::input(format!(
                "descriptors have length {}, parameters say {}",
                self.x.ncols(),
                params.length
            )));
        }
        let k = self.class_names.len();
        if partition.num_classes() != k {
            return Err(Error::input(format!("partition has {} classes, expected {k}", partition.num_classes())));
        }
        let disc = partition.discriminative_frames();
        debug!("{} discriminative frames, {} zeroth", disc.len(), partition.zeroth.len());

        // first phase: descriptors of discriminative frames as columns
        let signals = self.x.select(Axis(0), &disc).reversed_axes();
        let m = params.first_atoms_for(disc.len());
        let first_dict = ksvd_train(signals.view(), m, params.sparsity, params.ksvd_iterations, params.seed)?;

        let features = OmpCoder::new(&first_dict).error_feature_columns(self.x.t(), params.sparsity)?;

        let mut class_dicts = Vec::with_capacity(k + 1);
        for c in 0..=k {
            let members: &[usize] = if c == 0 { &partition.zeroth } else { &partition.discriminative[c - 1] };
            if members.is_empty() {
                class_dicts.push(None);
                continue;
            }
            let cols = features.select(Axis(1), members);
            let atoms = params.class_atoms_for(members.len());
            let seed = params.seed.wrapping_add(1 + c as u64);
            class_dicts.push(Some(ksvd_train(
                cols.view(),
                atoms,
                params.sparsity,
                params.ksvd_iterations,
                seed,
            )?));
        }
        info!(
            "trained on {} frames: first phase {} atoms, zeroth class {}",
            self.labels.len(),
            first_dict.num_atoms(),
            if class_dicts[0].is_some() { "present" } else { "absent" }
        );
        TwoPhaseModel::from_parts(*params, self.class_names.clone(), first_dict, class_dicts)
    }
}

/// Trains from precomputed descriptors (rows of length `params.length`).
pub fn train_on_descriptors(
    videos: &[&VideoDescriptors],
    class_names: &[String],
    params: &TwoPhaseParams,
) -> Result<TwoPhaseModel> {
    params.validate()?;
    let set = TrainingSet::new(videos, class_names)?;
    if set.x.ncols() != params.length {
        return Err(Error::input(format!(
            "descriptors have length {}, parameters say {}",
            set.x.ncols(),
            params.length
        )));
    }
    let partition = set.partition(params)?;
    set.train_partitioned(params, &partition)
}
