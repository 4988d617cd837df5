mod boost;
mod partition;
mod stump;

pub use boost::{gentle_boost, BoostModel, DEFAULT_ROUNDS};
pub use partition::{discriminative_count, partition_by_weights, partition_frames, selection_weights, write_partition_csv, FramePartition, FrameRef};
pub use stump::{fit_stump, fit_stump_sorted, weighted_error, SortedFeatures, Stump, StumpFit};
