//! Cross-validation, grid search, report output and the command-line front end.

mod grid;
mod loocv;
mod output;
mod threads;

pub use grid::{grid_search, grid_search_described, GridCell, SweepTable};
pub use loocv::{actor_of, assign_folds, confusion_matrix, loocv, loocv_described, EvalReport, FoldPrediction, FoldUnit};
pub use output::{accuracy_of, read_predictions_csv, write_confusion_csv, write_predictions_csv, write_report_json};
pub use threads::{thread_pool, THREADS_VAR};
