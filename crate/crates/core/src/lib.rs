pub mod error;
pub mod eval_cli;
pub mod frame_selection;
pub mod shape_descriptor;
pub mod silhouette_io;
pub mod sparse_coding;
pub mod two_phase_model;

pub use error::{Error, Result};
