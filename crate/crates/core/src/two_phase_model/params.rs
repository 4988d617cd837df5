use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame_selection::DEFAULT_ROUNDS;
use crate::shape_descriptor::{DescriptorParams, DEFAULT_LENGTH, DEFAULT_ORDER};
use crate::sparse_coding::DEFAULT_KSVD_ITERATIONS;

pub const DEFAULT_SPARSITY: usize = 15;
pub const DEFAULT_RATE: f64 = 0.2;
pub const MAX_FIRST_ATOMS: usize = 256;
pub const MAX_CLASS_ATOMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseParams {
    /// Contour resampling length `L`.
    pub length: usize,
    /// Fractional order `p`.
    pub order: f64,
    /// OMP sparsity `C`, shared by both phases.
    pub sparsity: usize,
    /// Fraction `R` of each class kept as discriminative.
    pub rate: f64,
    /// First-phase atoms; `None` means `min(256, n_disc / 2)`.
    pub first_atoms: Option<usize>,
    /// Atoms per class dictionary; `None` means `min(32, n_k / 2)`.
    pub class_atoms: Option<usize>,
    /// Boosting rounds `T`.
    pub rounds: usize,
    pub ksvd_iterations: usize,
    pub seed: u64,
    /// When false every training frame is discriminative and no `D_0` is built.
    pub zeroth: bool,
}

impl Default for TwoPhaseParams {
    fn default() -> Self {
        Self {
            length: DEFAULT_LENGTH,
            order: DEFAULT_ORDER,
            sparsity: DEFAULT_SPARSITY,
            rate: DEFAULT_RATE,
            first_atoms: None,
            class_atoms: None,
            rounds: DEFAULT_ROUNDS,
            ksvd_iterations: DEFAULT_KSVD_ITERATIONS,
            seed: 0,
            zeroth: true,
        }
    }
}

impl TwoPhaseParams {
    pub fn descriptor(&self) -> DescriptorParams {
        DescriptorParams {
            length: self.length,
            order: self.order,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 3 {
            return Err(Error::param(format!("length must be at least 3, got {}", self.length)));
        }
        if !self.order.is_finite() {
            return Err(Error::param("order must be finite"));
        }
        if self.sparsity == 0 {
            return Err(Error::param("sparsity must be at least 1"));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::param(format!("rate must be in (0, 1], got {}", self.rate)));
        }
        if self.first_atoms == Some(0) || self.class_atoms == Some(0) {
            return Err(Error::param("atom counts must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::param("rounds must be at least 1"));
        }
        if self.ksvd_iterations == 0 {
            return Err(Error::param("K-SVD iterations must be at least 1"));
        }
        Ok(())
    }

    pub fn first_atoms_for(&self, n_disc: usize) -> usize {
        self.first_atoms.unwrap_or((n_disc / 2).min(MAX_FIRST_ATOMS)).max(1)
    }

    pub fn class_atoms_for(&self, n_k: usize) -> usize {
        self.class_atoms.unwrap_or((n_k / 2).min(MAX_CLASS_ATOMS)).clamp(1, n_k.max(1))
    }
}
