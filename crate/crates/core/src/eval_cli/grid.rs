use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::silhouette_io::Dataset;
use crate::two_phase_model::{describe_videos, Pooling, TwoPhaseParams, VideoDescriptors};

use super::loocv::{evaluate_cells, EvalReport, FoldUnit};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub rate: f64,
    pub sparsity: usize,
    pub report: EvalReport,
}

/// Grid search results, rate-major with both axes ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rates: Vec<f64>,
    pub sparsities: Vec<usize>,
    pub cells: Vec<GridCell>,
    /// Index of the most accurate cell; ties go to the smaller rate, then the smaller sparsity.
    pub best: usize,
}

impl SweepTable {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }

    /// `(swept value, accuracy)` rows of a one-dimensional sweep, or `None`
    /// when both axes vary.
    pub fn rows(&self) -> Option<Vec<(f64, f64)>> {
        if self.sparsities.len() == 1 {
            Some(self.cells.iter().map(|c| (c.rate, c.report.accuracy)).collect())
        } else if self.rates.len() == 1 {
            Some(self.cells.iter().map(|c| (c.sparsity as f64, c.report.accuracy)).collect())
        } else {
            None
        }
    }

    /// `param,accuracy` for a one-dimensional sweep, `rate,sparsity,accuracy`
    /// for a full grid.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match self.rows() {
            Some(rows) => {
                w.write_record(["param", "accuracy"])?;
                for (p, a) in rows {
                    w.write_record([p.to_string(), a.to_string()])?;
                }
            }
            None => {
                w.write_record(["rate", "sparsity", "accuracy"])?;
                for c in &self.cells {
                    w.write_record([c.rate.to_string(), c.sparsity.to_string(), c.report.accuracy.to_string()])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("writing sweep table", e))
    }
}

pub fn grid_search(
    dataset: &Dataset,
    base: &TwoPhaseParams,
    rates: &[f64],
    sparsities: &[usize],
    pooling: Pooling,
) -> Result<SweepTable> {
    base.validate()?;
    let described = describe_videos(&dataset.videos, base.descriptor())?;
    let refs: Vec<&VideoDescriptors> = described.iter().collect();
    grid_search_described(&refs, &dataset.class_names, base, rates, sparsities, pooling, FoldUnit::Video)
}

/// Leave-one-out evaluation of every `(rate, sparsity)` pair; other settings
/// come from `base`. Grid values are sorted and must be distinct.
pub fn grid_search_described(
    videos: &[&VideoDescriptors],
    class_names: &[String],
    base: &TwoPhaseParams,
    rates: &[f64],
    sparsities: &[usize],
    pooling: Pooling,
    unit: FoldUnit,
) -> Result<SweepTable> {
    if rates.is_empty() || sparsities.is_empty() {
        return Err(Error::param("grid axes must be nonempty"));
    }
    let mut rates = rates.to_vec();
    rates.sort_by(f64::total_cmp);
    let mut sparsities = sparsities.to_vec();
    sparsities.sort_unstable();
    if rates.windows(2).any(|w| w[0] == w[1]) || sparsities.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("grid values must be distinct"));
    }
    let params: Vec<TwoPhaseParams> = rates
        .iter()
        .flat_map(|&rate| sparsities.iter().map(move |&sparsity| TwoPhaseParams { rate, sparsity, ..*base }))
        .collect();
    let reports = evaluate_cells(videos, class_names, &params, pooling, unit)?;
    let cells: Vec<GridCell> = params
        .iter()
        .zip(reports)
        .map(|(p, report)| GridCell {
            rate: p.rate,
            sparsity: p.sparsity,
            report,
        })
        .collect();
    let mut best = 0;
    for (i, c) in cells.iter().enumerate() {
        if c.report.accuracy > cells[best].report.accuracy {
            best = i;
        }
    }
    Ok(SweepTable {
        rates,
        sparsities,
        cells,
        best,
    })
}
