use ndarray::{ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative score margin a later candidate needs to displace the current best;
/// candidates inducing the same split differ only by rounding.
const TIE_TOL: f64 = 1e-12;

/// Regression stump `f(x) = w * sign(x[k] - th) + v`, with `sign(0) = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub slope: f64,
    pub offset: f64,
}

impl Stump {
    #[inline]
    pub fn predict(&self, x: ArrayView1<f64>) -> f64 {
        self.predict_value(x[self.feature])
    }

    #[inline]
    pub fn predict_value(&self, value: f64) -> f64 {
        let s = if value > self.threshold { 1.0 } else { -1.0 };
        self.slope * s + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StumpFit {
    pub stump: Stump,
    /// Weighted squared error `sum w_i (t_i - f(x_i))^2`.
    pub error: f64,
}

/// Per-feature sample orderings, reusable across boosting rounds.
#[derive(Debug, Clone)]
pub struct SortedFeatures {
    /// `order[k]` lists sample indices by ascending value of feature `k`
    /// (ties by sample index).
    order: Vec<Vec<usize>>,
    values: Vec<Vec<f64>>,
}

impl SortedFeatures {
    pub fn new(x: ArrayView2<f64>) -> Self {
        let mut order = Vec::with_capacity(x.ncols());
        let mut values = Vec::with_capacity(x.ncols());
        for col in x.axis_iter(Axis(1)) {
            let mut idx: Vec<usize> = (0..col.len()).collect();
            idx.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            values.push(idx.iter().map(|&i| col[i]).collect());
            order.push(idx);
        }
        Self { order, values }
    }

    pub fn num_features(&self) -> usize {
        self.order.len()
    }
}

pub(crate) fn validate_problem(n: usize, targets: &[f64], weights: &[f64]) -> Result<()> {
    if n < 2 {
        return Err(Error::input(format!("need at least 2 samples, got {n}")));
    }
    if targets.len() != n || weights.len() != n {
        return Err(Error::input(format!(
            "{n} samples but {} targets and {} weights",
            targets.len(),
            weights.len()
        )));
    }
    if targets.iter().any(|&t| t != 1.0 && t != -1.0) {
        return Err(Error::input("targets must be +1 or -1"));
    }
    if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::input("weights must be positive"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::input(format!("weights must sum to 1, got {total}")));
    }
    Ok(())
}

/// Weighted least-squares regression stump.
///
/// Candidate thresholds are midpoints between consecutive distinct values of
/// each feature. For a split, the constants above and below are the weighted
/// target means `m+` and `m-`, i.e. `w = (m+ - m-)/2`, `v = (m+ + m-)/2`. Error
/// ties go to the lowest feature, then the lowest threshold.
pub fn fit_stump(x: ArrayView2<f64>, targets: &[f64], weights: &[f64]) -> Result<StumpFit> {
    validate_problem(x.nrows(), targets, weights)?;
    if x.ncols() == 0 {
        return Err(Error::input("need at least one feature"));
    }
    Ok(fit_stump_sorted(x, &SortedFeatures::new(x), targets, weights))
}

/// `fit_stump` with precomputed orderings; inputs are assumed valid.
pub fn fit_stump_sorted(x: ArrayView2<f64>, sorted: &SortedFeatures, targets: &[f64], weights: &[f64]) -> StumpFit {
    let total_w: f64 = weights.iter().sum();
    let total_s: f64 = weights.iter().zip(targets).map(|(w, t)| w * t).sum();

    // error = sum w t^2 - (S-^2/W- + S+^2/W+), so maximize the bracket
    // (score, feature, threshold, m-, m+)
    let mut best: Option<(f64, usize, f64, f64, f64)> = None;
    for (k, (order, vals)) in sorted.order.iter().zip(&sorted.values).enumerate() {
        let mut wl = 0.0;
        let mut sl = 0.0;
        for p in 0..order.len() - 1 {
            let i = order[p];
            wl += weights[i];
            sl += weights[i] * targets[i];
            if vals[p] == vals[p + 1] {
                continue;
            }
            let wr = total_w - wl;
            let sr = total_s - sl;
            let score = sl * sl / wl + sr * sr / wr;
            if best.map_or(true, |(b, ..)| score > b + TIE_TOL * b.abs()) {
                let th = vals[p] + (vals[p + 1] - vals[p]) / 2.0;
                best = Some((score, k, th, sl / wl, sr / wr));
            }
        }
    }

    let stump = match best {
        Some((_, k, th, below, above)) => Stump {
            feature: k,
            threshold: th,
            slope: (above - below) / 2.0,
            offset: (above + below) / 2.0,
        },
        // every feature constant: a single weighted mean
        None => Stump {
            feature: 0,
            threshold: f64::INFINITY,
            slope: 0.0,
            offset: total_s / total_w,
        },
    };
    StumpFit {
        error: weighted_error(x, &stump, targets, weights),
        stump,
    }
}

pub fn weighted_error(x: ArrayView2<f64>, stump: &Stump, targets: &[f64], weights: &[f64]) -> f64 {
    x.axis_iter(Axis(0))
        .zip(targets.iter().zip(weights))
        .map(|(row, (&t, &w))| {
            let d = t - stump.predict(row);
            w * d * d
        })
        .sum()
}
