use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::stump::{fit_stump_sorted, validate_problem, SortedFeatures, Stump};

pub const DEFAULT_ROUNDS: usize = 100;

/// Gentle AdaBoost ensemble and the sample weights it ends with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub stumps: Vec<Stump>,
    /// Normalized, strictly positive.
    pub final_weights: Vec<f64>,
    /// Mean exponential loss `mean_i exp(-y_i F(x_i))` after each round.
    pub loss_history: Vec<f64>,
}

impl BoostModel {
    pub fn rounds(&self) -> usize {
        self.stumps.len()
    }

    pub fn score(&self, x: ArrayView1<f64>) -> f64 {
        self.stumps.iter().map(|s| s.predict(x)).sum()
    }

    /// Fraction of rows whose score sign disagrees with the label.
    pub fn training_error(&self, x: ArrayView2<f64>, labels: &[f64]) -> f64 {
        let wrong = x
            .rows()
            .into_iter()
            .zip(labels)
            .filter(|(row, &y)| self.score(*row) * y <= 0.0)
            .count();
        wrong as f64 / labels.len() as f64
    }
}

/// Gentle AdaBoost with regression stumps on rows of `x` (`n x dim`) and
/// `+-1` labels. Weights start uniform; each round fits a stump by weighted
/// least squares, multiplies `w_i` by `exp(-y_i f(x_i))` and renormalizes.
pub fn gentle_boost(x: ArrayView2<f64>, labels: &[f64], rounds: usize) -> Result<BoostModel> {
    let n = x.nrows();
    let uniform = vec![1.0 / n.max(1) as f64; n];
    validate_problem(n, labels, &uniform)?;
    if rounds == 0 {
        return Err(Error::param("boosting needs at least one round"));
    }
    if x.ncols() == 0 {
        return Err(Error::input("need at least one feature"));
    }
    let sorted = SortedFeatures::new(x);
    Ok(boost_sorted(x, &sorted, labels, rounds))
}

pub(crate) fn boost_sorted(x: ArrayView2<f64>, sorted: &SortedFeatures, labels: &[f64], rounds: usize) -> BoostModel {
    let n = x.nrows();
    let mut weights = vec![1.0 / n as f64; n];
    let mut margin = vec![0.0; n];
    let mut stumps = Vec::with_capacity(rounds);
    let mut loss_history = Vec::with_capacity(rounds);

    for _ in 0..rounds {
        let fit = fit_stump_sorted(x, sorted, labels, &weights);
        let stump = fit.stump;
        for i in 0..n {
            let f = stump.predict_value(x[[i, stump.feature]]);
            margin[i] += labels[i] * f;
            weights[i] *= (-labels[i] * f).exp();
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        // guard against underflow; keeps weights strictly positive
        if weights.iter().any(|&w| !(w > 0.0)) {
            let floor = f64::MIN_POSITIVE;
            weights.iter_mut().for_each(|w| *w = w.max(floor));
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
        }
        loss_history.push(margin.iter().map(|m| (-m).exp()).sum::<f64>() / n as f64);
        stumps.push(stump);
    }

    BoostModel {
        stumps,
        final_weights: weights,
        loss_history,
    }
}
