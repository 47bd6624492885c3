use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{classification_metrics, rmse};
use crate::error::{Error, Result};
use crate::seed::{derive, rng, stream};

/// Anything that maps a feature row to a number: a class (0/1) or a
/// regression value.
pub trait Predictor {
    fn predict_value(&self, row: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Accuracy,
    BalancedAccuracy,
    Rmse,
}

impl Metric {
    /// Score oriented so that larger is better.
    fn score(self, truth: &[f64], pred: &[f64]) -> Result<f64> {
        match self {
            Metric::Rmse => Ok(-rmse(truth, pred)?),
            Metric::Accuracy | Metric::BalancedAccuracy => {
                let t: Vec<bool> = truth.iter().map(|&v| v >= 0.5).collect();
                let p: Vec<bool> = pred.iter().map(|&v| v >= 0.5).collect();
                let m = classification_metrics(&t, &p)?;
                Ok(if self == Metric::Accuracy {
                    m.accuracy
                } else {
                    m.balanced_accuracy
                })
            }
        }
    }
}

/// Mean drop in score when one column is shuffled, per column. A column the
/// model never reads scores exactly 0.
pub fn permutation_importance(
    model: &dyn Predictor,
    x: &[Vec<f64>],
    truth: &[f64],
    metric: Metric,
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    if x.len() != truth.len() || x.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {} truth values",
            x.len(),
            truth.len()
        )));
    }
    let predict =
        |rows: &[Vec<f64>]| -> Vec<f64> { rows.iter().map(|r| model.predict_value(r)).collect() };
    let baseline = metric.score(truth, &predict(x))?;
    let num_features = x[0].len();
    let mut shuffled = x.to_vec();
    let mut out = Vec::with_capacity(num_features);
    for f in 0..num_features {
        let mut total = 0.0;
        for rep in 0..repeats {
            let mut col: Vec<f64> = x.iter().map(|r| r[f]).collect();
            col.shuffle(&mut rng(derive(
                seed,
                &[stream::PERMUTE, f as u64, rep as u64],
            )));
            for (row, v) in shuffled.iter_mut().zip(col) {
                row[f] = v;
            }
            total += baseline - metric.score(truth, &predict(&shuffled))?;
        }
        for (row, orig) in shuffled.iter_mut().zip(x) {
            row[f] = orig[f];
        }
        out.push(total / repeats as f64);
    }
    Ok(out)
}

/// Column indices by importance, largest first; ties by index.
pub fn ranking(importances: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..importances.len()).collect();
    order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    struct FirstColumn;
    impl Predictor for FirstColumn {
        fn predict_value(&self, row: &[f64]) -> f64 {
            f64::from(row[0] > 0.5)
        }
    }

    #[test]
    fn unused_column_scores_zero() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![(i % 2) as f64, i as f64]).collect();
        let truth: Vec<f64> = x.iter().map(|r| r[0]).collect();
        for metric in [Metric::Accuracy, Metric::BalancedAccuracy] {
            let imp = permutation_importance(&FirstColumn, &x, &truth, metric, 5, 9).unwrap();
            assert_eq!(imp[1], 0.0);
            assert!(imp[0] > 0.2);
            assert_eq!(ranking(&imp), vec![0, 1]);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![((i * 7) % 3) as f64 / 2.0]).collect();
        let truth: Vec<f64> = (0..30).map(|i| (i % 2) as f64).collect();
        let a = permutation_importance(&FirstColumn, &x, &truth, Metric::Rmse, 3, 1).unwrap();
        let b = permutation_importance(&FirstColumn, &x, &truth, Metric::Rmse, 3, 1).unwrap();
        assert_eq!(a, b);
        assert!(permutation_importance(&FirstColumn, &x, &truth, Metric::Rmse, 0, 1).is_err());
    }
}
