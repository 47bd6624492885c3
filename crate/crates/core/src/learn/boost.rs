use serde::{Deserialize, Serialize};

use super::tree::{check_matrix, grow, stable_mean, GrowParams, SquaredError, TreeNode};
use super::{row_for, Predictor};
use crate::error::{Error, Result};
use crate::features::Features;

pub const BOOST_FORMAT: &str = "qaprobe.gradient-boost.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub loss: String,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            n_stages: 200,
            learning_rate: 0.1,
            max_depth: 3,
            loss: "squared_error".into(),
            seed: 0,
        }
    }
}

/// `F(x) = init + learning_rate · Σ tree_s(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoost {
    pub format: String,
    pub config: BoostConfig,
    pub feature_names: Vec<String>,
    pub init: f64,
    pub trees: Vec<TreeNode>,
}

/// Least-squares boosting: each stage fits a regression tree to the current
/// residuals and adds it with shrinkage.
pub fn fit_gradient_boost(
    x: &[Vec<f64>],
    y: &[f64],
    feature_names: &[String],
    cfg: &BoostConfig,
) -> Result<GradientBoost> {
    if cfg.n_stages == 0
        || !(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)
        || cfg.max_depth == 0
    {
        return Err(Error::InvalidArgument(
            "boosting needs n_stages >= 1, learning_rate in (0, 1] and max_depth >= 1".into(),
        ));
    }
    if cfg.loss != "squared_error" {
        return Err(Error::InvalidArgument(format!(
            "unsupported loss {:?}",
            cfg.loss
        )));
    }
    if y.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 training records".into(),
        ));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite target".into()));
    }
    check_matrix(x, y.len(), feature_names.len())?;

    let init = stable_mean(y.iter().copied());
    let mut current = vec![init; y.len()];
    let idx: Vec<usize> = (0..y.len()).collect();
    let params = GrowParams {
        max_depth: cfg.max_depth,
        min_impurity_decrease: 0.0,
    };
    let mut trees = Vec::with_capacity(cfg.n_stages);
    for _ in 0..cfg.n_stages {
        let residuals: Vec<f64> = y.iter().zip(&current).map(|(t, f)| t - f).collect();
        let crit = SquaredError {
            targets: &residuals,
        };
        let tree = grow(&crit, x, &idx, 0, &params, y.len() as f64);
        for (f, row) in current.iter_mut().zip(x) {
            *f += cfg.learning_rate * tree.leaf_value(row)[0];
        }
        trees.push(tree);
    }
    Ok(GradientBoost {
        format: BOOST_FORMAT.into(),
        config: cfg.clone(),
        feature_names: feature_names.to_vec(),
        init,
        trees,
    })
}

impl GradientBoost {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_row_stages(row, self.trees.len())
    }

    /// Prediction using only the first `stages` trees.
    pub fn predict_row_stages(&self, row: &[f64], stages: usize) -> f64 {
        self.trees[..stages.min(self.trees.len())]
            .iter()
            .fold(self.init, |f, t| {
                f + self.config.learning_rate * t.leaf_value(row)[0]
            })
    }

    pub fn predict_regression(&self, features: &Features) -> Result<f64> {
        Ok(self.predict_row(&row_for(features, &self.feature_names)?))
    }
}

/// Rounds a raw prediction to a clique size in `[0, max]`.
pub fn clamp_clique_size(raw: f64, max: usize) -> usize {
    raw.round().clamp(0.0, max as f64) as usize
}

impl Predictor for GradientBoost {
    fn predict_value(&self, row: &[f64]) -> f64 {
        self.predict_row(row)
    }
}
