use serde::{Deserialize, Serialize};

use super::tree::{check_matrix, grow, Gini, GrowParams, TreeNode};
use super::{row_for, Predictor};
use crate::error::{Error, Result};
use crate::features::Features;

pub const TREE_FORMAT: &str = "qaprobe.decision-tree.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeight {
    Balanced,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_impurity_decrease: f64,
    pub class_weight: ClassWeight,
    /// Fitting is deterministic; kept so documents echo the run's seed.
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 5,
            min_impurity_decrease: 0.005,
            class_weight: ClassWeight::Balanced,
            seed: 0,
        }
    }
}

/// Per-class weights `N / (2 · N_c)`, indexed `[not solvable, solvable]`.
pub fn balanced_class_weights(labels: &[bool]) -> Result<[f64; 2]> {
    let n = labels.len() as f64;
    let pos = labels.iter().filter(|&&l| l).count() as f64;
    let neg = n - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(Error::InvalidArgument(
            "balanced class weights need both classes".into(),
        ));
    }
    Ok([n / (2.0 * neg), n / (2.0 * pos)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub format: String,
    pub config: TreeConfig,
    pub feature_names: Vec<String>,
    pub class_weights: [f64; 2],
    pub root: TreeNode,
}

pub fn fit_decision_tree(
    x: &[Vec<f64>],
    labels: &[bool],
    feature_names: &[String],
    cfg: &TreeConfig,
) -> Result<DecisionTree> {
    if cfg.max_depth == 0 || !(cfg.min_impurity_decrease >= 0.0) {
        return Err(Error::InvalidArgument(
            "tree needs max_depth >= 1 and min_impurity_decrease >= 0".into(),
        ));
    }
    if labels.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 training records".into(),
        ));
    }
    check_matrix(x, labels.len(), feature_names.len())?;
    let class_weights = match cfg.class_weight {
        ClassWeight::Balanced => balanced_class_weights(labels)?,
        ClassWeight::Uniform => {
            if labels.iter().all(|&l| l == labels[0]) {
                return Err(Error::InvalidArgument(
                    "training data has a single class".into(),
                ));
            }
            [1.0, 1.0]
        }
    };
    let classes: Vec<usize> = labels.iter().map(|&l| usize::from(l)).collect();
    let weights: Vec<f64> = classes.iter().map(|&c| class_weights[c]).collect();
    let crit = Gini {
        labels: &classes,
        weights: &weights,
    };
    let params = GrowParams {
        max_depth: cfg.max_depth,
        min_impurity_decrease: cfg.min_impurity_decrease,
    };
    let idx: Vec<usize> = (0..labels.len()).collect();
    let total: f64 = weights.iter().sum();
    Ok(DecisionTree {
        format: TREE_FORMAT.into(),
        config: cfg.clone(),
        feature_names: feature_names.to_vec(),
        class_weights,
        root: grow(&crit, x, &idx, 0, &params, total),
    })
}

impl DecisionTree {
    /// Predicted class and the leaf's weighted mass fraction for it.
    pub fn predict_row(&self, row: &[f64]) -> (bool, f64) {
        let mass = self.root.leaf_value(row);
        let total = mass[0] + mass[1];
        let solvable = mass[1] > mass[0];
        let share = if solvable { mass[1] } else { mass[0] };
        (solvable, if total > 0.0 { share / total } else { 0.0 })
    }

    pub fn predict_class(&self, features: &Features) -> Result<(bool, f64)> {
        Ok(self.predict_row(&row_for(features, &self.feature_names)?))
    }
}

impl Predictor for DecisionTree {
    fn predict_value(&self, row: &[f64]) -> f64 {
        if self.predict_row(row).0 {
            1.0
        } else {
            0.0
        }
    }
}
