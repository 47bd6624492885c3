//! Tree learners, permutation importance and evaluation metrics.

mod boost;
mod classifier;
mod export;
mod importance;
mod metrics;
pub mod tree;

pub use boost::{clamp_clique_size, fit_gradient_boost, BoostConfig, GradientBoost};
pub use classifier::{
    balanced_class_weights, fit_decision_tree, ClassWeight, DecisionTree, TreeConfig,
};
pub use export::{export_tree, ExportFormat};
pub use importance::{permutation_importance, ranking, Metric, Predictor};
pub use metrics::{classification_metrics, rmse, ClassificationMetrics};
pub use tree::TreeNode;

use crate::error::{Error, Result};
use crate::features::{feature_index, FeatureRecord, Features, FEATURE_NAMES};

/// Feature matrix restricted to a named subset of the canonical columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub ids: Vec<u64>,
    pub solvable: Vec<bool>,
    pub clique_size: Vec<f64>,
}

impl Table {
    /// All canonical features except `exclude`.
    pub fn from_records(records: &[FeatureRecord], exclude: &[String]) -> Result<Table> {
        if let Some(bad) = exclude.iter().find(|n| feature_index(n).is_none()) {
            return Err(Error::MissingFeature(bad.clone()));
        }
        let names: Vec<String> = FEATURE_NAMES
            .iter()
            .filter(|n| !exclude.iter().any(|e| e == *n))
            .map(|n| n.to_string())
            .collect();
        Table::select(records, &names)
    }

    pub fn select(records: &[FeatureRecord], names: &[String]) -> Result<Table> {
        let cols = column_indices(names)?;
        Ok(Table {
            names: names.to_vec(),
            rows: records
                .iter()
                .map(|r| cols.iter().map(|&c| r.features.0[c]).collect())
                .collect(),
            ids: records.iter().map(|r| r.graph_id).collect(),
            solvable: records.iter().map(|r| r.solvable).collect(),
            clique_size: records
                .iter()
                .map(|r| r.annealer_clique_size as f64)
                .collect(),
        })
    }
}

fn column_indices(names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| feature_index(n).ok_or_else(|| Error::MissingFeature(n.clone())))
        .collect()
}

/// Values of `names` pulled out of a full feature vector.
pub fn row_for(features: &Features, names: &[String]) -> Result<Vec<f64>> {
    names.iter().map(|n| features.get(n)).collect()
}
