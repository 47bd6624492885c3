//! CART trees: weighted-Gini classification and squared-error regression.
//!
//! Splits are chosen greedily. Candidate thresholds are midpoints between
//! consecutive distinct values in the node; ties on impurity decrease go to
//! the lowest feature index, then the lowest threshold, so fitting is fully
//! deterministic. Samples with `value <= threshold` go left (the "true" branch).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Impurity decreases below this fraction of the node's own weighted impurity
/// are rounding noise, not structure.
const RELATIVE_GAIN_FLOOR: f64 = 1e-12;
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        impurity: f64,
        samples: usize,
        weighted_samples: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Class masses `[not solvable, solvable]` for classifiers, `[mean]`
        /// for regressors.
        value: Vec<f64>,
        impurity: f64,
        samples: usize,
        weighted_samples: f64,
    },
}

impl TreeNode {
    pub fn leaf_value(&self, row: &[f64]) -> &[f64] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if row[*feature] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
                TreeNode::Leaf { value, .. } => return value,
            }
        }
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeNode::Leaf { .. } => 0,
        }
    }

    pub fn num_leaves(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => left.num_leaves() + right.num_leaves(),
            TreeNode::Leaf { .. } => 1,
        }
    }

    /// Features tested anywhere in the tree.
    pub fn used_features(&self, out: &mut Vec<usize>) {
        if let TreeNode::Split {
            feature,
            left,
            right,
            ..
        } = self
        {
            out.push(*feature);
            left.used_features(out);
            right.used_features(out);
        }
    }

    pub fn impurity(&self) -> f64 {
        match self {
            TreeNode::Split { impurity, .. } | TreeNode::Leaf { impurity, .. } => *impurity,
        }
    }

    pub fn weighted_samples(&self) -> f64 {
        match self {
            TreeNode::Split {
                weighted_samples, ..
            }
            | TreeNode::Leaf {
                weighted_samples, ..
            } => *weighted_samples,
        }
    }
}

/// Node statistics for one split criterion.
pub(crate) trait Criterion {
    type Acc: Clone;

    fn empty(&self) -> Self::Acc;
    fn add(&self, acc: &mut Self::Acc, i: usize);
    fn weight(&self, acc: &Self::Acc) -> f64;
    fn impurity(&self, acc: &Self::Acc) -> f64;
    fn is_pure(&self, idx: &[usize]) -> bool;
    fn leaf_value(&self, idx: &[usize], acc: &Self::Acc) -> Vec<f64>;
}

/// Weighted Gini impurity over two classes.
pub(crate) struct Gini<'a> {
    pub labels: &'a [usize],
    pub weights: &'a [f64],
}

impl Criterion for Gini<'_> {
    type Acc = [f64; 2];

    fn empty(&self) -> [f64; 2] {
        [0.0; 2]
    }

    fn add(&self, acc: &mut [f64; 2], i: usize) {
        acc[self.labels[i]] += self.weights[i];
    }

    fn weight(&self, acc: &[f64; 2]) -> f64 {
        acc[0] + acc[1]
    }

    fn impurity(&self, acc: &[f64; 2]) -> f64 {
        let w = acc[0] + acc[1];
        if w <= 0.0 {
            return 0.0;
        }
        let (p0, p1) = (acc[0] / w, acc[1] / w);
        1.0 - p0 * p0 - p1 * p1
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        idx.iter().all(|&i| self.labels[i] == self.labels[idx[0]])
    }

    fn leaf_value(&self, _idx: &[usize], acc: &[f64; 2]) -> Vec<f64> {
        acc.to_vec()
    }
}

/// Mean squared error around the node mean, unit weights.
pub(crate) struct SquaredError<'a> {
    pub targets: &'a [f64],
}

/// `[count, Σ y, Σ y²]`.
type Moments = [f64; 3];

impl Criterion for SquaredError<'_> {
    type Acc = Moments;

    fn empty(&self) -> Moments {
        [0.0; 3]
    }

    fn add(&self, acc: &mut Moments, i: usize) {
        let y = self.targets[i];
        acc[0] += 1.0;
        acc[1] += y;
        acc[2] += y * y;
    }

    fn weight(&self, acc: &Moments) -> f64 {
        acc[0]
    }

    fn impurity(&self, acc: &Moments) -> f64 {
        if acc[0] == 0.0 {
            return 0.0;
        }
        let mean = acc[1] / acc[0];
        (acc[2] / acc[0] - mean * mean).max(0.0)
    }

    fn is_pure(&self, idx: &[usize]) -> bool {
        idx.iter().all(|&i| self.targets[i] == self.targets[idx[0]])
    }

    fn leaf_value(&self, idx: &[usize], _acc: &Moments) -> Vec<f64> {
        vec![stable_mean(idx.iter().map(|&i| self.targets[i]))]
    }
}

/// Mean computed as offsets from the first value, exact for constant input.
pub(crate) fn stable_mean(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else {
        return 0.0;
    };
    let n = values.clone().count() as f64;
    first + values.map(|v| v - first).sum::<f64>() / n
}

pub(crate) struct GrowParams {
    pub max_depth: usize,
    pub min_impurity_decrease: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

/// Best split of the samples `idx`, if any has positive decrease.
pub(crate) fn best_split<C: Criterion>(
    crit: &C,
    x: &[Vec<f64>],
    idx: &[usize],
    total_weight: f64,
) -> Option<SplitChoice> {
    let num_features = x.first().map_or(0, Vec::len);
    let mut node = crit.empty();
    idx.iter().for_each(|&i| crit.add(&mut node, i));
    let w_node = crit.weight(&node);
    let imp_node = crit.impurity(&node);
    let floor = RELATIVE_GAIN_FLOOR * imp_node * w_node / total_weight;

    let mut best: Option<SplitChoice> = None;
    let mut sorted = idx.to_vec();
    let mut suffix = vec![crit.empty(); idx.len()];
    for f in 0..num_features {
        sorted.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut acc = crit.empty();
        for k in (0..sorted.len()).rev() {
            crit.add(&mut acc, sorted[k]);
            suffix[k] = acc.clone();
        }
        let mut left = crit.empty();
        for k in 0..sorted.len() - 1 {
            crit.add(&mut left, sorted[k]);
            let (lo, hi) = (x[sorted[k]][f], x[sorted[k + 1]][f]);
            if lo == hi {
                continue;
            }
            let right = &suffix[k + 1];
            let (wl, wr) = (crit.weight(&left), crit.weight(right));
            let decrease = w_node / total_weight
                * (imp_node
                    - wl / w_node * crit.impurity(&left)
                    - wr / w_node * crit.impurity(right));
            if decrease <= floor {
                continue;
            }
            // near-equal decreases count as ties so the earlier candidate wins
            if best.is_none_or(|b| decrease > b.decrease * (1.0 + TIE_TOLERANCE)) {
                let mut threshold = lo / 2.0 + hi / 2.0;
                if threshold >= hi || !threshold.is_finite() {
                    threshold = lo;
                }
                best = Some(SplitChoice {
                    feature: f,
                    threshold,
                    decrease,
                });
            }
        }
    }
    best
}

pub(crate) fn grow<C: Criterion>(
    crit: &C,
    x: &[Vec<f64>],
    idx: &[usize],
    depth: usize,
    params: &GrowParams,
    total_weight: f64,
) -> TreeNode {
    let mut acc = crit.empty();
    idx.iter().for_each(|&i| crit.add(&mut acc, i));
    let impurity = crit.impurity(&acc);
    let weighted_samples = crit.weight(&acc);
    let leaf = || TreeNode::Leaf {
        value: crit.leaf_value(idx, &acc),
        impurity,
        samples: idx.len(),
        weighted_samples,
    };
    if depth >= params.max_depth || idx.len() < 2 || crit.is_pure(idx) {
        return leaf();
    }
    let Some(split) = best_split(crit, x, idx, total_weight) else {
        return leaf();
    };
    if split.decrease < params.min_impurity_decrease {
        return leaf();
    }
    let (l, r): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| x[i][split.feature] <= split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        impurity,
        samples: idx.len(),
        weighted_samples,
        left: Box::new(grow(crit, x, &l, depth + 1, params, total_weight)),
        right: Box::new(grow(crit, x, &r, depth + 1, params, total_weight)),
    }
}

pub(crate) fn check_matrix(x: &[Vec<f64>], n_targets: usize, names: usize) -> Result<()> {
    if x.len() != n_targets {
        return Err(Error::InvalidArgument(format!(
            "{} rows but {n_targets} targets",
            x.len()
        )));
    }
    if let Some(row) = x.iter().find(|r| r.len() != names) {
        return Err(Error::InvalidArgument(format!(
            "row has {} values, {names} feature names given",
            row.len()
        )));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite feature value".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng;
    use rand::Rng;

    /// Every (feature, midpoint) pair scored directly from sample lists.
    fn oracle(x: &[Vec<f64>], y: &[usize], w: &[f64]) -> Option<(usize, f64)> {
        let gini = |members: &[usize]| -> (f64, f64) {
            let mut m = [0.0; 2];
            members.iter().for_each(|&i| m[y[i]] += w[i]);
            let t = m[0] + m[1];
            if t == 0.0 {
                return (0.0, 0.0);
            }
            (t, 1.0 - (m[0] / t).powi(2) - (m[1] / t).powi(2))
        };
        let all: Vec<usize> = (0..y.len()).collect();
        let (wt, imp) = gini(&all);
        let mut cands = Vec::new();
        for f in 0..x[0].len() {
            let mut vals: Vec<f64> = x.iter().map(|r| r[f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for pair in vals.windows(2) {
                let t = (pair[0] + pair[1]) / 2.0;
                let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| x[i][f] <= t);
                let (wl, il) = gini(&l);
                let (wr, ir) = gini(&r);
                cands.push((f, t, imp - wl / wt * il - wr / wt * ir));
            }
        }
        let max = cands.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        if max <= 1e-12 {
            return None;
        }
        cands.iter().find(|c| c.2 >= max - 1e-9).map(|c| (c.0, c.1))
    }

    #[test]
    fn split_matches_exhaustive_oracle() {
        let mut r = rng(11);
        for _ in 0..2000 {
            let n = r.random_range(2..=8);
            let d = r.random_range(1..=3);
            let x: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| r.random_range(0..4) as f64).collect())
                .collect();
            let y: Vec<usize> = (0..n).map(|_| r.random_range(0..2)).collect();
            let w: Vec<f64> = (0..n).map(|_| r.random_range(1..4) as f64).collect();
            let crit = Gini {
                labels: &y,
                weights: &w,
            };
            let idx: Vec<usize> = (0..n).collect();
            let total = w.iter().sum();
            let got = best_split(&crit, &x, &idx, total).map(|s| (s.feature, s.threshold));
            assert_eq!(got, oracle(&x, &y, &w), "x={x:?} y={y:?} w={w:?}");
        }
    }

    #[test]
    fn stable_mean_is_exact_on_constants() {
        assert_eq!(stable_mean([0.3; 7].into_iter()), 0.3);
        assert_eq!(stable_mean(std::iter::empty()), 0.0);
        assert_eq!(stable_mean([1.0, 2.0, 6.0].into_iter()), 3.0);
    }

    #[test]
    fn squared_error_impurity_is_variance() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let c = SquaredError { targets: &t };
        let mut acc = c.empty();
        (0..4).for_each(|i| c.add(&mut acc, i));
        assert!((c.impurity(&acc) - 1.25).abs() < 1e-12);
    }
}
