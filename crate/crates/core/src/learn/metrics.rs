use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-class evaluation. `confusion[actual][predicted]`, class 0 is
/// "not solvable".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub confusion: [[u64; 2]; 2],
    /// `None` when the class has no members in the truth labels.
    pub recall_not_solvable: Option<f64>,
    pub recall_solvable: Option<f64>,
    /// Mean of the defined recalls.
    pub balanced_accuracy: f64,
    pub accuracy: f64,
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidArgument(format!(
            "{a} truth values but {b} predictions"
        )));
    }
    if a == 0 {
        return Err(Error::InvalidArgument("no values to evaluate".into()));
    }
    Ok(())
}

pub fn classification_metrics(truth: &[bool], pred: &[bool]) -> Result<ClassificationMetrics> {
    check_lengths(truth.len(), pred.len())?;
    let mut confusion = [[0u64; 2]; 2];
    for (&t, &p) in truth.iter().zip(pred) {
        confusion[usize::from(t)][usize::from(p)] += 1;
    }
    let recall = |c: usize| {
        let members = confusion[c][0] + confusion[c][1];
        (members > 0).then(|| confusion[c][c] as f64 / members as f64)
    };
    let (r0, r1) = (recall(0), recall(1));
    let defined: Vec<f64> = [r0, r1].into_iter().flatten().collect();
    Ok(ClassificationMetrics {
        confusion,
        recall_not_solvable: r0,
        recall_solvable: r1,
        balanced_accuracy: defined.iter().sum::<f64>() / defined.len() as f64,
        accuracy: (confusion[0][0] + confusion[1][1]) as f64 / truth.len() as f64,
    })
}

pub fn rmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_lengths(truth.len(), pred.len())?;
    let sse: f64 = truth.iter().zip(pred).map(|(t, p)| (t - p) * (t - p)).sum();
    Ok((sse / truth.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(confusion: [[u64; 2]; 2]) -> (Vec<bool>, Vec<bool>) {
        let mut t = Vec::new();
        let mut p = Vec::new();
        for a in 0..2 {
            for q in 0..2 {
                for _ in 0..confusion[a][q] {
                    t.push(a == 1);
                    p.push(q == 1);
                }
            }
        }
        (t, p)
    }

    #[test]
    fn published_confusion_matrices() {
        // fixed-parameter and random-parameter regimes
        for (cm, r0, r1) in [
            ([[3458, 654], [97, 497]], 0.841, 0.837),
            ([[3731, 672], [68, 425]], 0.847, 0.862),
        ] {
            let (t, p) = expand(cm);
            let m = classification_metrics(&t, &p).unwrap();
            assert_eq!(m.confusion, cm);
            assert!((m.recall_not_solvable.unwrap() - r0).abs() < 5e-4);
            assert!((m.recall_solvable.unwrap() - r1).abs() < 5e-4);
        }
        let (t, p) = expand([[3458, 654], [97, 497]]);
        let m = classification_metrics(&t, &p).unwrap();
        assert!((m.recall_solvable.unwrap() - 497.0 / 594.0).abs() < 1e-15);
        assert!((m.recall_not_solvable.unwrap() - 3458.0 / 4112.0).abs() < 1e-15);
    }

    #[test]
    fn empty_class_recall_is_undefined() {
        let m = classification_metrics(&[true, true], &[true, false]).unwrap();
        assert_eq!(m.recall_not_solvable, None);
        assert_eq!(m.recall_solvable, Some(0.5));
        assert_eq!(m.balanced_accuracy, 0.5);
    }

    #[test]
    fn rmse_basics() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmse(&[], &[]).is_err());
    }
}
