//! Confusion counts and failure-class precision / recall / F-measure.

use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::ClassifierSpec;
use crate::domain::Provenance;

/// Counts with failure as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Self {
        assert_eq!(truth.len(), predicted.len());
        let mut cm = ConfusionMatrix::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (true, true) => cm.tp += 1,
                (false, true) => cm.fp += 1,
                (true, false) => cm.fn_ += 1,
                (false, false) => cm.tn += 1,
            }
        }
        cm
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// 0 when nothing was predicted positive.
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    /// 0 when there are no actual positives.
    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

impl Add for ConfusionMatrix {
    type Output = ConfusionMatrix;
    fn add(self, o: Self) -> Self {
        ConfusionMatrix::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

impl std::iter::Sum for ConfusionMatrix {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ConfusionMatrix::default(), Add::add)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
///
/// Evaluated as `2tp / (2tp + fp + fn)`, which equals the harmonic mean
/// whenever it is defined and rounds only once.
pub fn f_measure(cm: &ConfusionMatrix) -> f64 {
    if cm.tp == 0 {
        return 0.0;
    }
    (2 * cm.tp) as f64 / (2 * cm.tp + cm.fp + cm.fn_) as f64
}

/// Cross-validated result of one classifier on one feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: ClassifierSpec,
    pub provenance: Provenance,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<ConfusionMatrix>,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl EvalReport {
    /// Pools the fold matrices and derives the summary metrics from the sum.
    pub fn from_folds(
        classifier: ClassifierSpec,
        provenance: Provenance,
        k: usize,
        seed: u64,
        folds: Vec<ConfusionMatrix>,
    ) -> Self {
        let pooled = folds.iter().copied().sum();
        EvalReport {
            classifier,
            provenance,
            k,
            seed,
            precision: ConfusionMatrix::precision(&pooled),
            recall: ConfusionMatrix::recall(&pooled),
            f_measure: f_measure(&pooled),
            folds,
        }
    }

    pub fn pooled(&self) -> ConfusionMatrix {
        self.folds.iter().copied().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_example() {
        let cm = ConfusionMatrix::new(50, 10, 20, 0);
        assert_eq!(cm.precision(), 50.0 / 60.0);
        assert_eq!(cm.recall(), 50.0 / 70.0);
        assert_eq!(f_measure(&cm), 100.0 / 130.0);
        assert!((f_measure(&cm) - 0.76923).abs() < 1e-5);
    }

    #[test]
    fn degenerate_cases() {
        assert_eq!(f_measure(&ConfusionMatrix::new(0, 0, 5, 0)), 0.0);
        assert_eq!(f_measure(&ConfusionMatrix::new(0, 3, 0, 0)), 0.0);
        assert_eq!(f_measure(&ConfusionMatrix::default()), 0.0);
        assert_eq!(f_measure(&ConfusionMatrix::new(9, 0, 0, 4)), 1.0);
    }

    #[test]
    fn json_field_names() {
        let v = serde_json::to_value(ConfusionMatrix::new(1, 2, 3, 4)).unwrap();
        assert_eq!(v, serde_json::json!({"tp": 1, "fp": 2, "fn": 3, "tn": 4}));
    }

    #[test]
    fn counts_from_predictions() {
        let cm = ConfusionMatrix::from_predictions(&[true, true, false, false], &[true, false, true, false]);
        assert_eq!(cm, ConfusionMatrix::new(1, 1, 1, 1));
        assert_eq!(cm.total(), 4);
    }
}
