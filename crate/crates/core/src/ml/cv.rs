//! Stratified k-fold cross-validation.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::metrics::{ConfusionMatrix, EvalReport};
use super::rng::{derive_seed, stream};
use super::{fit_rows, ClassifierSpec, MlError};
use crate::domain::FeatureDataset;

/// Splits row indices into `k` disjoint folds with each class spread as
/// evenly as possible. Each fold's indices are returned in ascending order.
///
/// Positives are dealt round-robin after a seeded shuffle, then negatives
/// continue from the next fold, so fold sizes also differ by at most one.
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, MlError> {
    if k < 2 {
        return Err(MlError::InvalidK(k));
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    if pos.len() < k || neg.len() < k {
        return Err(MlError::TooFewPerClass {
            k,
            positives: pos.len(),
            negatives: neg.len(),
        });
    }
    let mut rng = stream(seed, &[u64::MAX]);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (j, i) in pos.iter().chain(&neg).enumerate() {
        folds[j % k].push(*i);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Cross-validates `spec` on `dataset`: each fold is predicted by a model
/// trained on the remaining folds, and metrics come from the summed matrices.
///
/// Fold `i` trains with seed `derive_seed(spec.seed, [i])`; folds run in
/// parallel and are reassembled in order.
pub fn evaluate(spec: &ClassifierSpec, dataset: &FeatureDataset, k: usize, seed: u64) -> Result<EvalReport, MlError> {
    let folds = stratified_kfold(dataset.labels(), k, seed)?;
    let n = dataset.len();
    let matrices = folds
        .par_iter()
        .enumerate()
        .map(|(fi, test)| {
            let mut in_test = vec![false; n];
            test.iter().for_each(|&i| in_test[i] = true);
            let (train_x, train_y): (Vec<Vec<f64>>, Vec<bool>) = (0..n)
                .filter(|&i| !in_test[i])
                .map(|i| (dataset.rows()[i].clone(), dataset.labels()[i]))
                .unzip();
            let fold_spec = ClassifierSpec {
                seed: derive_seed(spec.seed, &[fi as u64]),
                ..spec.clone()
            };
            let model = fit_rows(&fold_spec, &train_x, &train_y, dataset.n_features())?;
            let test_x: Vec<Vec<f64>> = test.iter().map(|&i| dataset.rows()[i].clone()).collect();
            let truth: Vec<bool> = test.iter().map(|&i| dataset.labels()[i]).collect();
            let pred = model.predict(&test_x)?;
            Ok(ConfusionMatrix::from_predictions(&truth, &pred))
        })
        .collect::<Result<Vec<_>, MlError>>()?;
    Ok(EvalReport::from_folds(spec.clone(), dataset.provenance(), k, seed, matrices))
}
