mod common;

use common::{blobs, rng};
use num_rational::Ratio;
use proptest::prelude::*;
use psai_core::ml::adaboost::AdaBoost;
use psai_core::ml::cv::stratified_kfold;
use psai_core::ml::forest::{ForestParams, RandomForest};
use psai_core::ml::metrics::{f_measure, ConfusionMatrix};
use psai_core::ml::neural::Mlp;
use psai_core::ml::tree::{DecisionTree, TreeParams};
use psai_core::ml::{evaluate, fit_rows, ClassifierKind, ClassifierSpec, MlError};
use psai_core::{FeatureDataset, Provenance, StudentId};
use rand::Rng;

fn f_oracle(tp: u64, fp: u64, fn_: u64) -> f64 {
    let zero = Ratio::from_integer(0u64);
    let p = if tp + fp == 0 { zero } else { Ratio::new(tp, tp + fp) };
    let r = if tp + fn_ == 0 { zero } else { Ratio::new(tp, tp + fn_) };
    if p + r == zero {
        return 0.0;
    }
    let f = Ratio::from_integer(2) * p * r / (p + r);
    *f.numer() as f64 / *f.denom() as f64
}

fn dataset(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> FeatureDataset {
    let d = rows[0].len();
    let ids = (0..rows.len()).map(|i| StudentId::new(format!("s{i:04}"))).collect();
    FeatureDataset::new((0..d).map(|j| format!("x{j}")).collect(), rows, labels, ids, Provenance::Naive).unwrap()
}

#[test]
fn f_measure_zero_denominators() {
    assert_eq!(f_measure(&ConfusionMatrix::new(0, 0, 0, 10)), 0.0);
    assert_eq!(f_measure(&ConfusionMatrix::new(0, 3, 0, 1)), 0.0);
    assert_eq!(f_measure(&ConfusionMatrix::new(0, 0, 4, 1)), 0.0);
}

#[test]
fn predicting_only_success_scores_zero() {
    let truth = [true, false, true, false, false];
    let cm = ConfusionMatrix::from_predictions(&truth, &[false; 5]);
    assert_eq!((cm.tp, cm.fn_, cm.tn), (0, 2, 3));
    assert_eq!(f_measure(&cm), 0.0);
}

#[test]
fn perfect_two_fold_toy() {
    let ds = dataset(vec![vec![0.0], vec![0.1], vec![10.0], vec![10.1]], vec![false, false, true, true]);
    let spec = ClassifierSpec::new(ClassifierKind::Knn, 1).with("k", 1.0).unwrap();
    let report = evaluate(&spec, &ds, 2, 1).unwrap();
    assert_eq!(report.f_measure, 1.0);
}

#[test]
fn too_few_per_class() {
    let labels = [true, true, false, false, false, false];
    assert!(matches!(
        stratified_kfold(&labels, 3, 0),
        Err(MlError::TooFewPerClass { positives: 2, .. })
    ));
    assert!(matches!(stratified_kfold(&labels, 1, 0), Err(MlError::InvalidK(1))));
}

#[test]
fn every_classifier_separates_blobs() {
    let (x, y) = blobs(&mut rng(1), 200);
    let (tx, ty) = blobs(&mut rng(2), 200);
    for kind in ClassifierKind::ALL {
        let model = fit_rows(&ClassifierSpec::new(kind, 3), &x, &y, 2).unwrap();
        let pred = model.predict(&tx).unwrap();
        let acc = pred.iter().zip(&ty).filter(|(a, b)| a == b).count() as f64 / ty.len() as f64;
        assert!(acc >= 0.95, "{kind}: {acc}");
    }
}

#[test]
fn network_gradient_matches_finite_differences() {
    let mut r = rng(4);
    let x: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
    let y: Vec<bool> = (0..30).map(|_| r.random_bool(0.4)).collect();
    let mut net = Mlp::new(3, 8, &mut r);
    let params = net.params().to_vec();
    let analytic = net.gradient(&x, &y);
    let h = 1e-5;
    for i in 0..params.len() {
        let mut p = params.clone();
        p[i] = params[i] + h;
        net.set_params(&p);
        let up = net.loss(&x, &y);
        p[i] = params[i] - h;
        net.set_params(&p);
        let down = net.loss(&x, &y);
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs());
        if scale > 1e-9 {
            assert!((analytic[i] - numeric).abs() / scale < 1e-4, "param {i}: {} vs {numeric}", analytic[i]);
        }
    }
}

#[test]
fn single_full_tree_forest_is_the_tree() {
    let noise_seed = 6;
    let (x, y) = blobs(&mut rng(noise_seed), 200);
    let mut x = x;
    let mut r = rng(noise_seed + 1);
    x.iter_mut().for_each(|row| row.push(r.random_range(-1.0..1.0)));
    for tree in [TreeParams::default(), TreeParams { max_depth: 64, min_leaf: 1, max_features: None }] {
        let plain = DecisionTree::fit_all(&x, &y, &tree);
        let params = ForestParams {
            n_trees: 1,
            tree: TreeParams { max_features: Some(3), ..tree },
            bootstrap: false,
        };
        let forest = RandomForest::fit(&x, &y, &params, 99);
        let fj = serde_json::to_value(&forest).unwrap();
        assert_eq!(fj["trees"][0], serde_json::to_value(&plain).unwrap());
    }
}

#[test]
fn boosting_weights_stay_normalized() {
    let mut r = rng(8);
    let x: Vec<Vec<f64>> = (0..150).map(|_| vec![r.random_range(0.0..1.0), r.random_range(0.0..1.0)]).collect();
    let y: Vec<bool> = x.iter().map(|p| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.1).collect();
    let mut sums = Vec::new();
    let model = AdaBoost::fit_traced(&x, &y, 50, |w| sums.push(w.iter().sum::<f64>()));
    assert!(model.n_rounds() > 5);
    assert_eq!(sums.len(), model.n_rounds());
    for s in sums {
        assert!((s - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn column_order_does_not_matter_for_tree_and_knn() {
    let mut r = rng(12);
    let (x, y) = blobs(&mut r, 200);
    let x: Vec<Vec<f64>> = x.into_iter().map(|row| vec![row[0], row[1], r.random_range(-3.0..3.0)]).collect();
    let perm = |row: &Vec<f64>| vec![row[2], row[0], row[1]];
    let xp: Vec<Vec<f64>> = x.iter().map(perm).collect();
    let (tx, _) = blobs(&mut rng(13), 100);
    let tx: Vec<Vec<f64>> = tx.into_iter().map(|row| vec![row[0], row[1], 0.5]).collect();
    let txp: Vec<Vec<f64>> = tx.iter().map(perm).collect();
    for kind in [ClassifierKind::DecisionTree, ClassifierKind::Knn] {
        let a = fit_rows(&ClassifierSpec::new(kind, 0), &x, &y, 3).unwrap().predict(&tx).unwrap();
        let b = fit_rows(&ClassifierSpec::new(kind, 0), &xp, &y, 3).unwrap().predict(&txp).unwrap();
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn evaluation_ignores_thread_count() {
    let (x, y) = blobs(&mut rng(21), 120);
    let ds = dataset(x, y);
    for kind in [ClassifierKind::RandomForest, ClassifierKind::NeuralNet] {
        let spec = ClassifierSpec::new(kind, 5);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| evaluate(&spec, &ds, 5, 5).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        let total: u64 = one.folds.iter().map(ConfusionMatrix::total).sum();
        assert_eq!(total, 120);
    }
}

proptest! {
    #[test]
    fn f_measure_is_exact(tp in 0u64..60, fp in 0u64..60, fn_ in 0u64..60, tn in 0u64..60) {
        prop_assert_eq!(f_measure(&ConfusionMatrix::new(tp, fp, fn_, tn)), f_oracle(tp, fp, fn_));
    }

    #[test]
    fn kfold_partitions_and_stratifies(
        labels in prop::collection::vec(any::<bool>(), 20..200),
        k in 2usize..=10,
        seed in any::<u64>(),
    ) {
        let pos = labels.iter().filter(|&&l| l).count();
        let neg = labels.len() - pos;
        prop_assume!(pos >= k && neg >= k);
        let folds = stratified_kfold(&labels, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for f in &folds {
            let p = f.iter().filter(|&&i| labels[i]).count() as f64;
            let n = f.len() as f64 - p;
            prop_assert!((p - pos as f64 / k as f64).abs() <= 1.0);
            prop_assert!((n - neg as f64 / k as f64).abs() <= 1.0);
        }
        prop_assert_eq!(stratified_kfold(&labels, k, seed).unwrap(), folds);
    }
}
