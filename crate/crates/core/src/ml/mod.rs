//! The six failure classifiers, cross-validation and F-measure scoring.
//!
//! All models standardize their inputs with statistics from the training
//! rows and drop constant columns before fitting.

pub mod adaboost;
pub mod cv;
pub mod forest;
pub mod knn;
pub mod metrics;
pub mod neural;
pub mod rng;
pub mod standardize;
pub mod svm;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::FeatureDataset;
use adaboost::AdaBoost;
use forest::{ForestParams, RandomForest};
use knn::Knn;
use neural::Mlp;
use standardize::Standardizer;
use svm::LinearSvm;
use tree::{DecisionTree, TreeParams};

pub use cv::{evaluate, stratified_kfold};
pub use metrics::{f_measure, ConfusionMatrix, EvalReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("no training rows")]
    EmptyTraining,
    #[error("rows have {got} features, model expects {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("need at least {k} members of each class for {k} folds (have {positives} positive, {negatives} negative)")]
    TooFewPerClass {
        k: usize,
        positives: usize,
        negatives: usize,
    },
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("unknown classifier `{0}`; valid kinds: {valid}", valid = ClassifierKind::NAMES.join(", "))]
    UnknownKind(String),
    #[error("{kind} has no hyperparameter `{name}`")]
    UnknownHyperparam { kind: ClassifierKind, name: String },
    #[error("invalid value {value} for {kind} hyperparameter `{name}`")]
    InvalidHyperparam {
        kind: ClassifierKind,
        name: String,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    DecisionTree,
    Knn,
    LinearSvm,
    RandomForest,
    Adaboost,
    NeuralNet,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::DecisionTree,
        ClassifierKind::Knn,
        ClassifierKind::LinearSvm,
        ClassifierKind::RandomForest,
        ClassifierKind::Adaboost,
        ClassifierKind::NeuralNet,
    ];

    pub const NAMES: [&'static str; 6] = [
        "decision_tree",
        "knn",
        "linear_svm",
        "random_forest",
        "adaboost",
        "neural_net",
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES[Self::ALL.iter().position(|&k| k == self).unwrap()]
    }

    /// Human-readable row label for report tables.
    pub fn label(self) -> &'static str {
        match self {
            ClassifierKind::DecisionTree => "Decision tree",
            ClassifierKind::Knn => "k-NN",
            ClassifierKind::LinearSvm => "SVM",
            ClassifierKind::RandomForest => "Random Forest",
            ClassifierKind::Adaboost => "Adaboost",
            ClassifierKind::NeuralNet => "Neural network",
        }
    }

    /// Whether the kind can only be trained with both classes present.
    pub fn needs_both_classes(self) -> bool {
        self != ClassifierKind::Knn
    }

    pub fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            ClassifierKind::DecisionTree => &[("max_depth", 8.0), ("min_leaf", 5.0)],
            ClassifierKind::Knn => &[("k", 5.0)],
            ClassifierKind::LinearSvm => &[("lambda", 1e-3), ("epochs", 20.0)],
            // max_features 0 means floor(sqrt(d))
            ClassifierKind::RandomForest => &[
                ("n_trees", 100.0),
                ("max_depth", 8.0),
                ("min_leaf", 5.0),
                ("max_features", 0.0),
                ("bootstrap", 1.0),
            ],
            ClassifierKind::Adaboost => &[("rounds", 50.0)],
            ClassifierKind::NeuralNet => &[("hidden", 8.0), ("learning_rate", 0.1), ("epochs", 500.0)],
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = MlError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::NAMES
            .iter()
            .position(|&n| n == s)
            .map(|i| Self::ALL[i])
            .ok_or_else(|| MlError::UnknownKind(s.to_string()))
    }
}

/// A classifier kind with a complete hyperparameter set and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    hyperparams: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        ClassifierSpec {
            kind,
            hyperparams: kind.defaults().iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            seed,
        }
    }

    /// Overrides one hyperparameter; names outside the kind's set are rejected.
    pub fn with(mut self, name: &str, value: f64) -> Result<Self, MlError> {
        let Some(slot) = self.hyperparams.get_mut(name) else {
            return Err(MlError::UnknownHyperparam {
                kind: self.kind,
                name: name.to_string(),
            });
        };
        let integral = !matches!(name, "lambda" | "learning_rate");
        let min = if matches!(name, "max_depth" | "max_features" | "bootstrap") { 0.0 } else { f64::MIN_POSITIVE };
        if !value.is_finite() || value < min || (integral && value.fract() != 0.0) {
            return Err(MlError::InvalidHyperparam {
                kind: self.kind,
                name: name.to_string(),
                value,
            });
        }
        *slot = value;
        Ok(self)
    }

    pub fn hyperparams(&self) -> &BTreeMap<String, f64> {
        &self.hyperparams
    }

    pub fn get(&self, name: &str) -> f64 {
        self.hyperparams[name]
    }

    fn get_usize(&self, name: &str) -> usize {
        self.get(name) as usize
    }

    fn tree_params(&self) -> TreeParams {
        TreeParams {
            max_depth: self.get_usize("max_depth"),
            min_leaf: self.get_usize("min_leaf"),
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Inner {
    Tree(DecisionTree),
    Knn(Knn),
    Svm(LinearSvm),
    Forest(RandomForest),
    AdaBoost(AdaBoost),
    Net(Mlp),
}

/// A fitted classifier together with its input standardization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    kind: ClassifierKind,
    standardizer: Standardizer,
    inner: Inner,
}

impl Model {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    /// Input columns dropped at fit time for having zero variance.
    pub fn dropped_columns(&self) -> &[usize] {
        self.standardizer.dropped()
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<bool>, MlError> {
        let expected = self.standardizer.n_inputs();
        if let Some(r) = rows.iter().find(|r| r.len() != expected) {
            return Err(MlError::ArityMismatch {
                expected,
                got: r.len(),
            });
        }
        Ok(rows
            .iter()
            .map(|r| {
                let z = self.standardizer.transform(r);
                match &self.inner {
                    Inner::Tree(m) => m.predict_one(&z),
                    Inner::Knn(m) => m.predict_one(&z),
                    Inner::Svm(m) => m.predict_one(&z),
                    Inner::Forest(m) => m.predict_one(&z),
                    Inner::AdaBoost(m) => m.predict_one(&z),
                    Inner::Net(m) => m.predict_one(&z),
                }
            })
            .collect())
    }
}

/// Trains on a feature dataset.
pub fn fit(spec: &ClassifierSpec, train: &FeatureDataset) -> Result<Model, MlError> {
    fit_rows(spec, train.rows(), train.labels(), train.n_features())
}

/// Trains on raw rows of arity `n_inputs`. Deterministic in `(spec, rows, labels)`.
pub fn fit_rows(
    spec: &ClassifierSpec,
    rows: &[Vec<f64>],
    labels: &[bool],
    n_inputs: usize,
) -> Result<Model, MlError> {
    if rows.is_empty() {
        return Err(MlError::EmptyTraining);
    }
    if let Some(r) = rows.iter().find(|r| r.len() != n_inputs) {
        return Err(MlError::ArityMismatch {
            expected: n_inputs,
            got: r.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    if spec.kind.needs_both_classes() && (pos == 0 || pos == labels.len() || rows.len() < 2) {
        return Err(MlError::SingleClass);
    }
    let standardizer = Standardizer::fit(rows, n_inputs);
    let x = standardizer.transform_all(rows);
    let y = labels;
    let d = standardizer.n_outputs();
    let inner = match spec.kind {
        ClassifierKind::DecisionTree => Inner::Tree(DecisionTree::fit_all(&x, y, &spec.tree_params())),
        ClassifierKind::Knn => Inner::Knn(Knn::fit(&x, y, spec.get_usize("k"))),
        ClassifierKind::LinearSvm => Inner::Svm(LinearSvm::fit(
            &x,
            y,
            spec.get("lambda"),
            spec.get_usize("epochs"),
            &mut rng::stream(spec.seed, &[]),
        )),
        ClassifierKind::RandomForest => {
            let mf = spec.get_usize("max_features");
            let max_features = if mf == 0 { ((d as f64).sqrt() as usize).max(1) } else { mf };
            let params = ForestParams {
                n_trees: spec.get_usize("n_trees"),
                tree: TreeParams {
                    max_features: Some(max_features),
                    ..spec.tree_params()
                },
                bootstrap: spec.get("bootstrap") != 0.0,
            };
            Inner::Forest(RandomForest::fit(&x, y, &params, spec.seed))
        }
        ClassifierKind::Adaboost => Inner::AdaBoost(AdaBoost::fit(&x, y, spec.get_usize("rounds"))),
        ClassifierKind::NeuralNet => Inner::Net(Mlp::fit(
            &x,
            y,
            spec.get_usize("hidden"),
            spec.get("learning_rate"),
            spec.get_usize("epochs"),
            &mut rng::stream(spec.seed, &[]),
        )),
    };
    Ok(Model {
        kind: spec.kind,
        standardizer,
        inner,
    })
}

pub fn predict(model: &Model, rows: &[Vec<f64>]) -> Result<Vec<bool>, MlError> {
    model.predict(rows)
}
