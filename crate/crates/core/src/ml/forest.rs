//! Bagged CART trees with random feature subsets at each split.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::stream;
use super::tree::{DecisionTree, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Tree `t` draws from its own stream `(seed, t)`, so trees can be grown
    /// in parallel without changing the result.
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &ForestParams, seed: u64) -> Self {
        let n = x.len();
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream(seed, &[t as u64]);
                let sample: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(x, y, &sample, &params.tree, &mut rng)
            })
            .collect();
        RandomForest { trees }
    }

    /// Fraction of trees voting failure.
    pub fn vote_share(&self, row: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.predict_one(row)).count();
        votes as f64 / self.trees.len().max(1) as f64
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        self.vote_share(row) > 0.5
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }
}
