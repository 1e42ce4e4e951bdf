//! Linear SVM trained by stochastic subgradient descent on the regularized
//! hinge loss (Pegasos step size `1 / (lambda * t)`).
//!
//! The bias is an extra constant input and is regularized with the rest.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    /// Input weights followed by the bias.
    weights: Vec<f64>,
}

impl LinearSvm {
    pub fn fit<R: Rng>(x: &[Vec<f64>], y: &[bool], lambda: f64, epochs: usize, rng: &mut R) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let mut w = vec![0.0; d + 1];
        let mut order: Vec<usize> = (0..x.len()).collect();
        let mut t = 0u64;
        for _ in 0..epochs {
            order.shuffle(rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let target = if y[i] { 1.0 } else { -1.0 };
                let margin = target * decision(&w, &x[i]);
                let shrink = 1.0 - eta * lambda;
                w.iter_mut().for_each(|v| *v *= shrink);
                if margin < 1.0 {
                    for (wj, xj) in w.iter_mut().zip(&x[i]) {
                        *wj += eta * target * xj;
                    }
                    w[d] += eta * target;
                }
            }
        }
        LinearSvm { weights: w }
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        decision(&self.weights, row)
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        self.decision(row) > 0.0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn decision(w: &[f64], row: &[f64]) -> f64 {
    let d = row.len();
    w[..d].iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + w[d]
}
