//! Per-column z-scoring fitted on training rows only.

use serde::{Deserialize, Serialize};

/// Column means and standard deviations (population) from a training set.
///
/// Constant columns carry no information and are dropped; their indices are
/// kept in `dropped`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    n_inputs: usize,
    kept: Vec<usize>,
    dropped: Vec<usize>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>], n_inputs: usize) -> Self {
        let n = rows.len() as f64;
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        let mut means = Vec::new();
        let mut stds = Vec::new();
        for j in 0..n_inputs {
            let col = rows.iter().map(|r| r[j]);
            let (lo, hi) = col
                .clone()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if rows.is_empty() || lo == hi {
                dropped.push(j);
                continue;
            }
            let mean = col.clone().sum::<f64>() / n;
            let var = col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if !(var > 0.0) {
                dropped.push(j);
                continue;
            }
            kept.push(j);
            means.push(mean);
            stds.push(var.sqrt());
        }
        Standardizer {
            n_inputs,
            kept,
            dropped,
            means,
            stds,
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.kept.len()
    }

    /// Indices of input columns removed for having zero variance.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&j, (m, s))| (row[j] - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}
