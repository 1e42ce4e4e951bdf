//! k-nearest-neighbour majority vote under Euclidean distance.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    k: usize,
    rows: Vec<Vec<f64>>,
    labels: Vec<bool>,
}

impl Knn {
    pub fn fit(x: &[Vec<f64>], y: &[bool], k: usize) -> Self {
        Knn {
            k: k.max(1),
            rows: x.to_vec(),
            labels: y.to_vec(),
        }
    }

    /// Indices of the `k` nearest training rows; equal distances go to the
    /// lower row index.
    pub fn neighbours(&self, row: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        let nb = self.neighbours(row);
        let pos = nb.iter().filter(|&&i| self.labels[i]).count();
        2 * pos > nb.len()
    }
}
