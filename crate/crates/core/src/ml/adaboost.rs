//! Discrete AdaBoost over one-split decision stumps.

use serde::{Deserialize, Serialize};

/// Predicts `polarity` above the threshold and `-polarity` at or below it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: f64,
}

impl Stump {
    pub fn vote(&self, row: &[f64]) -> f64 {
        if row[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

/// Lowest weighted error stump. Ties keep the first candidate in
/// (feature, threshold, polarity) order.
fn best_stump(x: &[Vec<f64>], y: &[f64], w: &[f64], sorted: &[Vec<usize>]) -> (Stump, f64) {
    let total: f64 = w.iter().sum();
    let total_pos: f64 = w.iter().zip(y).filter(|(_, &t)| t > 0.0).map(|(v, _)| v).sum();
    let mut best = (
        Stump {
            feature: 0,
            threshold: f64::NEG_INFINITY,
            polarity: 1.0,
        },
        total - total_pos,
    );
    if total_pos < best.1 {
        best = (
            Stump {
                polarity: -1.0,
                ..best.0
            },
            total_pos,
        );
    }
    for (f, order) in sorted.iter().enumerate() {
        let (mut left_pos, mut left_neg) = (0.0, 0.0);
        for k in 0..order.len().saturating_sub(1) {
            let i = order[k];
            if y[i] > 0.0 {
                left_pos += w[i];
            } else {
                left_neg += w[i];
            }
            let (lo, hi) = (x[i][f], x[order[k + 1]][f]);
            if lo == hi {
                continue;
            }
            let right_pos = total_pos - left_pos;
            let right_neg = total - total_pos - left_neg;
            // polarity +1: left predicted negative, right positive
            let err_up = left_pos + right_neg;
            let err_down = left_neg + right_pos;
            let mid = lo + (hi - lo) / 2.0;
            let threshold = if mid < hi { mid } else { lo };
            if err_up < best.1 {
                best = (Stump { feature: f, threshold, polarity: 1.0 }, err_up);
            }
            if err_down < best.1 {
                best = (Stump { feature: f, threshold, polarity: -1.0 }, err_down);
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    stumps: Vec<(Stump, f64)>,
}

const MIN_ERROR: f64 = 1e-10;

impl AdaBoost {
    pub fn fit(x: &[Vec<f64>], y: &[bool], rounds: usize) -> Self {
        Self::fit_traced(x, y, rounds, |_| {})
    }

    /// As [`AdaBoost::fit`], handing the normalized sample weights to
    /// `observe` after every round.
    pub fn fit_traced<F: FnMut(&[f64])>(x: &[Vec<f64>], y: &[bool], rounds: usize, mut observe: F) -> Self {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let target: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
        let sorted: Vec<Vec<usize>> = (0..d)
            .map(|f| {
                let mut o: Vec<usize> = (0..n).collect();
                o.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
                o
            })
            .collect();
        let mut w = vec![1.0 / n as f64; n];
        let mut stumps = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let (stump, err) = best_stump(x, &target, &w, &sorted);
            if err >= 0.5 - 1e-12 {
                break;
            }
            let eps = err.max(MIN_ERROR);
            let alpha = 0.5 * ((1.0 - eps) / eps).ln();
            for (i, wi) in w.iter_mut().enumerate() {
                *wi *= (-alpha * target[i] * stump.vote(&x[i])).exp();
            }
            let z: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= z);
            stumps.push((stump, alpha));
            observe(&w);
            if err <= MIN_ERROR {
                break;
            }
        }
        AdaBoost { stumps }
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        self.stumps.iter().map(|(s, a)| a * s.vote(row)).sum()
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        self.margin(row) > 0.0
    }

    pub fn n_rounds(&self) -> usize {
        self.stumps.len()
    }
}
