//! One-hidden-layer network: logistic hidden units, sigmoid output,
//! mean cross-entropy loss, full-batch gradient descent.

use rand::Rng;
use serde::{Deserialize, Serialize};

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Parameters, flattened as `[w1 (hidden x inputs, row-major), b1, w2, b2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    n_inputs: usize,
    hidden: usize,
    params: Vec<f64>,
}

impl Mlp {
    /// Input weights uniform in `±1/sqrt(fan_in)`, biases zero.
    pub fn new<R: Rng>(n_inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let mut params = vec![0.0; hidden * n_inputs + 2 * hidden + 1];
        let r1 = 1.0 / (n_inputs.max(1) as f64).sqrt();
        let r2 = 1.0 / (hidden.max(1) as f64).sqrt();
        for p in &mut params[..hidden * n_inputs] {
            *p = rng.random_range(-r1..r1);
        }
        let w2 = hidden * n_inputs + hidden;
        for p in &mut params[w2..w2 + hidden] {
            *p = rng.random_range(-r2..r2);
        }
        Mlp {
            n_inputs,
            hidden,
            params,
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.params.len());
        self.params.copy_from_slice(params);
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.n_inputs;
        let w2 = b1 + self.hidden;
        (b1, w2, w2 + self.hidden)
    }

    fn hidden_activations(&self, row: &[f64], out: &mut [f64]) {
        let (b1, _, _) = self.offsets();
        for (h, a) in out.iter_mut().enumerate() {
            let w = &self.params[h * self.n_inputs..(h + 1) * self.n_inputs];
            let z = self.params[b1 + h] + w.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
            *a = sigmoid(z);
        }
    }

    fn output(&self, hidden: &[f64]) -> f64 {
        let (_, w2, b2) = self.offsets();
        let z = self.params[b2]
            + self.params[w2..w2 + self.hidden]
                .iter()
                .zip(hidden)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        sigmoid(z)
    }

    pub fn probability(&self, row: &[f64]) -> f64 {
        let mut a = vec![0.0; self.hidden];
        self.hidden_activations(row, &mut a);
        self.output(&a)
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        self.probability(row) > 0.5
    }

    /// Mean binary cross-entropy over the batch.
    pub fn loss(&self, x: &[Vec<f64>], y: &[bool]) -> f64 {
        let total: f64 = x
            .iter()
            .zip(y)
            .map(|(r, &t)| {
                let p = self.probability(r).clamp(1e-15, 1.0 - 1e-15);
                if t {
                    -p.ln()
                } else {
                    -(1.0 - p).ln()
                }
            })
            .sum();
        total / x.len().max(1) as f64
    }

    /// Gradient of [`Mlp::loss`] by backpropagation, same layout as `params`.
    pub fn gradient(&self, x: &[Vec<f64>], y: &[bool]) -> Vec<f64> {
        let (b1, w2, b2) = self.offsets();
        let mut g = vec![0.0; self.params.len()];
        let mut a = vec![0.0; self.hidden];
        for (row, &t) in x.iter().zip(y) {
            self.hidden_activations(row, &mut a);
            let delta_out = self.output(&a) - if t { 1.0 } else { 0.0 };
            g[b2] += delta_out;
            for h in 0..self.hidden {
                g[w2 + h] += delta_out * a[h];
                let delta_h = delta_out * self.params[w2 + h] * a[h] * (1.0 - a[h]);
                g[b1 + h] += delta_h;
                for (gj, xj) in g[h * self.n_inputs..(h + 1) * self.n_inputs].iter_mut().zip(row) {
                    *gj += delta_h * xj;
                }
            }
        }
        let n = x.len().max(1) as f64;
        g.iter_mut().for_each(|v| *v /= n);
        g
    }

    pub fn fit<R: Rng>(
        x: &[Vec<f64>],
        y: &[bool],
        hidden: usize,
        learning_rate: f64,
        epochs: usize,
        rng: &mut R,
    ) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let mut net = Mlp::new(d, hidden, rng);
        for _ in 0..epochs {
            let g = net.gradient(x, y);
            for (p, gi) in net.params.iter_mut().zip(g) {
                *p -= learning_rate * gi;
            }
        }
        net
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::rng::stream;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn training_lowers_loss() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 20.0 - 1.0]).collect();
        let y: Vec<bool> = x.iter().map(|r| r[0] > 0.2).collect();
        let mut rng = stream(3, &[]);
        let init = Mlp::new(1, 8, &mut rng.clone());
        let trained = Mlp::fit(&x, &y, 8, 0.5, 300, &mut rng);
        assert!(trained.loss(&x, &y) < init.loss(&x, &y));
    }
}
