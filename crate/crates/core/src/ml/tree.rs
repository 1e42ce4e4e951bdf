//! CART classification tree with Gini impurity.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split; `None` means all of them.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: 8,
            min_leaf: 5,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        positive: bool,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Sum over children of `n * gini`, i.e. `n - (pos^2 + neg^2) / n`.
fn weighted_gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64;
    let q = (n - pos) as f64;
    n as f64 - (p * p + q * q) / n as f64
}

impl DecisionTree {
    /// Grows a tree over `sample` (row indices into `x`; repeats allowed,
    /// as produced by bootstrapping).
    pub fn fit<R: Rng>(
        x: &[Vec<f64>],
        y: &[bool],
        sample: &[usize],
        params: &TreeParams,
        rng: &mut R,
    ) -> Self {
        let n_features = x.first().map_or(0, Vec::len);
        let mut tree = DecisionTree { nodes: Vec::new() };
        tree.grow(x, y, sample.to_vec(), 0, n_features, params, rng);
        tree
    }

    pub fn fit_all(x: &[Vec<f64>], y: &[bool], params: &TreeParams) -> Self {
        let sample: Vec<usize> = (0..x.len()).collect();
        // all features are examined, so the rng is never drawn from
        let mut rng = super::rng::stream(0, &[]);
        Self::fit(x, y, &sample, params, &mut rng)
    }

    #[allow(clippy::too_many_arguments)]
    fn grow<R: Rng>(
        &mut self,
        x: &[Vec<f64>],
        y: &[bool],
        sample: Vec<usize>,
        depth: usize,
        n_features: usize,
        params: &TreeParams,
        rng: &mut R,
    ) -> usize {
        let id = self.nodes.len();
        let n = sample.len();
        let pos = sample.iter().filter(|&&i| y[i]).count();
        self.nodes.push(Node::Leaf {
            positive: 2 * pos > n,
        });
        if depth >= params.max_depth || pos == 0 || pos == n || n < 2 * params.min_leaf.max(1) {
            return id;
        }
        let Some(split) = best_split(x, y, &sample, pos, n_features, params, rng) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = sample
            .into_iter()
            .partition(|&i| x[i][split.feature] <= split.threshold);
        let left = self.grow(x, y, l, depth + 1, n_features, params, rng);
        let right = self.grow(x, y, r, depth + 1, n_features, params, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    pub fn predict_one(&self, row: &[f64]) -> bool {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { positive } => return *positive,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn best_split<R: Rng>(
    x: &[Vec<f64>],
    y: &[bool],
    sample: &[usize],
    pos: usize,
    n_features: usize,
    params: &TreeParams,
    rng: &mut R,
) -> Option<Split> {
    let n = sample.len();
    let features: Vec<usize> = match params.max_features {
        Some(m) if m < n_features => {
            let mut f = index::sample(rng, n_features, m.max(1)).into_vec();
            f.sort_unstable();
            f
        }
        _ => (0..n_features).collect(),
    };
    let min_leaf = params.min_leaf.max(1);
    let parent = weighted_gini(pos, n);
    let mut best: Option<Split> = None;
    let mut order = sample.to_vec();
    for f in features {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left_pos = 0;
        for i in 0..n - 1 {
            if y[order[i]] {
                left_pos += 1;
            }
            let nl = i + 1;
            let (lo, hi) = (x[order[i]][f], x[order[i + 1]][f]);
            if nl < min_leaf || n - nl < min_leaf || lo == hi {
                continue;
            }
            let impurity = weighted_gini(left_pos, nl) + weighted_gini(pos - left_pos, n - nl);
            if impurity < parent - 1e-12 && best.as_ref().is_none_or(|b| impurity < b.impurity) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Split {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}
