//! CART regression trees with variance-reduction splitting.
//!
//! Trees are stored flat (child links are indices into the node array),
//! which keeps serialization compact and free of recursion limits. At
//! each node `mtry` candidate features are drawn without replacement;
//! the split minimizing the summed child squared error over midpoints
//! of consecutive distinct values wins. Fitting is deterministic given
//! the RNG state.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::FeatureVector;

/// One node: a split referencing children by index, or a leaf holding
/// the mean label and sample count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlatNode {
    Split {
        #[serde(rename = "f")]
        feature: u32,
        #[serde(rename = "t")]
        threshold: f64,
        #[serde(rename = "l")]
        left: u32,
        #[serde(rename = "r")]
        right: u32,
    },
    Leaf {
        #[serde(rename = "v")]
        value: f64,
        #[serde(rename = "n")]
        count: u32,
    },
}

/// A regression tree; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<FlatNode>,
}

impl Tree {
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                FlatNode::Leaf { value, .. } => return *value,
                FlatNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Indices of features used by any split.
    pub fn used_features(&self) -> Vec<usize> {
        let mut used: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                FlatNode::Split { feature, .. } => Some(*feature as usize),
                FlatNode::Leaf { .. } => None,
            })
            .collect();
        used.sort_unstable();
        used.dedup();
        used
    }
}

/// Borrowed training data: one feature vector and label per sample.
#[derive(Debug, Clone, Copy)]
pub struct TrainMatrix<'a> {
    pub rows: &'a [FeatureVector],
    pub labels: &'a [f64],
}

impl<'a> TrainMatrix<'a> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

struct Builder<'a> {
    data: TrainMatrix<'a>,
    mtry: usize,
    min_leaf: usize,
    pool: &'a [usize],
    nodes: Vec<FlatNode>,
    importance: Vec<f64>,
}

/// Fits one tree on `indices` (repeats allowed, as in a bootstrap),
/// drawing split candidates from the feature `pool`. Returns the tree
/// and the per-feature sum of split SSE reductions.
pub fn fit_tree(
    data: TrainMatrix,
    indices: &[usize],
    mtry: usize,
    min_leaf: usize,
    pool: &[usize],
    rng: &mut ChaCha8Rng,
) -> (Tree, Vec<f64>) {
    assert!(!indices.is_empty(), "fit_tree needs at least one sample");
    assert!(min_leaf >= 1);
    let n_features = data.rows.first().map_or(0, |r| r.len());
    let mut b = Builder {
        data,
        mtry: mtry.max(1).min(pool.len()),
        min_leaf,
        pool,
        nodes: Vec::new(),
        importance: vec![0.0; n_features],
    };
    let mut idx = indices.to_vec();
    b.grow(&mut idx, rng);
    (Tree { nodes: b.nodes }, b.importance)
}

/// Sum and sum of squares of the labels selected by `idx`.
fn label_moments(data: &TrainMatrix, idx: &[usize]) -> (f64, f64) {
    let mut s = 0.0;
    let mut ss = 0.0;
    for &i in idx {
        let y = data.labels[i];
        s += y;
        ss += y * y;
    }
    (s, ss)
}

fn sse(sum: f64, sumsq: f64, n: f64) -> f64 {
    (sumsq - sum * sum / n).max(0.0)
}

impl<'a> Builder<'a> {
    fn grow(&mut self, idx: &mut [usize], rng: &mut ChaCha8Rng) -> u32 {
        let n = idx.len();
        let (sum, sumsq) = label_moments(&self.data, idx);
        let node_sse = sse(sum, sumsq, n as f64);
        let mean = sum / n as f64;

        let make_leaf = |nodes: &mut Vec<FlatNode>| -> u32 {
            nodes.push(FlatNode::Leaf {
                value: mean,
                count: n as u32,
            });
            (nodes.len() - 1) as u32
        };

        if n < 2 * self.min_leaf || node_sse <= 1e-24 {
            return make_leaf(&mut self.nodes);
        }

        // Draw mtry distinct candidates from the pool.
        let mut pool: Vec<usize> = self.pool.to_vec();
        for k in 0..self.mtry.min(pool.len()) {
            let pick = rng.gen_range(k..pool.len());
            pool.swap(k, pick);
        }
        let candidates = &pool[..self.mtry.min(pool.len())];

        let mut best: Option<(usize, f64, f64)> = None; // (feature, threshold, score)
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(n);
        for &f in candidates {
            sorted.clear();
            sorted.extend(idx.iter().map(|&i| (self.data.rows[i][f], self.data.labels[i])));
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_sum = 0.0;
            let mut left_sumsq = 0.0;
            for k in 0..n - 1 {
                let (v, y) = sorted[k];
                left_sum += y;
                left_sumsq += y * y;
                let next = sorted[k + 1].0;
                if next <= v {
                    continue; // equal values cannot be separated
                }
                let nl = (k + 1) as f64;
                let nr = (n - k - 1) as f64;
                if (k + 1) < self.min_leaf || (n - k - 1) < self.min_leaf {
                    continue;
                }
                let threshold = v + (next - v) / 2.0;
                if threshold <= v || threshold >= next {
                    continue; // midpoint collapsed onto a sample value
                }
                let score = sse(left_sum, left_sumsq, nl)
                    + sse(sum - left_sum, sumsq - left_sumsq, nr);
                if best.map_or(true, |(_, _, s)| score < s - 1e-15) {
                    best = Some((f, threshold, score));
                }
            }
        }

        let Some((feature, threshold, score)) = best else {
            return make_leaf(&mut self.nodes);
        };
        self.importance[feature] += node_sse - score;

        // Partition indices around the split, preserving order.
        let left_vec: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&i| self.data.rows[i][feature] <= threshold)
            .collect();
        let right_vec: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&i| self.data.rows[i][feature] > threshold)
            .collect();
        let split = left_vec.len();
        idx[..split].copy_from_slice(&left_vec);
        idx[split..].copy_from_slice(&right_vec);

        let at = self.nodes.len() as u32;
        self.nodes.push(FlatNode::Leaf { value: 0.0, count: 0 }); // placeholder
        let (l_idx, r_idx) = idx.split_at_mut(split);
        let left = self.grow(l_idx, rng);
        let right = self.grow(r_idx, rng);
        self.nodes[at as usize] = FlatNode::Split {
            feature: feature as u32,
            threshold,
            left,
            right,
        };
        at
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;

    fn vecs(xs: &[f64]) -> Vec<FeatureVector> {
        xs.iter()
            .map(|&x| {
                let mut v = [0.0; 32];
                v[0] = x;
                v
            })
            .collect()
    }

    #[test]
    fn constant_labels_yield_single_leaf() {
        let rows = vecs(&[1.0, 2.0, 3.0]);
        let labels = [4.0, 4.0, 4.0];
        let data = TrainMatrix {
            rows: &rows,
            labels: &labels,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pool: Vec<usize> = (0..32).collect();
        let (tree, _) = fit_tree(data, &[0, 1, 2], 32, 1, &pool, &mut rng);
        assert_eq!(tree.nodes.len(), 1);
        assert!(matches!(tree.nodes[0], FlatNode::Leaf { value, count: 3 } if value == 4.0));
    }

    #[test]
    fn step_function_split_lands_between_values() {
        let rows = vecs(&[1.0, 2.0, 3.0, 4.0]);
        let labels = [0.0, 0.0, 1.0, 1.0];
        let data = TrainMatrix {
            rows: &rows,
            labels: &labels,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (tree, imp) = fit_tree(data, &[0, 1, 2, 3], 1, 1, &[0], &mut rng);
        match tree.nodes[0] {
            FlatNode::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert!(threshold > 2.0 && threshold < 3.0, "threshold {threshold}");
            }
            _ => panic!("expected a split at the root"),
        }
        let mut probe = [0.0; 32];
        probe[0] = 1.5;
        assert_eq!(tree.predict(&probe), 0.0);
        probe[0] = 3.5;
        assert_eq!(tree.predict(&probe), 1.0);
        assert!(imp[0] > 0.0);
    }

    #[test]
    fn min_leaf_equal_to_n_gives_mean_leaf() {
        let rows = vecs(&[1.0, 2.0, 3.0, 4.0]);
        let labels = [0.0, 1.0, 1.0, 2.0];
        let data = TrainMatrix {
            rows: &rows,
            labels: &labels,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (tree, _) = fit_tree(data, &[0, 1, 2, 3], 1, 4, &[0], &mut rng);
        assert_eq!(tree.nodes.len(), 1);
        assert!(matches!(tree.nodes[0], FlatNode::Leaf { value, .. } if value == 1.0));
    }

    #[test]
    fn splits_only_use_pool_features() {
        let mut rows = vecs(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        // Feature 5 is perfectly predictive, but outside the pool.
        for (k, r) in rows.iter_mut().enumerate() {
            r[5] = if k < 3 { 0.0 } else { 1.0 };
        }
        let labels = [0.0, 0.0, 0.0, 5.0, 5.0, 5.0];
        let data = TrainMatrix {
            rows: &rows,
            labels: &labels,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (tree, _) = fit_tree(data, &[0, 1, 2, 3, 4, 5], 2, 1, &[0, 1], &mut rng);
        for f in tree.used_features() {
            assert!(f <= 1, "feature {f} escaped the pool");
        }
    }
}
