//! Random forest regression: bagging over CART trees, 5-fold
//! cross-validation for hyperparameters, the threshold decision rule
//! with its tree-majority safeguard, importance-based feature subset
//! selection, and JSON model round-tripping.

mod tree;

pub use tree::{fit_tree, FlatNode, TrainMatrix, Tree};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::solver::Strategy;

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("too few samples: have {have}, need at least {need}")]
    TooFewSamples { have: usize, need: usize },
    #[error("model schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn mix_seed(master: u64, index: u64) -> u64 {
    // splitmix64 step keeps per-tree streams decorrelated.
    let mut z = master
        .wrapping_add(index.wrapping_mul(0x9e3779b97f4a7c15))
        .wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Training-time knobs; `tau` and `majority_quota` ride along into the
/// model because they define its decision behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub mtry: usize,
    pub min_leaf: usize,
    pub bootstrap: bool,
    pub tau: f64,
    /// Fraction of trees that must individually favor NLC before the
    /// decision deactivates local cuts; `None` disables the safeguard.
    pub majority_quota: Option<f64>,
    pub feature_subset: Option<Vec<usize>>,
    pub rng_master_seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            mtry: 10,
            min_leaf: 1,
            bootstrap: true,
            tau: 0.0,
            majority_quota: None,
            feature_subset: None,
            rng_master_seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub v: u32,
    pub params: ForestParams,
    /// Out-of-bag RMSE observed during training, when bootstrap was on.
    pub oob_rmse: Option<f64>,
    /// Total SSE reduction credited to each feature across all splits.
    pub importance: Vec<f64>,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn predict(&self, x: &FeatureVector) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }

    /// Fraction of trees whose individual prediction exceeds tau.
    pub fn fraction_above_tau(&self, x: &FeatureVector) -> f64 {
        let above = self
            .trees
            .iter()
            .filter(|t| t.predict(x) > self.params.tau)
            .count();
        above as f64 / self.trees.len() as f64
    }

    /// The LC/NLC rule: deactivate local cuts only when the mean
    /// prediction exceeds tau and, if the safeguard is armed, more than
    /// the quota of individual trees agree.
    pub fn decide(&self, x: &FeatureVector) -> Strategy {
        if self.predict(x) <= self.params.tau {
            return Strategy::Lc;
        }
        if let Some(quota) = self.params.majority_quota {
            if self.fraction_above_tau(x) <= quota {
                return Strategy::Lc;
            }
        }
        Strategy::Nlc
    }
}

/// Fits a bagged forest. Each tree draws its bootstrap and its split
/// candidates from an RNG seeded by (master seed, tree index), so the
/// model is identical however many threads participate.
pub fn fit_forest(data: TrainMatrix, params: &ForestParams) -> Result<ForestModel, ForestError> {
    if data.is_empty() {
        return Err(ForestError::TooFewSamples { have: 0, need: 1 });
    }
    let n = data.len();
    let n_features = data.rows[0].len();
    let pool: Vec<usize> = match &params.feature_subset {
        Some(subset) => subset.clone(),
        None => (0..n_features).collect(),
    };

    let fitted: Vec<(Tree, Vec<f64>, Vec<bool>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.rng_master_seed, t as u64));
            let mut in_bag = vec![false; n];
            let indices: Vec<usize> = if params.bootstrap {
                (0..n)
                    .map(|_| {
                        let i = rng.gen_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect()
            } else {
                in_bag.iter_mut().for_each(|b| *b = true);
                (0..n).collect()
            };
            let (tree, importance) =
                fit_tree(data, &indices, params.mtry, params.min_leaf, &pool, &mut rng);
            (tree, importance, in_bag)
        })
        .collect();

    let mut importance = vec![0.0; n_features];
    for (_, imp, _) in &fitted {
        for (a, b) in importance.iter_mut().zip(imp) {
            *a += b;
        }
    }

    let oob_rmse = if params.bootstrap {
        let mut se = 0.0;
        let mut covered = 0usize;
        for (i, row) in data.rows.iter().enumerate() {
            let mut sum = 0.0;
            let mut cnt = 0usize;
            for (tree, _, in_bag) in &fitted {
                if !in_bag[i] {
                    sum += tree.predict(row);
                    cnt += 1;
                }
            }
            if cnt > 0 {
                let err = sum / cnt as f64 - data.labels[i];
                se += err * err;
                covered += 1;
            }
        }
        (covered > 0).then(|| (se / covered as f64).sqrt())
    } else {
        None
    };

    Ok(ForestModel {
        v: 1,
        params: params.clone(),
        oob_rmse,
        importance,
        trees: fitted.into_iter().map(|(t, _, _)| t).collect(),
    })
}

pub fn rmse(pred: &[f64], truth: &[f64]) -> f64 {
    let n = pred.len().max(1);
    let se: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    (se / n as f64).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvCell {
    pub mtry: usize,
    pub min_leaf: usize,
    pub fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub cells: Vec<CvCell>,
    pub best_mtry: usize,
    pub best_min_leaf: usize,
}

/// Default hyperparameter grid: mtry near sqrt(p), p/3 and p, crossed
/// with two leaf sizes.
pub fn default_grid() -> Vec<(usize, usize)> {
    let mut grid = Vec::new();
    for mtry in [5, 10, 32] {
        for min_leaf in [1, 5] {
            grid.push((mtry, min_leaf));
        }
    }
    grid
}

/// k-fold cross-validation over the grid; picks the cell with the
/// smallest mean validation RMSE, ties toward smaller mtry then smaller
/// min_leaf. `cv_trees` bounds the ensemble size used inside the folds.
pub fn cross_validate(
    data: TrainMatrix,
    grid: &[(usize, usize)],
    k: usize,
    cv_trees: usize,
    base: &ForestParams,
) -> Result<CvReport, ForestError> {
    let n = data.len();
    if n < k {
        return Err(ForestError::TooFewSamples { have: n, need: k });
    }
    // Seeded random partition into k near-equal folds.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(base.rng_master_seed, 0xf01d));
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (pos, &i) in order.iter().enumerate() {
        folds[pos % k].push(i);
    }

    let mut cells = Vec::new();
    for &(mtry, min_leaf) in grid {
        let mut fold_rmse = Vec::with_capacity(k);
        for fold in &folds {
            let hold: Vec<bool> = {
                let mut h = vec![false; n];
                for &i in fold {
                    h[i] = true;
                }
                h
            };
            let mut rows = Vec::with_capacity(n - fold.len());
            let mut labels = Vec::with_capacity(n - fold.len());
            for i in 0..n {
                if !hold[i] {
                    rows.push(data.rows[i]);
                    labels.push(data.labels[i]);
                }
            }
            let params = ForestParams {
                n_trees: cv_trees,
                mtry,
                min_leaf,
                ..base.clone()
            };
            let model = fit_forest(
                TrainMatrix {
                    rows: &rows,
                    labels: &labels,
                },
                &params,
            )?;
            let pred: Vec<f64> = fold.iter().map(|&i| model.predict(&data.rows[i])).collect();
            let truth: Vec<f64> = fold.iter().map(|&i| data.labels[i]).collect();
            fold_rmse.push(rmse(&pred, &truth));
        }
        let mean_rmse = fold_rmse.iter().sum::<f64>() / k as f64;
        cells.push(CvCell {
            mtry,
            min_leaf,
            fold_rmse,
            mean_rmse,
        });
    }
    let best = cells
        .iter()
        .min_by(|a, b| {
            a.mean_rmse
                .total_cmp(&b.mean_rmse)
                .then(a.mtry.cmp(&b.mtry))
                .then(a.min_leaf.cmp(&b.min_leaf))
        })
        .expect("non-empty grid");
    Ok(CvReport {
        k,
        best_mtry: best.mtry,
        best_min_leaf: best.min_leaf,
        cells: cells.clone(),
    })
}

/// Ranks features by accumulated importance and refits on the top
/// `max_features`; the returned model splits only inside that subset.
pub fn select_features(
    data: TrainMatrix,
    model: &ForestModel,
    max_features: usize,
) -> Result<ForestModel, ForestError> {
    let mut ranked: Vec<usize> = (0..model.importance.len()).collect();
    ranked.sort_by(|&a, &b| {
        model.importance[b]
            .total_cmp(&model.importance[a])
            .then(a.cmp(&b))
    });
    let mut subset: Vec<usize> = ranked.into_iter().take(max_features).collect();
    subset.sort_unstable();
    let params = ForestParams {
        feature_subset: Some(subset),
        mtry: model.params.mtry.min(max_features),
        ..model.params.clone()
    };
    fit_forest(data, &params)
}

/// Serializes the model as JSON (schema version 1).
pub fn save_model(model: &ForestModel, path: &std::path::Path) -> Result<(), ForestError> {
    let json = serde_json::to_string(model).expect("model serializes");
    std::fs::write(path, json)?;
    Ok(())
}

/// Loads a model, rejecting unknown schema versions and files that do
/// not parse as a model at all.
pub fn load_model(path: &std::path::Path) -> Result<ForestModel, ForestError> {
    let text = std::fs::read_to_string(path)?;
    let model: ForestModel = serde_json::from_str(&text)
        .map_err(|e| ForestError::SchemaMismatch(format!("not a model file: {e}")))?;
    if model.v != 1 {
        return Err(ForestError::SchemaMismatch(format!(
            "unsupported version {}",
            model.v
        )));
    }
    Ok(model)
}

/// Collapses regression labels to their sign for the classification
/// baseline; zero (equal runtimes) counts as the LC side.
pub fn to_classification_labels(labels: &[f64]) -> Vec<f64> {
    labels
        .iter()
        .map(|&y| if y > 0.0 { 1.0 } else { -1.0 })
        .collect()
}
