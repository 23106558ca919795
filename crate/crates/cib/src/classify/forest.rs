//! Random forest of CART trees on the Gini criterion. Trees may be built
//! in parallel, but every per-tree random stream is derived from the tree
//! index and aggregation walks trees in index order, so results are
//! identical whatever the thread count.

use super::ClassifyError;
use crate::rng::derive_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Forest hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            min_leaf: 1,
            seed: 42,
        }
    }
}

/// Number of candidate features per split: ceil(sqrt(p)).
pub fn mtry(n_features: usize) -> usize {
    (n_features as f64).sqrt().ceil() as usize
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        pos_frac: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// One CART tree stored as an index-linked node arena.
#[derive(Debug, Clone)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Fraction of positive training weight in the leaf this row lands in.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { pos_frac } => return *pos_frac,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// A trained forest with its out-of-bag bookkeeping.
#[derive(Debug, Clone)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    /// Impurity-decrease importances, normalized to sum to one when any
    /// split happened at all.
    pub importances: Vec<f64>,
    /// Mean leaf positive fraction over trees where the sample was out of
    /// bag; None when no tree left it out.
    pub oob_scores: Vec<Option<f64>>,
    /// Majority vote over out-of-bag trees; ties predict negative.
    pub oob_class: Vec<Option<bool>>,
    /// Fraction of training samples with at least one out-of-bag tree.
    pub oob_coverage: f64,
}

struct TreeOutcome {
    tree: Tree,
    importance: Vec<f64>,
    /// (sample index, leaf positive fraction) for out-of-bag samples.
    oob: Vec<(usize, f64)>,
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

fn grow_tree(
    x: &[Vec<f64>],
    y: &[bool],
    indices: Vec<usize>,
    min_leaf: usize,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
    importance: &mut [f64],
) -> usize {
    let p = x[0].len();
    let total = indices.len();
    let pos = indices.iter().filter(|&&i| y[i]).count();
    let node_gini = gini(pos, total);
    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            pos_frac: pos as f64 / total as f64,
        });
        nodes.len() - 1
    };
    if pos == 0 || pos == total || total <= min_leaf {
        return make_leaf(nodes);
    }

    // Candidate features: mtry drawn without replacement, then scanned in
    // ascending index order so equal gains resolve to the lowest feature.
    let m = mtry(p);
    let mut pool: Vec<usize> = (0..p).collect();
    for i in 0..m {
        let j = rng.random_range(i..p);
        pool.swap(i, j);
    }
    let mut candidates: Vec<usize> = pool[..m].to_vec();
    candidates.sort_unstable();

    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    for &feat in &candidates {
        let mut vals: Vec<(f64, bool)> = indices.iter().map(|&i| (x[i][feat], y[i])).collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut left_pos = 0usize;
        let mut left_n = 0usize;
        for k in 0..vals.len() - 1 {
            left_n += 1;
            if vals[k].1 {
                left_pos += 1;
            }
            if vals[k].0 == vals[k + 1].0 {
                continue;
            }
            let right_n = total - left_n;
            let right_pos = pos - left_pos;
            let weighted = left_n as f64 * gini(left_pos, left_n)
                + right_n as f64 * gini(right_pos, right_n);
            let gain = total as f64 * node_gini - weighted;
            let threshold = 0.5 * (vals[k].0 + vals[k + 1].0);
            let better = match best {
                None => true,
                Some((g, _, _)) => gain > g,
            };
            if better {
                best = Some((gain, feat, threshold));
            }
        }
    }

    let Some((gain, feature, threshold)) = best else {
        // Every candidate feature is constant across this node.
        return make_leaf(nodes);
    };
    importance[feature] += gain;

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| x[i][feature] <= threshold);
    let slot = nodes.len();
    nodes.push(Node::Leaf { pos_frac: 0.0 }); // placeholder until children exist
    let left = grow_tree(x, y, left_idx, min_leaf, rng, nodes, importance);
    let right = grow_tree(x, y, right_idx, min_leaf, rng, nodes, importance);
    nodes[slot] = Node::Split {
        feature,
        threshold,
        left,
        right,
    };
    slot
}

fn build_one_tree(
    x: &[Vec<f64>],
    y: &[bool],
    min_leaf: usize,
    tree_seed: u64,
) -> TreeOutcome {
    let n = x.len();
    let p = x[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
    let mut in_bag = vec![false; n];
    let mut bootstrap = Vec::with_capacity(n);
    for _ in 0..n {
        let i = rng.random_range(0..n);
        in_bag[i] = true;
        bootstrap.push(i);
    }
    let mut nodes = Vec::new();
    let mut importance = vec![0.0; p];
    grow_tree(x, y, bootstrap, min_leaf, &mut rng, &mut nodes, &mut importance);
    let tree = Tree { nodes };
    let oob = (0..n)
        .filter(|&i| !in_bag[i])
        .map(|i| (i, tree.predict(&x[i])))
        .collect();
    TreeOutcome {
        tree,
        importance,
        oob,
    }
}

/// Train a forest on raw-scale features.
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[bool],
    cfg: &ForestConfig,
) -> Result<ForestModel, ClassifyError> {
    let p = x.first().map_or(0, Vec::len);
    if x.is_empty() || p == 0 || x.len() != y.len() {
        return Err(ClassifyError::BadInput(format!(
            "need matching nonempty features and labels, got {} rows and {} labels",
            x.len(),
            y.len()
        )));
    }
    if x.iter().any(|r| r.len() != p) {
        return Err(ClassifyError::BadInput("ragged feature rows".into()));
    }
    if x.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ClassifyError::BadInput("non-finite feature value".into()));
    }
    if cfg.n_trees == 0 || cfg.min_leaf == 0 {
        return Err(ClassifyError::BadInput(
            "n_trees and min_leaf must be positive".into(),
        ));
    }

    let outcomes: Vec<TreeOutcome> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| build_one_tree(x, y, cfg.min_leaf, derive_seed(cfg.seed, t as u64)))
        .collect();

    // Sequential aggregation in tree order keeps results independent of
    // the parallel schedule.
    let n = x.len();
    let mut importances = vec![0.0; p];
    let mut score_sum = vec![0.0; n];
    let mut pos_votes = vec![0u32; n];
    let mut counts = vec![0u32; n];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    for outcome in outcomes {
        for (k, v) in outcome.importance.iter().enumerate() {
            importances[k] += v;
        }
        for &(i, frac) in &outcome.oob {
            score_sum[i] += frac;
            counts[i] += 1;
            if frac > 0.5 {
                pos_votes[i] += 1;
            }
        }
        trees.push(outcome.tree);
    }
    let total_importance: f64 = importances.iter().sum();
    if total_importance > 0.0 {
        for v in &mut importances {
            *v /= total_importance;
        }
    }
    let oob_scores: Vec<Option<f64>> = (0..n)
        .map(|i| {
            if counts[i] > 0 {
                Some(score_sum[i] / counts[i] as f64)
            } else {
                None
            }
        })
        .collect();
    let oob_class: Vec<Option<bool>> = (0..n)
        .map(|i| {
            if counts[i] > 0 {
                Some(2 * pos_votes[i] > counts[i])
            } else {
                None
            }
        })
        .collect();
    let covered = counts.iter().filter(|&&c| c > 0).count();
    Ok(ForestModel {
        trees,
        n_features: p,
        importances,
        oob_scores,
        oob_class,
        oob_coverage: covered as f64 / n as f64,
    })
}

impl ForestModel {
    /// Forest score: mean leaf positive fraction over all trees.
    pub fn predict_score(&self, row: &[f64]) -> f64 {
        assert_eq!(row.len(), self.n_features, "feature count mismatch");
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        sum / self.trees.len() as f64
    }
}
