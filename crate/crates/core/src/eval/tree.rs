//! Gini CART and a bagged forest built from it.

use nalgebra::DMatrix;
use rand::Rng as _;

use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf {
        positive_fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split; `None` means all of them.
    pub features_per_split: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl DecisionTree {
    /// Fits on the given rows (duplicates allowed, as in a bootstrap).
    /// `rng` is only consulted when a feature subset is requested.
    pub fn fit(x: &DMatrix<f64>, y: &[u8], rows: Vec<usize>, params: &TreeParams, rng: &mut Rng) -> Self {
        let mut tree = DecisionTree { nodes: Vec::new() };
        tree.grow(x, y, rows, 0, params, rng);
        tree
    }

    fn grow(
        &mut self,
        x: &DMatrix<f64>,
        y: &[u8],
        rows: Vec<usize>,
        depth: usize,
        params: &TreeParams,
        rng: &mut Rng,
    ) -> usize {
        let id = self.nodes.len();
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| y[r] == 1).count();
        let leaf = Node::Leaf {
            positive_fraction: if n == 0 { 0.0 } else { pos as f64 / n as f64 },
        };
        self.nodes.push(leaf);
        let min_leaf = params.min_leaf.max(1);
        if depth >= params.max_depth || pos == 0 || pos == n || n < 2 * min_leaf {
            return id;
        }
        let Some(best) = best_split(x, y, &rows, pos, min_leaf, params, rng) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&r| x[(r, best.feature)] <= best.threshold);
        let left = self.grow(x, y, left_rows, depth + 1, params, rng);
        let right = self.grow(x, y, right_rows, depth + 1, params, rng);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    pub fn predict_row(&self, row: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { positive_fraction } => return positive_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row(feature) <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn best_split(
    x: &DMatrix<f64>,
    y: &[u8],
    rows: &[usize],
    pos: usize,
    min_leaf: usize,
    params: &TreeParams,
    rng: &mut Rng,
) -> Option<BestSplit> {
    let d = x.ncols();
    let n = rows.len();
    let features: Vec<usize> = match params.features_per_split {
        Some(k) if k < d => {
            let mut f = rand::seq::index::sample(rng, d, k.max(1)).into_vec();
            f.sort_unstable();
            f
        }
        _ => (0..d).collect(),
    };
    let parent = n as f64 * gini(pos, n);
    let mut best: Option<BestSplit> = None;
    let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(n);
    for f in features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (x[(r, f)], y[r])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut left_pos = 0;
        for i in 0..n - 1 {
            left_pos += sorted[i].1 as usize;
            let nl = i + 1;
            if sorted[i].0 == sorted[i + 1].0 || nl < min_leaf || n - nl < min_leaf {
                continue;
            }
            let impurity = nl as f64 * gini(left_pos, nl) + (n - nl) as f64 * gini(pos - left_pos, n - nl);
            let score = parent - impurity;
            // require a real impurity decrease; earlier features win ties
            if score > 1e-12 && best.as_ref().is_none_or(|b| score > b.score + 1e-12) {
                let mid = 0.5 * (sorted[i].0 + sorted[i + 1].0);
                let threshold = if mid < sorted[i + 1].0 { mid } else { sorted[i].0 };
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<DecisionTree>,
}

impl Forest {
    /// Bagged trees with per-split feature subsampling. A single-tree forest
    /// is fit on the full sample (no bootstrap).
    pub fn fit(x: &DMatrix<f64>, y: &[u8], n_trees: usize, params: &TreeParams, seed: u64) -> Self {
        let n = x.nrows();
        let trees = (0..n_trees)
            .map(|t| {
                let mut r = rng::seeded(rng::derive_seed(seed, &[t as u64]));
                let rows: Vec<usize> = if n_trees > 1 {
                    (0..n).map(|_| r.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(x, y, rows, params, &mut r)
            })
            .collect();
        Forest { trees }
    }

    pub fn predict_row(&self, row: impl Fn(usize) -> f64 + Copy) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }
}
