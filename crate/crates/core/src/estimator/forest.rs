//! Bagged CART classifiers with Gini impurity and per-split feature
//! subsampling.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EstimatorSpec;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Training class counts reaching this leaf.
    Leaf { votes: Vec<u32> },
}

/// A tree stored as a node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Samples with `x[feature] <= threshold` go left.
    pub fn predict_row(&self, columns: &[&[f64]], row: usize) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if columns[*feature][row] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
                Node::Leaf { votes } => return argmax_first(votes),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub n_classes: usize,
    pub n_features: usize,
}

impl ForestModel {
    /// Majority vote over trees; ties go to the smaller class index.
    pub(crate) fn predict_columns(&self, columns: &[&[f64]], n_rows: usize) -> Vec<usize> {
        let mut counts = vec![0u32; self.n_classes];
        (0..n_rows)
            .map(|i| {
                counts.iter_mut().for_each(|c| *c = 0);
                for tree in &self.trees {
                    counts[tree.predict_row(columns, i)] += 1;
                }
                argmax_first(&counts)
            })
            .collect()
    }
}

fn argmax_first(values: &[u32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Number of candidate features per split.
pub(crate) fn features_per_split(n_features: usize, fraction: Option<f64>) -> usize {
    let m = match fraction {
        Some(f) => (f * n_features as f64).round() as usize,
        None => (n_features as f64).sqrt().floor() as usize,
    };
    m.clamp(1, n_features)
}

pub(crate) fn fit(columns: &[&[f64]], target: &[usize], n_classes: usize, spec: &EstimatorSpec) -> ForestModel {
    let n = target.len();
    let m_try = features_per_split(columns.len(), spec.rf_feature_subsample);
    let trees = (0..spec.rf_n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(t as u64);
            let rows: Vec<usize> = if spec.rf_bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = TreeBuilder {
                columns,
                target,
                n_classes,
                m_try,
                max_depth: spec.rf_max_depth,
                min_leaf: spec.rf_min_leaf.max(1),
                rng,
                nodes: Vec::new(),
            };
            builder.grow(rows, 0);
            DecisionTree { nodes: builder.nodes }
        })
        .collect();
    ForestModel {
        trees,
        n_classes,
        n_features: columns.len(),
    }
}

struct TreeBuilder<'a> {
    columns: &'a [&'a [f64]],
    target: &'a [usize],
    n_classes: usize,
    m_try: usize,
    max_depth: usize,
    min_leaf: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let votes = self.class_counts(&rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { votes: votes.clone() });

        let pure = votes.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(&rows, &votes) else {
            return id;
        };
        let col = self.columns[split.feature];
        let (left, right): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&r| col[r] <= split.threshold);
        let left = self.grow(left, depth + 1);
        let right = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    fn class_counts(&self, rows: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &r in rows {
            counts[self.target[r]] += 1;
        }
        counts
    }

    fn best_split(&mut self, rows: &[usize], parent: &[u32]) -> Option<BestSplit> {
        let mut candidates = sample(&mut self.rng, self.columns.len(), self.m_try).into_vec();
        candidates.sort_unstable();
        let n = rows.len();
        let parent_impurity = gini(parent, n as u32);
        let mut best: Option<BestSplit> = None;
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
        let mut left = vec![0u32; self.n_classes];
        let mut right = vec![0u32; self.n_classes];

        for feature in candidates {
            let col = self.columns[feature];
            order.clear();
            order.extend(rows.iter().map(|&r| (col[r], self.target[r])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0);
            right.copy_from_slice(parent);
            for i in 0..n - 1 {
                let (value, label) = order[i];
                left[label] += 1;
                right[label] -= 1;
                let n_left = i + 1;
                if n_left < self.min_leaf || n - n_left < self.min_leaf {
                    continue;
                }
                let next = order[i + 1].0;
                if next <= value {
                    continue;
                }
                let impurity = (n_left as f64 * gini(&left, n_left as u32)
                    + (n - n_left) as f64 * gini(&right, (n - n_left) as u32))
                    / n as f64;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    best = Some(BestSplit {
                        feature,
                        threshold: value + (next - value) / 2.0,
                        impurity,
                    });
                }
            }
        }
        best.filter(|b| b.impurity < parent_impurity - 1e-12)
    }
}

pub(crate) fn gini(counts: &[u32], total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = f64::from(total);
    1.0 - counts.iter().map(|&c| (f64::from(c) / t).powi(2)).sum::<f64>()
}
