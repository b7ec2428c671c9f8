//! CART binary trees: Gini impurity, exhaustive threshold search, and
//! seeded recursive growth.
//!
//! Split search is totally ordered so trees are reproducible: candidate
//! thresholds sit at midpoints of consecutive distinct sorted values, and
//! ties in impurity decrease resolve to the lower feature index, then the
//! lower threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label};
use crate::error::{Error, Result};

/// Gini impurity of a binary count pair: `1 - sum((c/total)^2)`.
pub fn gini(class_counts: [usize; 2]) -> Result<f64> {
    let total = class_counts[0] + class_counts[1];
    if total == 0 {
        return Err(Error::EmptyConfusion);
    }
    let t = total as f64;
    let p0 = class_counts[0] as f64 / t;
    let p1 = class_counts[1] as f64 / t;
    Ok(1.0 - p0 * p0 - p1 * p1)
}

/// A chosen split: route left when `value <= threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

/// Column-major copy of a training set, shared by all trees of a forest.
pub(crate) struct TrainingView {
    pub columns: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl TrainingView {
    pub fn from_dataset(ds: &Dataset) -> TrainingView {
        let n = ds.len();
        let d = ds.n_features();
        let mut columns = vec![Vec::with_capacity(n); d];
        let mut labels = Vec::with_capacity(n);
        for s in ds.samples() {
            for (j, &v) in s.features.iter().enumerate() {
                columns[j].push(v);
            }
            labels.push(s.label.index() as u8);
        }
        TrainingView { columns, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    fn count_rows(&self, rows: &[u32]) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &r in rows {
            counts[self.labels[r as usize] as usize] += 1;
        }
        counts
    }
}

/// Best split over the given rows, considering only `candidate_features`.
///
/// Returns `None` when no candidate threshold strictly decreases the
/// weighted Gini impurity (pure node, inseparable duplicates, or fewer
/// than two samples).
pub fn best_split(set: &Dataset, rows: &[usize], candidate_features: &[usize]) -> Option<Split> {
    let view = TrainingView::from_dataset(set);
    let rows: Vec<u32> = rows.iter().map(|&r| r as u32).collect();
    let counts = view.count_rows(&rows);
    let mut scratch = Vec::new();
    best_split_view(&view, &rows, counts, candidate_features, &mut scratch)
}

/// Core split search on the column view. `scratch` is reused across calls
/// to avoid per-node allocation.
pub(crate) fn best_split_view(
    view: &TrainingView,
    rows: &[u32],
    parent_counts: [usize; 2],
    candidate_features: &[usize],
    scratch: &mut Vec<(f64, u8)>,
) -> Option<Split> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let parent_gini = gini(parent_counts).expect("non-empty node");
    let n_f = n as f64;
    let total1 = parent_counts[1] as f64;

    let mut best: Option<Split> = None;
    for &feature in candidate_features {
        let col = &view.columns[feature];
        scratch.clear();
        scratch.extend(
            rows.iter()
                .map(|&r| (col[r as usize], view.labels[r as usize])),
        );
        scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        // Scan boundaries between distinct consecutive values.
        let mut left_n = 0.0;
        let mut left_1 = 0.0;
        for i in 0..n - 1 {
            let (v, y) = scratch[i];
            left_n += 1.0;
            left_1 += y as f64;
            let next = scratch[i + 1].0;
            if v == next {
                continue;
            }
            let right_n = n_f - left_n;
            let right_1 = total1 - left_1;
            let gl = gini_f(left_n, left_1);
            let gr = gini_f(right_n, right_1);
            let decrease = parent_gini - (left_n / n_f) * gl - (right_n / n_f) * gr;
            if decrease > 0.0 && best.as_ref().map_or(true, |b| decrease > b.impurity_decrease) {
                best = Some(Split {
                    feature,
                    threshold: midpoint(v, next),
                    impurity_decrease: decrease,
                });
            }
        }
    }
    best
}

fn gini_f(n: f64, ones: f64) -> f64 {
    let p1 = ones / n;
    let p0 = 1.0 - p1;
    1.0 - p0 * p0 - p1 * p1
}

/// Midpoint of two consecutive distinct values. If rounding collapses it
/// onto `lo`, the `<=` routing rule still separates `lo` from `hi`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        counts: [u32; 2],
    },
}

/// A trained CART tree as a flat node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    /// Leaf class counts reached by `features`.
    pub fn leaf_counts(&self, features: &[f64]) -> [u32; 2] {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if features[*feature as usize] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    /// Majority vote of the reached leaf; an exact tie votes benign.
    pub fn predict(&self, features: &[f64]) -> Label {
        let counts = self.leaf_counts(features);
        if counts[1] > counts[0] {
            Label::Malicious
        } else {
            Label::Benign
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, *left as usize).max(walk(nodes, *right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Per-tree growth state: feature-sampling RNG plus reusable scratch.
pub(crate) struct Grower<'a, R: Rng> {
    pub view: &'a TrainingView,
    pub rng: R,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub features_per_node: usize,
    scratch: Vec<(f64, u8)>,
    feature_pool: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a, R: Rng> Grower<'a, R> {
    pub fn new(
        view: &'a TrainingView,
        rng: R,
        max_depth: Option<usize>,
        min_samples_split: usize,
        features_per_node: usize,
    ) -> Self {
        Grower {
            view,
            rng,
            max_depth,
            min_samples_split,
            features_per_node,
            scratch: Vec::new(),
            feature_pool: Vec::new(),
            nodes: Vec::new(),
        }
    }

    pub fn grow(mut self, rows: &mut [u32]) -> Tree {
        debug_assert!(!rows.is_empty());
        self.grow_node(rows, 0);
        Tree { nodes: self.nodes }
    }

    fn grow_node(&mut self, rows: &mut [u32], depth: usize) -> u32 {
        let counts = self.view.count_rows(rows);
        let stop = counts[0] == 0
            || counts[1] == 0
            || rows.len() < self.min_samples_split
            || self.max_depth.is_some_and(|d| depth >= d);
        if !stop {
            if let Some(split) = self.pick_split(rows, counts) {
                let mid = partition_rows(rows, &self.view.columns[split.feature], split.threshold);
                // A chosen split always has samples on both sides.
                debug_assert!(mid > 0 && mid < rows.len());
                let slot = self.nodes.len() as u32;
                self.nodes.push(Node::Leaf { counts: [0, 0] }); // placeholder
                let (left_rows, right_rows) = rows.split_at_mut(mid);
                let left = self.grow_node(left_rows, depth + 1);
                let right = self.grow_node(right_rows, depth + 1);
                self.nodes[slot as usize] = Node::Split {
                    feature: split.feature as u32,
                    threshold: split.threshold,
                    left,
                    right,
                };
                return slot;
            }
        }
        let slot = self.nodes.len() as u32;
        self.nodes.push(Node::Leaf {
            counts: [counts[0] as u32, counts[1] as u32],
        });
        slot
    }

    fn pick_split(&mut self, rows: &[u32], counts: [usize; 2]) -> Option<Split> {
        let d = self.view.columns.len();
        let m = self.features_per_node.min(d);
        if m == d {
            self.feature_pool.clear();
            self.feature_pool.extend(0..d);
        } else {
            // Ascending order makes the tie-break by feature index total.
            let picked = rand::seq::index::sample(&mut self.rng, d, m);
            self.feature_pool.clear();
            self.feature_pool.extend(picked.into_iter());
            self.feature_pool.sort_unstable();
        }
        // Move the pool out to appease the borrow checker; swap back after.
        let pool = std::mem::take(&mut self.feature_pool);
        let split = best_split_view(self.view, rows, counts, &pool, &mut self.scratch);
        self.feature_pool = pool;
        split
    }
}

/// In-place partition: rows with `column[row] <= threshold` first.
/// Returns the boundary index.
fn partition_rows(rows: &mut [u32], column: &[f64], threshold: f64) -> usize {
    let mut lo = 0usize;
    let mut hi = rows.len();
    while lo < hi {
        if column[rows[lo] as usize] <= threshold {
            lo += 1;
        } else {
            hi -= 1;
            rows.swap(lo, hi);
        }
    }
    lo
}
