//! CART regression trees grown by greedy variance reduction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Internal { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

/// One tree node. `n_samples` counts the training rows that reached the
/// node (bootstrap repeats included); attribution weighting depends on it.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub n_samples: usize,
}

/// Nodes in pre-order; the root is index 0 and children follow parents.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeFitParams {
    /// Features sampled per node, 1..=p.
    pub max_features: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
}

/// Fits one tree on `rows` (indices into a row-major `features` matrix
/// with `n_features` columns; repeats act as sample weights).
///
/// Splits minimize the summed child SSE over a per-node feature sample;
/// candidate thresholds sit midway between consecutive distinct sorted
/// values. Ties go to the lowest feature index, then lowest threshold. A
/// node becomes a leaf when no candidate strictly reduces its SSE, it is
/// pure, the depth cap is hit, or `min_samples_leaf` would be violated.
pub fn fit_tree(
    features: &[f64],
    n_features: usize,
    y: &[f64],
    rows: Vec<usize>,
    params: &TreeFitParams,
    rng: &mut Rng,
) -> Result<RegressionTree> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("cannot fit a tree on zero rows".into()));
    }
    if n_features == 0 || params.max_features == 0 || params.max_features > n_features {
        return Err(Error::Validation(alloc::format!(
            "max_features must be in 1..={n_features}"
        )));
    }
    if params.min_samples_leaf == 0 {
        return Err(Error::Validation("min_samples_leaf must be at least 1".into()));
    }
    let mut b = Builder { x: features, p: n_features, y, params, nodes: Vec::new() };
    b.build(rows, 0, rng);
    Ok(RegressionTree { nodes: b.nodes })
}

struct Builder<'a> {
    x: &'a [f64],
    p: usize,
    y: &'a [f64],
    params: &'a TreeFitParams,
    nodes: Vec<TreeNode>,
}

struct Split {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize, rng: &mut Rng) -> usize {
        let n = rows.len();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for &r in &rows {
            sum += self.y[r];
            sum_sq += self.y[r] * self.y[r];
        }
        let mean = sum / n as f64;
        let node_sse = (sum_sq - sum * sum / n as f64).max(0.0);

        let id = self.nodes.len();
        self.nodes.push(TreeNode { kind: NodeKind::Leaf { value: mean }, n_samples: n });

        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if n < 2 * self.params.min_samples_leaf || node_sse <= 0.0 || depth_capped {
            return id;
        }
        let Some(split) = self.best_split(&rows, node_sse, rng) else {
            return id;
        };

        let mut left_rows = Vec::with_capacity(n);
        let mut right_rows = Vec::with_capacity(n);
        for &r in &rows {
            if self.x[r * self.p + split.feature] <= split.threshold {
                left_rows.push(r);
            } else {
                right_rows.push(r);
            }
        }
        drop(rows);
        let left = self.build(left_rows, depth + 1, rng);
        let right = self.build(right_rows, depth + 1, rng);
        self.nodes[id].kind = NodeKind::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, rows: &[usize], node_sse: f64, rng: &mut Rng) -> Option<Split> {
        let n = rows.len();
        let msl = self.params.min_samples_leaf;
        let candidates = rng.sample_distinct(self.params.max_features, self.p);
        let mut best: Option<Split> = None;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
        for feature in candidates {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.x[r * self.p + feature], self.y[r])));
            pairs.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("features are finite"));
            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            let mut total_sum = 0.0;
            let mut total_sq = 0.0;
            for &(_, yv) in &pairs {
                total_sum += yv;
                total_sq += yv * yv;
            }
            for i in 1..n {
                left_sum += pairs[i - 1].1;
                left_sq += pairs[i - 1].1 * pairs[i - 1].1;
                let (a, b) = (pairs[i - 1].0, pairs[i].0);
                if a == b || i < msl || n - i < msl {
                    continue;
                }
                let mut threshold = (a + b) / 2.0;
                // Adjacent floats can round the midpoint up to b, which
                // would drag b's duplicates into the left child; pin to a.
                if threshold >= b {
                    threshold = a;
                }
                let right_sum = total_sum - left_sum;
                let right_sq = total_sq - left_sq;
                let sse_l = (left_sq - left_sum * left_sum / i as f64).max(0.0);
                let sse_r = (right_sq - right_sum * right_sum / (n - i) as f64).max(0.0);
                let score = sse_l + sse_r;
                if score < node_sse && best.as_ref().is_none_or(|b| score < b.score) {
                    best = Some(Split { score, feature, threshold });
                }
            }
        }
        best
    }
}

impl RegressionTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn from_nodes(nodes: Vec<TreeNode>, n_features: usize) -> Result<RegressionTree> {
        let t = RegressionTree { nodes };
        t.validate(n_features)?;
        Ok(t)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Leaf { .. })).count()
    }

    /// Longest root-to-leaf path length in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], id: usize) -> usize {
            match nodes[id].kind {
                NodeKind::Leaf { .. } => 0,
                NodeKind::Internal { left, right, .. } => {
                    1 + walk(nodes, left).max(walk(nodes, right))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id].kind {
                NodeKind::Leaf { value } => return value,
                NodeKind::Internal { feature, threshold, left, right } => {
                    id = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Cover-weighted expected leaf value, the tree's output under its
    /// own training distribution.
    pub fn expectation(&self) -> f64 {
        self.node_expectation(0)
    }

    fn node_expectation(&self, id: usize) -> f64 {
        match self.nodes[id].kind {
            NodeKind::Leaf { value } => value,
            NodeKind::Internal { left, right, .. } => {
                let nl = self.nodes[left].n_samples as f64;
                let nr = self.nodes[right].n_samples as f64;
                (nl * self.node_expectation(left) + nr * self.node_expectation(right)) / (nl + nr)
            }
        }
    }

    /// Structural invariants: in-bounds pre-order children, finite
    /// values, covers that add up, every node reachable exactly once.
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Validation("tree has no nodes".into()));
        }
        let mut seen = alloc::vec![false; self.nodes.len()];
        self.validate_node(0, n_features, &mut seen)?;
        if seen.iter().any(|&s| !s) {
            return Err(Error::Validation("tree holds unreachable nodes".into()));
        }
        Ok(())
    }

    fn validate_node(&self, id: usize, p: usize, seen: &mut [bool]) -> Result<()> {
        if id >= self.nodes.len() || seen[id] {
            return Err(Error::Validation("tree child indices are malformed".into()));
        }
        seen[id] = true;
        let node = &self.nodes[id];
        match node.kind {
            NodeKind::Leaf { value } => {
                if !value.is_finite() {
                    return Err(Error::Validation("leaf value must be finite".into()));
                }
                Ok(())
            }
            NodeKind::Internal { feature, threshold, left, right } => {
                if feature >= p {
                    return Err(Error::Validation(alloc::format!(
                        "split feature {feature} out of range for {p} features"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(Error::Validation("split threshold must be finite".into()));
                }
                if left >= self.nodes.len() || right >= self.nodes.len() {
                    return Err(Error::Validation("tree child indices are malformed".into()));
                }
                if self.nodes[left].n_samples + self.nodes[right].n_samples != node.n_samples {
                    return Err(Error::Validation("child sample counts do not sum".into()));
                }
                self.validate_node(left, p, seen)?;
                self.validate_node(right, p, seen)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn fit(
        x: &[f64],
        p: usize,
        y: &[f64],
        params: &TreeFitParams,
        seed: u64,
    ) -> RegressionTree {
        let rows: Vec<usize> = (0..y.len()).collect();
        fit_tree(x, p, y, rows, params, &mut Rng::from_seed(seed)).unwrap()
    }

    fn default_params() -> TreeFitParams {
        TreeFitParams { max_features: 1, min_samples_leaf: 1, max_depth: None }
    }

    #[test]
    fn separating_feature_splits_at_midpoint() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.0, 1.0, 1.0];
        let t = fit(&x, 1, &y, &default_params(), 0);
        match t.nodes()[0].kind {
            NodeKind::Internal { feature, threshold, left, right } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 2.5);
                assert_eq!(t.nodes()[left].kind, NodeKind::Leaf { value: 0.0 });
                assert_eq!(t.nodes()[right].kind, NodeKind::Leaf { value: 1.0 });
            }
            _ => panic!("expected a split at the root"),
        }
        assert_eq!(t.predict_row(&[1.0]), 0.0);
        assert_eq!(t.predict_row(&[3.7]), 1.0);
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn constant_target_is_a_single_leaf() {
        let x = [1.0, 2.0, 3.0];
        let y = [0.25, 0.25, 0.25];
        let t = fit(&x, 1, &y, &default_params(), 0);
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.nodes()[0].kind, NodeKind::Leaf { value: 0.25 });
        assert_eq!(t.nodes()[0].n_samples, 3);
    }

    #[test]
    fn single_row_is_its_own_leaf() {
        let t = fit(&[5.0], 1, &[0.7], &default_params(), 0);
        assert_eq!(t.nodes(), &[TreeNode { kind: NodeKind::Leaf { value: 0.7 }, n_samples: 1 }]);
    }

    #[test]
    fn min_samples_leaf_blocks_small_children() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.0, 0.0, 10.0];
        let params = TreeFitParams { max_features: 1, min_samples_leaf: 2, max_depth: None };
        let t = fit(&x, 1, &y, &params, 0);
        // The best cut (3.5) would isolate one row; only 2.5 is allowed.
        match t.nodes()[0].kind {
            NodeKind::Internal { threshold, .. } => assert_eq!(threshold, 2.5),
            _ => panic!("expected a split"),
        }
        for node in t.nodes() {
            if let NodeKind::Leaf { .. } = node.kind {
                assert!(node.n_samples >= 2);
            }
        }
    }

    #[test]
    fn depth_cap_holds() {
        let x: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let y: Vec<f64> = (0..64).map(|i| (i * i) as f64).collect();
        for cap in [0usize, 1, 2, 3] {
            let params =
                TreeFitParams { max_features: 1, min_samples_leaf: 1, max_depth: Some(cap) };
            let t = fit(&x, 1, &y, &params, 9);
            assert!(t.depth() <= cap, "cap {cap} depth {}", t.depth());
            t.validate(1).unwrap();
        }
    }

    #[test]
    fn covers_sum_down_the_tree() {
        let mut rng = Rng::from_seed(31);
        let n = 200;
        let p = 3;
        let x: Vec<f64> = (0..n * p).map(|_| rng.next_f64()).collect();
        let y: Vec<f64> = (0..n).map(|i| x[i * p] * 2.0 + x[i * p + 2]).collect();
        let params = TreeFitParams { max_features: 3, min_samples_leaf: 1, max_depth: None };
        let t = fit(&x, p, &y, &params, 5);
        t.validate(p).unwrap();
        assert_eq!(t.nodes()[0].n_samples, n);
        let leaf_total: usize = t
            .nodes()
            .iter()
            .filter(|nd| matches!(nd.kind, NodeKind::Leaf { .. }))
            .map(|nd| nd.n_samples)
            .sum();
        assert_eq!(leaf_total, n);
    }

    #[test]
    fn tie_break_prefers_lowest_feature_and_threshold() {
        // Both features separate y perfectly; feature 0 must win.
        let x = [
            1.0, 10.0, //
            2.0, 20.0, //
            3.0, 30.0, //
            4.0, 40.0,
        ];
        let y = [0.0, 0.0, 1.0, 1.0];
        let params = TreeFitParams { max_features: 2, min_samples_leaf: 1, max_depth: None };
        let t = fit(&x, 2, &y, &params, 3);
        match t.nodes()[0].kind {
            NodeKind::Internal { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 2.5);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn feature_permutation_recovers_same_split() {
        // One informative feature among noise, inspected from both column
        // positions with all features in play.
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let informative = [1.0, 2.0, 3.0, 7.0, 8.0, 9.0];
        let noise = [5.0, 5.0, 5.0, 5.0, 5.0, 5.0];
        let mut forward = Vec::new();
        let mut swapped = Vec::new();
        for i in 0..6 {
            forward.extend_from_slice(&[informative[i], noise[i]]);
            swapped.extend_from_slice(&[noise[i], informative[i]]);
        }
        let params = TreeFitParams { max_features: 2, min_samples_leaf: 1, max_depth: None };
        let a = fit(&forward, 2, &y, &params, 11);
        let b = fit(&swapped, 2, &y, &params, 11);
        match (&a.nodes()[0].kind, &b.nodes()[0].kind) {
            (
                NodeKind::Internal { feature: fa, threshold: ta, .. },
                NodeKind::Internal { feature: fb, threshold: tb, .. },
            ) => {
                assert_eq!(*fa, 0);
                assert_eq!(*fb, 1);
                assert_eq!(ta, tb);
            }
            _ => panic!("expected splits at both roots"),
        }
    }

    #[test]
    fn expectation_matches_cover_weighted_mean() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.0, 1.0, 1.0];
        let t = fit(&x, 1, &y, &default_params(), 0);
        assert_eq!(t.expectation(), 0.5);
    }

    #[test]
    fn from_nodes_rejects_malformed_trees() {
        // Covers that do not sum.
        let bad = vec![
            TreeNode {
                kind: NodeKind::Internal { feature: 0, threshold: 0.5, left: 1, right: 2 },
                n_samples: 5,
            },
            TreeNode { kind: NodeKind::Leaf { value: 0.0 }, n_samples: 2 },
            TreeNode { kind: NodeKind::Leaf { value: 1.0 }, n_samples: 2 },
        ];
        assert!(RegressionTree::from_nodes(bad, 1).is_err());
        // Feature index out of range.
        let bad = vec![
            TreeNode {
                kind: NodeKind::Internal { feature: 3, threshold: 0.5, left: 1, right: 2 },
                n_samples: 4,
            },
            TreeNode { kind: NodeKind::Leaf { value: 0.0 }, n_samples: 2 },
            TreeNode { kind: NodeKind::Leaf { value: 1.0 }, n_samples: 2 },
        ];
        assert!(RegressionTree::from_nodes(bad, 1).is_err());
        // Self-referencing child.
        let bad = vec![TreeNode {
            kind: NodeKind::Internal { feature: 0, threshold: 0.5, left: 0, right: 0 },
            n_samples: 1,
        }];
        assert!(RegressionTree::from_nodes(bad, 1).is_err());
    }
}
