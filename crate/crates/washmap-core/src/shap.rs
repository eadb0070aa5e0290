//! Path-dependent TreeSHAP attribution for forest predictions.
//!
//! The per-tree algorithm follows the original TreeSHAP formulation:
//! walk every root-to-leaf path once, carrying for each feature on the
//! path the fraction of training cover that flows through ("zero
//! fraction") and whether the explained sample follows it ("one
//! fraction"), with permutation weights maintained incrementally. Cover
//! comes from the per-node training sample counts, so no background
//! dataset is needed. Forest attributions are the mean of per-tree
//! attributions, matching ensemble averaging.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forest::ForestModel;
use crate::tree::{NodeKind, RegressionTree};

/// SHAP values for a batch of samples, one row per sample.
///
/// For every sample, `base_value` plus the row sum equals the raw
/// (pre-clamp) forest prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionMatrix {
    pub base_value: f64,
    pub feature_names: Vec<String>,
    values: Vec<f64>,
    n_features: usize,
}

impl AttributionMatrix {
    pub fn from_parts(
        base_value: f64,
        feature_names: Vec<String>,
        values: Vec<f64>,
    ) -> Result<AttributionMatrix> {
        if feature_names.is_empty() {
            return Err(Error::EmptyInput("attribution matrix needs features".into()));
        }
        if !values.len().is_multiple_of(feature_names.len()) {
            return Err(Error::Validation(alloc::format!(
                "value buffer length {} is not a multiple of {} features",
                values.len(),
                feature_names.len()
            )));
        }
        if !base_value.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("attributions must be finite".into()));
        }
        let n_features = feature_names.len();
        Ok(AttributionMatrix { base_value, feature_names, values, n_features })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_samples(&self) -> usize {
        self.values.len() / self.n_features
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.n_features..(sample + 1) * self.n_features]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Attributes `model`'s raw predictions on `samples` (row-major,
/// `n_features` columns) to the individual features.
pub fn tree_shap(model: &ForestModel, samples: &[f64]) -> Result<AttributionMatrix> {
    let p = model.n_features();
    model.validate()?;
    if !samples.len().is_multiple_of(p) {
        return Err(Error::Validation(alloc::format!(
            "sample buffer length {} is not a multiple of {p} features",
            samples.len()
        )));
    }
    for tree in &model.trees {
        check_covers(tree)?;
    }
    let n_trees = model.trees.len() as f64;
    let base_value =
        model.trees.iter().map(RegressionTree::expectation).sum::<f64>() / n_trees;

    let scratch_len = path_buffer_len(model.max_tree_depth());
    let rows: Vec<Vec<f64>> = map_rows(samples, p, &|row| {
        let mut phi = vec![0.0; p];
        let mut scratch = vec![PathItem::default(); scratch_len];
        for tree in &model.trees {
            shap_into(tree, row, &mut scratch, &mut phi);
        }
        for v in &mut phi {
            *v /= n_trees;
        }
        phi
    });
    let mut values = Vec::with_capacity(samples.len());
    for r in rows {
        values.extend_from_slice(&r);
    }
    Ok(AttributionMatrix {
        base_value,
        feature_names: model.feature_names.clone(),
        values,
        n_features: p,
    })
}

/// Attribution of a single tree for one sample; forest attributions are
/// the mean of these.
pub fn shap_for_tree(tree: &RegressionTree, row: &[f64], n_features: usize) -> Result<Vec<f64>> {
    tree.validate(n_features)?;
    check_covers(tree)?;
    let mut phi = vec![0.0; n_features];
    let mut scratch = vec![PathItem::default(); path_buffer_len(tree.depth())];
    shap_into(tree, row, &mut scratch, &mut phi);
    Ok(phi)
}

fn check_covers(tree: &RegressionTree) -> Result<()> {
    if tree.nodes().iter().any(|n| n.n_samples == 0) {
        return Err(Error::ModelCompat(
            "tree nodes carry no cover counts; attribution needs per-node sample counts".into(),
        ));
    }
    Ok(())
}

fn path_buffer_len(depth: usize) -> usize {
    (depth + 2) * (depth + 3) / 2
}

#[cfg(feature = "parallel")]
fn map_rows(samples: &[f64], p: usize, f: &(dyn Fn(&[f64]) -> Vec<f64> + Sync)) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    samples.par_chunks(p).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_rows(samples: &[f64], p: usize, f: &(dyn Fn(&[f64]) -> Vec<f64> + Sync)) -> Vec<Vec<f64>> {
    samples.chunks(p).map(f).collect()
}

#[derive(Debug, Clone, Default)]
struct PathItem {
    feature: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    pweight: f64,
}

fn shap_into(tree: &RegressionTree, row: &[f64], scratch: &mut [PathItem], phi: &mut [f64]) {
    recurse(tree, row, phi, 0, scratch, 0, 1.0, 1.0, None);
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &RegressionTree,
    row: &[f64],
    phi: &mut [f64],
    node_index: usize,
    unique_path: &mut [PathItem],
    unique_depth: usize,
    parent_zero_fraction: f64,
    parent_one_fraction: f64,
    parent_feature: Option<usize>,
) {
    extend_path(
        unique_path,
        unique_depth,
        parent_zero_fraction,
        parent_one_fraction,
        parent_feature,
    );
    let mut unique_depth = unique_depth;
    let node = &tree.nodes()[node_index];
    match node.kind {
        NodeKind::Leaf { value } => {
            for path_index in 1..=unique_depth {
                let weight = unwound_path_sum(unique_path, unique_depth, path_index);
                let item = &unique_path[path_index];
                let scale = weight * (item.one_fraction - item.zero_fraction);
                phi[item.feature.expect("non-root items carry a feature")] += scale * value;
            }
        }
        NodeKind::Internal { feature, threshold, left, right } => {
            let (hot, cold) =
                if row[feature] <= threshold { (left, right) } else { (right, left) };
            let node_cover = node.n_samples as f64;
            let hot_zero_fraction = tree.nodes()[hot].n_samples as f64 / node_cover;
            let cold_zero_fraction = tree.nodes()[cold].n_samples as f64 / node_cover;
            let mut incoming_zero_fraction = 1.0;
            let mut incoming_one_fraction = 1.0;
            // A feature met twice on one path: undo its earlier entry and
            // fold its fractions into this one.
            if let Some(path_index) =
                (1..=unique_depth).find(|&i| unique_path[i].feature == Some(feature))
            {
                incoming_zero_fraction = unique_path[path_index].zero_fraction;
                incoming_one_fraction = unique_path[path_index].one_fraction;
                unwind_path(unique_path, unique_depth, path_index);
                unique_depth -= 1;
            }
            let (parent_path, child_path) = unique_path.split_at_mut(unique_depth + 1);
            child_path[..parent_path.len()].clone_from_slice(parent_path);
            recurse(
                tree,
                row,
                phi,
                hot,
                child_path,
                unique_depth + 1,
                hot_zero_fraction * incoming_zero_fraction,
                incoming_one_fraction,
                Some(feature),
            );
            child_path[..parent_path.len()].clone_from_slice(parent_path);
            recurse(
                tree,
                row,
                phi,
                cold,
                child_path,
                unique_depth + 1,
                cold_zero_fraction * incoming_zero_fraction,
                0.0,
                Some(feature),
            );
        }
    }
}

fn extend_path(
    unique_path: &mut [PathItem],
    unique_depth: usize,
    zero_fraction: f64,
    one_fraction: f64,
    feature: Option<usize>,
) {
    unique_path[unique_depth] = PathItem {
        feature,
        zero_fraction,
        one_fraction,
        pweight: if unique_depth == 0 { 1.0 } else { 0.0 },
    };
    if unique_depth == 0 {
        return;
    }
    for i in (0..unique_depth).rev() {
        unique_path[i + 1].pweight +=
            one_fraction * unique_path[i].pweight * (i + 1) as f64 / (unique_depth + 1) as f64;
        unique_path[i].pweight =
            zero_fraction * unique_path[i].pweight * (unique_depth - i) as f64
                / (unique_depth + 1) as f64;
    }
}

fn unwind_path(unique_path: &mut [PathItem], unique_depth: usize, path_index: usize) {
    let one_fraction = unique_path[path_index].one_fraction;
    let zero_fraction = unique_path[path_index].zero_fraction;
    let mut next_one_portion = unique_path[unique_depth].pweight;
    for i in (0..unique_depth).rev() {
        if one_fraction != 0.0 {
            let tmp = unique_path[i].pweight;
            unique_path[i].pweight =
                next_one_portion * (unique_depth + 1) as f64 / ((i + 1) as f64 * one_fraction);
            next_one_portion = tmp
                - unique_path[i].pweight * zero_fraction * (unique_depth - i) as f64
                    / (unique_depth + 1) as f64;
        } else {
            unique_path[i].pweight = unique_path[i].pweight * (unique_depth + 1) as f64
                / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    for i in path_index..unique_depth {
        unique_path[i].feature = unique_path[i + 1].feature;
        unique_path[i].zero_fraction = unique_path[i + 1].zero_fraction;
        unique_path[i].one_fraction = unique_path[i + 1].one_fraction;
    }
}

fn unwound_path_sum(unique_path: &[PathItem], unique_depth: usize, path_index: usize) -> f64 {
    let one_fraction = unique_path[path_index].one_fraction;
    let zero_fraction = unique_path[path_index].zero_fraction;
    let mut next_one_portion = unique_path[unique_depth].pweight;
    let mut total = 0.0;
    if one_fraction != 0.0 {
        for i in (0..unique_depth).rev() {
            let tmp = next_one_portion / ((i + 1) as f64 * one_fraction);
            total += tmp;
            next_one_portion =
                unique_path[i].pweight - tmp * zero_fraction * (unique_depth - i) as f64;
        }
    } else {
        for i in (0..unique_depth).rev() {
            total += unique_path[i].pweight / (zero_fraction * (unique_depth - i) as f64);
        }
    }
    total * (unique_depth + 1) as f64
}
