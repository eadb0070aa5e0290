//! Forest model serialization.
//!
//! The JSON document is the full model: hyperparameters, seed, feature
//! names, normalization statistics, and every tree node. Floats pass
//! through serde_json's shortest-round-trip formatting, so deserializing
//! reproduces the model bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use washmap_core::forest::{ForestModel, ForestParams, LayerStats, MaxFeatures};
use washmap_core::tree::{NodeKind, RegressionTree, TreeNode};

use crate::error::{CliError, Result};
use crate::format::SCHEMA_VERSION;

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    schema_version: u32,
    label_name: String,
    feature_names: Vec<String>,
    params: ParamsDoc,
    normalization: Vec<StatsDoc>,
    trees: Vec<TreeDoc>,
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    n_trees: usize,
    max_features: MaxFeaturesDoc,
    min_samples_leaf: usize,
    max_depth: Option<usize>,
    bootstrap: bool,
    bootstrap_size: f64,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MaxFeaturesDoc {
    Count(usize),
    Fraction(f64),
}

#[derive(Serialize, Deserialize)]
struct StatsDoc {
    name: String,
    min: f64,
    max: f64,
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeDoc {
    Internal { feature: usize, threshold: f64, left: usize, right: usize, n: usize },
    Leaf { value: f64, n: usize },
}

pub fn write(path: &Path, model: &ForestModel) -> Result<()> {
    let doc = ModelDoc {
        schema_version: SCHEMA_VERSION,
        label_name: model.label_name.clone(),
        feature_names: model.feature_names.clone(),
        params: ParamsDoc {
            n_trees: model.params.n_trees,
            max_features: match model.params.max_features {
                MaxFeatures::Count(k) => MaxFeaturesDoc::Count(k),
                MaxFeatures::Fraction(f) => MaxFeaturesDoc::Fraction(f),
            },
            min_samples_leaf: model.params.min_samples_leaf,
            max_depth: model.params.max_depth,
            bootstrap: model.params.bootstrap,
            bootstrap_size: model.params.bootstrap_size,
            seed: model.params.seed,
        },
        normalization: model
            .normalization
            .iter()
            .map(|s| StatsDoc { name: s.name.clone(), min: s.min, max: s.max })
            .collect(),
        trees: model
            .trees
            .iter()
            .map(|t| TreeDoc {
                nodes: t
                    .nodes()
                    .iter()
                    .map(|node| match node.kind {
                        NodeKind::Internal { feature, threshold, left, right } => {
                            NodeDoc::Internal {
                                feature,
                                threshold,
                                left,
                                right,
                                n: node.n_samples,
                            }
                        }
                        NodeKind::Leaf { value } => NodeDoc::Leaf { value, n: node.n_samples },
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Internal(format!("model serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<ForestModel> {
    if !path.is_file() {
        return Err(CliError::missing(path, "model json"));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc: ModelDoc =
        serde_json::from_str(&text).map_err(|e| CliError::data(path, e.to_string()))?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(CliError::data(
            path,
            format!(
                "model schema_version {} is not supported (this build reads {SCHEMA_VERSION})",
                doc.schema_version
            ),
        ));
    }
    let n_features = doc.feature_names.len();
    let mut trees = Vec::with_capacity(doc.trees.len());
    for (i, t) in doc.trees.into_iter().enumerate() {
        let nodes: Vec<TreeNode> = t
            .nodes
            .into_iter()
            .map(|n| match n {
                NodeDoc::Internal { feature, threshold, left, right, n } => TreeNode {
                    kind: NodeKind::Internal { feature, threshold, left, right },
                    n_samples: n,
                },
                NodeDoc::Leaf { value, n } => {
                    TreeNode { kind: NodeKind::Leaf { value }, n_samples: n }
                }
            })
            .collect();
        let tree = RegressionTree::from_nodes(nodes, n_features)
            .map_err(|e| CliError::data(path, format!("tree {i}: {e}")))?;
        trees.push(tree);
    }
    let model = ForestModel {
        params: ForestParams {
            n_trees: doc.params.n_trees,
            max_features: match doc.params.max_features {
                MaxFeaturesDoc::Count(k) => MaxFeatures::Count(k),
                MaxFeaturesDoc::Fraction(f) => MaxFeatures::Fraction(f),
            },
            min_samples_leaf: doc.params.min_samples_leaf,
            max_depth: doc.params.max_depth,
            bootstrap: doc.params.bootstrap,
            bootstrap_size: doc.params.bootstrap_size,
            seed: doc.params.seed,
        },
        trees,
        feature_names: doc.feature_names,
        label_name: doc.label_name,
        normalization: doc
            .normalization
            .into_iter()
            .map(|s| LayerStats { name: s.name, min: s.min, max: s.max })
            .collect(),
    };
    model.validate().map_err(|e| CliError::data(path, e.to_string()))?;
    Ok(model)
}
