//! Random-forest regression over training tables.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fx;
use crate::rng::Rng;
use crate::table::TrainingTable;
use crate::tree::{fit_tree, RegressionTree, TreeFitParams};

/// Features considered per split: a fixed count or a fraction of p
/// (rounded up).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxFeatures {
    Count(usize),
    Fraction(f64),
}

impl MaxFeatures {
    pub fn resolve(&self, n_features: usize) -> Result<usize> {
        match *self {
            MaxFeatures::Count(k) => {
                if k == 0 || k > n_features {
                    return Err(Error::Validation(alloc::format!(
                        "max_features {k} must be in 1..={n_features}"
                    )));
                }
                Ok(k)
            }
            MaxFeatures::Fraction(f) => {
                if !(f.is_finite() && f > 0.0 && f <= 1.0) {
                    return Err(Error::Validation(alloc::format!(
                        "max_features fraction {f} must be in (0, 1]"
                    )));
                }
                Ok((fx::ceil(f * n_features as f64) as usize).clamp(1, n_features))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    /// Bootstrap sample size as a fraction of the training rows.
    pub bootstrap_size: f64,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: MaxFeatures::Fraction(1.0 / 3.0),
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap: true,
            bootstrap_size: 1.0,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Validation("n_trees must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Validation("min_samples_leaf must be at least 1".into()));
        }
        if !(self.bootstrap_size.is_finite()
            && self.bootstrap_size > 0.0
            && self.bootstrap_size <= 1.0)
        {
            return Err(Error::Validation("bootstrap_size must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Raw-scale min/max of one feature layer at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStats {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// A fitted forest for one label.
#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub params: ForestParams,
    pub trees: Vec<RegressionTree>,
    pub feature_names: Vec<String>,
    pub label_name: String,
    /// Normalization statistics the feature stack was built with, so
    /// prediction-time inputs can be scaled identically.
    pub normalization: Vec<LayerStats>,
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Ensemble mean before clamping.
    pub fn predict_raw(&self, row: &[f64]) -> f64 {
        debug_assert_eq!(row.len(), self.n_features());
        let sum: f64 = self.trees.iter().map(|t| t.predict_row(row)).sum();
        sum / self.trees.len() as f64
    }

    /// Ensemble mean clamped to the label range [0, 1].
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.predict_raw(row).clamp(0.0, 1.0)
    }

    /// Longest path over all trees, in edges.
    pub fn max_tree_depth(&self) -> usize {
        self.trees.iter().map(|t| t.depth()).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.trees.is_empty() {
            return Err(Error::Validation("a forest must hold at least one tree".into()));
        }
        if self.feature_names.is_empty() {
            return Err(Error::Validation("a forest must name its features".into()));
        }
        for t in &self.trees {
            t.validate(self.n_features())?;
        }
        Ok(())
    }
}

/// Fits a forest predicting label column `label` of `table`.
///
/// Tree `t` draws its bootstrap rows and split features from an
/// independent stream seeded with `params.seed ^ t`, so a model is a
/// pure function of (table, params) and the first k trees of an
/// n-tree model equal the k-tree model.
pub fn fit_forest(table: &TrainingTable, label: usize, params: &ForestParams) -> Result<ForestModel> {
    params.validate()?;
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::Validation("forest training needs at least 2 rows".into()));
    }
    if label >= table.n_labels() {
        return Err(Error::Validation(alloc::format!(
            "label index {label} out of range for {} labels",
            table.n_labels()
        )));
    }
    let p = table.n_features();
    let max_features = params.max_features.resolve(p)?;
    let tree_params = TreeFitParams {
        max_features,
        min_samples_leaf: params.min_samples_leaf,
        max_depth: params.max_depth,
    };
    let y = table.label_column(label);
    let x = table.feature_matrix();
    let n_draws = (crate::fx::round(params.bootstrap_size * n as f64) as usize).max(1);

    let fit_one = |t: usize| -> Result<RegressionTree> {
        let mut rng = Rng::from_seed(params.seed ^ t as u64);
        let rows: Vec<usize> = if params.bootstrap {
            (0..n_draws).map(|_| rng.below(n)).collect()
        } else {
            (0..n).collect()
        };
        fit_tree(x, p, &y, rows, &tree_params, &mut rng)
    };
    let trees = fit_trees(params.n_trees, &fit_one)?;

    Ok(ForestModel {
        params: *params,
        trees,
        feature_names: table.feature_names().to_vec(),
        label_name: table.label_names()[label].clone(),
        normalization: Vec::new(),
    })
}

#[cfg(feature = "parallel")]
fn fit_trees(
    n_trees: usize,
    fit_one: &(dyn Fn(usize) -> Result<RegressionTree> + Sync),
) -> Result<Vec<RegressionTree>> {
    use rayon::prelude::*;
    (0..n_trees).into_par_iter().map(fit_one).collect()
}

#[cfg(not(feature = "parallel"))]
fn fit_trees(
    n_trees: usize,
    fit_one: &(dyn Fn(usize) -> Result<RegressionTree> + Sync),
) -> Result<Vec<RegressionTree>> {
    (0..n_trees).map(fit_one).collect()
}
