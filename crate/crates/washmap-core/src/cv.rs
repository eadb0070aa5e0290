//! K-fold cross-validation of forest models.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forest::{fit_forest, ForestParams};
use crate::metrics::{r_squared, rmse};
use crate::rng::Rng;
use crate::table::TrainingTable;

/// How the 80-20 test splits are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvMode {
    /// One shuffle, then disjoint folds that partition the rows; each
    /// fold is the test set once.
    Partition,
    /// Independent random splits per fold, test fraction 1/n_folds.
    Resample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub r_squared: f64,
    pub rmse: f64,
    pub n_test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: CvMode,
    pub n_folds: usize,
    /// Seed the fold assignment stream was derived from.
    pub fold_seed: u64,
    pub folds: Vec<FoldMetrics>,
    pub mean_r_squared: f64,
    pub mean_rmse: f64,
}

/// Domain separator so fold shuffling never reuses a tree substream.
const FOLD_STREAM: u64 = 0x666f_6c64_7372_6e67;

/// Cross-validates `params` on one label column of `table`.
///
/// Metrics are computed on raw ensemble means. Fold layout depends only
/// on (params.seed, n_rows, mode), never on the data values.
pub fn cross_validate(
    table: &TrainingTable,
    label: usize,
    params: &ForestParams,
    n_folds: usize,
    mode: CvMode,
) -> Result<EvalReport> {
    let n = table.n_rows();
    if n_folds < 2 {
        return Err(Error::Validation("cross-validation needs at least 2 folds".into()));
    }
    if n < n_folds {
        return Err(Error::Validation(alloc::format!(
            "cannot split {n} rows into {n_folds} folds"
        )));
    }
    let fold_seed = params.seed ^ FOLD_STREAM;
    let mut rng = Rng::from_seed(fold_seed);

    let mut folds = Vec::with_capacity(n_folds);
    for fold in 0..n_folds {
        let (train_rows, test_rows) = match mode {
            CvMode::Partition => partition_fold(n, n_folds, fold, fold_seed),
            CvMode::Resample => {
                let mut order: Vec<usize> = (0..n).collect();
                rng.shuffle(&mut order);
                let n_test = (n / n_folds).max(1);
                let test = order[..n_test].to_vec();
                let train = order[n_test..].to_vec();
                (train, test)
            }
        };
        let train = table.subset(&train_rows);
        let test = table.subset(&test_rows);
        let model = fit_forest(&train, label, params)?;
        let y_true: Vec<f64> = (0..test.n_rows()).map(|r| test.label(r, label)).collect();
        let y_pred: Vec<f64> =
            (0..test.n_rows()).map(|r| model.predict_raw(test.feature_row(r))).collect();
        folds.push(FoldMetrics {
            r_squared: r_squared(&y_true, &y_pred)?,
            rmse: rmse(&y_true, &y_pred)?,
            n_test: test.n_rows(),
        });
    }
    let k = folds.len() as f64;
    let mean_r_squared = folds.iter().map(|f| f.r_squared).sum::<f64>() / k;
    let mean_rmse = folds.iter().map(|f| f.rmse).sum::<f64>() / k;
    Ok(EvalReport { mode, n_folds, fold_seed, folds, mean_r_squared, mean_rmse })
}

/// Row ids (train, test) for one partition fold.
///
/// Rows are shuffled once with `fold_seed`; fold `i` takes the i-th
/// contiguous chunk as its test set. The first `n % n_folds` chunks get
/// one extra row, so sizes differ by at most 1.
pub fn partition_fold(
    n: usize,
    n_folds: usize,
    fold: usize,
    fold_seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    Rng::from_seed(fold_seed).shuffle(&mut order);
    let base = n / n_folds;
    let extra = n % n_folds;
    let size_of = |i: usize| base + usize::from(i < extra);
    let start: usize = (0..fold).map(size_of).sum();
    let end = start + size_of(fold);
    let test = order[start..end].to_vec();
    let mut train = Vec::with_capacity(n - (end - start));
    train.extend_from_slice(&order[..start]);
    train.extend_from_slice(&order[end..]);
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::MaxFeatures;
    use alloc::string::String;
    use alloc::vec;

    fn linear_table(n: usize, seed: u64) -> TrainingTable {
        let mut rng = Rng::from_seed(seed);
        let p = 3;
        let x: Vec<f64> = (0..n * p).map(|_| rng.next_f64()).collect();
        let y: Vec<f64> = (0..n).map(|i| 0.2 + 0.5 * x[i * p] + 0.3 * x[i * p + 1]).collect();
        TrainingTable::from_parts(
            (0..p).map(|i| alloc::format!("f{i}")).collect(),
            vec![String::from("y")],
            (0..n).collect(),
            x,
            y,
        )
        .unwrap()
    }

    #[test]
    fn folds_partition_the_rows() {
        for (n, k) in [(100usize, 5usize), (103, 5), (10, 3), (7, 7)] {
            let mut seen = vec![0usize; n];
            let mut sizes = Vec::new();
            for fold in 0..k {
                let (train, test) = partition_fold(n, k, fold, 9);
                assert_eq!(train.len() + test.len(), n);
                for &r in &test {
                    seen[r] += 1;
                }
                sizes.push(test.len());
                let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
                all.sort_unstable();
                assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
            assert!(seen.iter().all(|&c| c == 1), "every row tested exactly once");
            let lo = *sizes.iter().min().unwrap();
            let hi = *sizes.iter().max().unwrap();
            assert!(hi - lo <= 1, "sizes {sizes:?}");
        }
    }

    #[test]
    fn hundred_rows_five_folds_gives_twenties() {
        let sizes: Vec<usize> =
            (0..5).map(|f| partition_fold(100, 5, f, 1).1.len()).collect();
        assert_eq!(sizes, vec![20, 20, 20, 20, 20]);
    }

    #[test]
    fn near_noiseless_linear_target_scores_high() {
        let table = linear_table(400, 21);
        let params = ForestParams {
            n_trees: 40,
            max_features: MaxFeatures::Count(3),
            seed: 5,
            ..ForestParams::default()
        };
        let report = cross_validate(&table, 0, &params, 5, CvMode::Partition).unwrap();
        assert!(report.mean_r_squared >= 0.95, "mean R2 {}", report.mean_r_squared);
        assert_eq!(report.folds.len(), 5);
    }

    #[test]
    fn same_seed_same_report() {
        let table = linear_table(120, 3);
        let params = ForestParams { n_trees: 8, seed: 77, ..ForestParams::default() };
        let a = cross_validate(&table, 0, &params, 5, CvMode::Partition).unwrap();
        let b = cross_validate(&table, 0, &params, 5, CvMode::Partition).unwrap();
        assert_eq!(a, b);
        let c = cross_validate(&table, 0, &params, 5, CvMode::Resample).unwrap();
        let d = cross_validate(&table, 0, &params, 5, CvMode::Resample).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn too_few_rows_or_folds_rejected() {
        let table = linear_table(4, 1);
        let params = ForestParams::default();
        assert!(cross_validate(&table, 0, &params, 5, CvMode::Partition).is_err());
        assert!(cross_validate(&table, 0, &params, 1, CvMode::Partition).is_err());
    }
}
