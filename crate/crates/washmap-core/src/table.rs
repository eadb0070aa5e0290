//! Tabular training data: one row per usable grid cell.

use alloc::string::String;
use alloc::vec::Vec;

use crate::census::{LabeledGrid, INDICATORS};
use crate::error::{Error, Result};
use crate::stack::FeatureStack;

/// Row-major feature matrix with one or more label columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingTable {
    feature_names: Vec<String>,
    label_names: Vec<String>,
    cell_ids: Vec<usize>,
    features: Vec<f64>,
    labels: Vec<f64>,
}

/// Row-drop counts from joining features with labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JoinReport {
    pub rows_emitted: usize,
    pub dropped_label_invalid: usize,
    pub dropped_feature_masked: usize,
}

impl TrainingTable {
    pub fn from_parts(
        feature_names: Vec<String>,
        label_names: Vec<String>,
        cell_ids: Vec<usize>,
        features: Vec<f64>,
        labels: Vec<f64>,
    ) -> Result<Self> {
        let n = cell_ids.len();
        if feature_names.is_empty() {
            return Err(Error::Validation("training table needs at least one feature".into()));
        }
        if label_names.is_empty() {
            return Err(Error::Validation("training table needs at least one label".into()));
        }
        if features.len() != n * feature_names.len() || labels.len() != n * label_names.len() {
            return Err(Error::Validation("training table buffer lengths are inconsistent".into()));
        }
        if features.iter().chain(labels.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("training table holds a non-finite value".into()));
        }
        Ok(TrainingTable { feature_names, label_names, cell_ids, features, labels })
    }

    pub fn n_rows(&self) -> usize {
        self.cell_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_labels(&self) -> usize {
        self.label_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn cell_ids(&self) -> &[usize] {
        &self.cell_ids
    }

    pub fn feature_row(&self, row: usize) -> &[f64] {
        let p = self.n_features();
        &self.features[row * p..(row + 1) * p]
    }

    /// The row-major feature buffer, `n_rows * n_features` long.
    pub fn feature_matrix(&self) -> &[f64] {
        &self.features
    }

    pub fn label(&self, row: usize, label: usize) -> f64 {
        self.labels[row * self.n_labels() + label]
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.label_names.iter().position(|n| n == name)
    }

    /// One label column, over all rows.
    pub fn label_column(&self, label: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.label(r, label)).collect()
    }

    /// A new table keeping `rows` in the given order.
    pub fn subset(&self, rows: &[usize]) -> TrainingTable {
        let p = self.n_features();
        let q = self.n_labels();
        let mut features = Vec::with_capacity(rows.len() * p);
        let mut labels = Vec::with_capacity(rows.len() * q);
        let mut cell_ids = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.feature_row(r));
            labels.extend_from_slice(&self.labels[r * q..(r + 1) * q]);
            cell_ids.push(self.cell_ids[r]);
        }
        TrainingTable {
            feature_names: self.feature_names.clone(),
            label_names: self.label_names.clone(),
            cell_ids,
            features,
            labels,
        }
    }
}

/// Joins the feature stack with grid labels into a training table.
///
/// A row is emitted for each cell that is label-valid and unmasked in
/// every feature layer. Cell ids are row-major flat indices.
pub fn join_features_labels(
    stack: &FeatureStack,
    grid: &LabeledGrid,
) -> Result<(TrainingTable, JoinReport)> {
    if !stack.spec().aligned(grid.spec()) {
        return Err(Error::Alignment(
            "feature stack and labeled grid are on different grids".into(),
        ));
    }
    if stack.n_layers() == 0 {
        return Err(Error::EmptyInput("feature stack has no layers".into()));
    }
    let mut report = JoinReport::default();
    let mut cell_ids = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for idx in 0..stack.spec().n_cells() {
        if !grid.valid_mask()[idx] {
            report.dropped_label_invalid += 1;
            continue;
        }
        let Some(row) = stack.feature_row(idx) else {
            report.dropped_feature_masked += 1;
            continue;
        };
        cell_ids.push(idx);
        features.extend_from_slice(&row);
        for ind in INDICATORS {
            labels.push(grid.label(ind).get_index(idx).expect("valid cell has labels"));
        }
        report.rows_emitted += 1;
    }
    if cell_ids.is_empty() {
        return Err(Error::EmptyInput(
            "no cell is both label-valid and fully covered by features".into(),
        ));
    }
    let table = TrainingTable::from_parts(
        stack.names(),
        INDICATORS.iter().map(|i| String::from(i.label_name())).collect(),
        cell_ids,
        features,
        labels,
    )?;
    Ok((table, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{blocks_to_grid, BlockRecord, Indicator};
    use crate::geometry::{PointXY, Polygon};
    use crate::grid::{GridSpec, Raster};
    use crate::poi::{Poi, PoiKind};
    use crate::resample::ResampleMethod;
    use alloc::vec;

    fn spec() -> GridSpec {
        GridSpec::new(0.0, 500.0, 250.0, 2, 2, "t").unwrap()
    }

    fn cell_square(col: usize, row: usize) -> Polygon {
        let s = spec();
        let c = s.cell_centroid(col, row).unwrap();
        let h = 125.0;
        Polygon::new(
            vec![
                PointXY::new(c.x - h, c.y - h),
                PointXY::new(c.x + h, c.y - h),
                PointXY::new(c.x + h, c.y + h),
                PointXY::new(c.x - h, c.y + h),
            ],
            vec![],
        )
        .unwrap()
    }

    fn stack_with(masked: Option<(usize, usize)>) -> FeatureStack {
        let mut st = FeatureStack::new(spec());
        let mut r = Raster::filled(spec(), 2.0);
        r.set(0, 0, 1.0);
        if let Some((c, w)) = masked {
            r.set_masked(c, w);
        }
        st.push_satellite("elevation", &[r], ResampleMethod::Bilinear, None).unwrap();
        let pois = [Poi { kind: PoiKind::Waterway, location: PointXY::new(10.0, 10.0) }];
        st.push_distance(&pois, PoiKind::Waterway, None).unwrap();
        st
    }

    fn labeled(cells: &[(usize, usize, f64)]) -> LabeledGrid {
        let blocks: Vec<BlockRecord> = cells
            .iter()
            .map(|&(c, r, pct)| {
                BlockRecord::new(cell_square(c, r), 10, [pct, pct / 2.0, pct / 4.0]).unwrap()
            })
            .collect();
        blocks_to_grid(&blocks, &spec(), 0.5).unwrap().0
    }

    #[test]
    fn join_emits_valid_rows_in_cell_order() {
        let grid = labeled(&[(1, 0, 0.4), (0, 0, 0.8)]);
        let (table, report) = join_features_labels(&stack_with(None), &grid).unwrap();
        assert_eq!(table.n_rows(), 2);
        assert_eq!(table.cell_ids(), &[0, 1]);
        assert_eq!(table.n_features(), 2);
        assert_eq!(table.label(0, 0), 0.8);
        assert_eq!(table.label(1, 0), 0.4);
        assert_eq!(table.label(1, 1), 0.2);
        assert_eq!(report.rows_emitted, 2);
        assert_eq!(report.dropped_label_invalid, 2);
        assert_eq!(report.dropped_feature_masked, 0);
        assert_eq!(table.label_names()[0], "pct_no_water");
        assert_eq!(table.label_index("pct_no_toilet"), Some(2));
    }

    #[test]
    fn masked_feature_drops_the_row() {
        let grid = labeled(&[(1, 0, 0.4), (0, 0, 0.8)]);
        let (table, report) = join_features_labels(&stack_with(Some((1, 0))), &grid).unwrap();
        assert_eq!(table.n_rows(), 1);
        assert_eq!(table.cell_ids(), &[0]);
        assert_eq!(report.dropped_feature_masked, 1);
    }

    #[test]
    fn empty_intersection_is_an_error() {
        let grid = labeled(&[(1, 1, 0.4)]);
        let got = join_features_labels(&stack_with(Some((1, 1))), &grid);
        assert!(matches!(got, Err(Error::EmptyInput(_))));
    }

    #[test]
    fn spec_mismatch_is_rejected() {
        let grid = labeled(&[(0, 0, 0.4)]);
        let other = GridSpec::new(0.0, 1000.0, 250.0, 4, 4, "t").unwrap();
        let st = FeatureStack::new(other);
        assert!(matches!(
            join_features_labels(&st, &grid),
            Err(Error::Alignment(_) | Error::EmptyInput(_))
        ));
    }

    #[test]
    fn subset_keeps_requested_rows() {
        let grid = labeled(&[(0, 0, 0.8), (1, 0, 0.4), (0, 1, 0.2)]);
        let (table, _) = join_features_labels(&stack_with(None), &grid).unwrap();
        let sub = table.subset(&[2, 0]);
        assert_eq!(sub.n_rows(), 2);
        assert_eq!(sub.cell_ids(), &[table.cell_ids()[2], table.cell_ids()[0]]);
        assert_eq!(sub.feature_row(0), table.feature_row(2));
        assert_eq!(sub.label(1, 2), table.label(0, 2));
    }

    #[test]
    fn from_parts_validates() {
        assert!(TrainingTable::from_parts(
            vec!["a".into()],
            vec!["y".into()],
            vec![0, 1],
            vec![1.0, 2.0, 3.0],
            vec![0.1, 0.2],
        )
        .is_err());
        assert!(TrainingTable::from_parts(
            vec!["a".into()],
            vec!["y".into()],
            vec![0],
            vec![f64::NAN],
            vec![0.1],
        )
        .is_err());
        let t = TrainingTable::from_parts(
            vec!["a".into()],
            vec!["y".into()],
            vec![0, 7],
            vec![1.0, 2.0],
            vec![0.1, 0.2],
        )
        .unwrap();
        assert_eq!(t.label_column(0), vec![0.1, 0.2]);
        assert_eq!(t.feature_row(1), &[2.0]);
        let _ = Indicator::Water;
    }
}
