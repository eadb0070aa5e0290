//! Analysis grid and single-band rasters.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fx;
use crate::geometry::PointXY;

/// A uniform planar grid in projected meters.
///
/// The origin is the north-west corner. Cell `(col, row)` covers
/// `x in [origin_x + col*cell_size, origin_x + (col+1)*cell_size)` and
/// `y in (origin_y - (row+1)*cell_size, origin_y - row*cell_size]`, so every
/// point on a shared edge belongs to exactly one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub n_cols: usize,
    pub n_rows: usize,
    pub crs_tag: String,
}

impl GridSpec {
    pub fn new(
        origin_x: f64,
        origin_y: f64,
        cell_size: f64,
        n_cols: usize,
        n_rows: usize,
        crs_tag: impl Into<String>,
    ) -> Result<Self> {
        if !origin_x.is_finite() || !origin_y.is_finite() {
            return Err(Error::Validation("grid origin must be finite".into()));
        }
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::Validation("cell_size must be positive".into()));
        }
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::Validation("grid must have at least one cell".into()));
        }
        Ok(GridSpec { origin_x, origin_y, cell_size, n_cols, n_rows, crs_tag: crs_tag.into() })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cols * self.n_rows
    }

    /// Flat row-major index of `(col, row)`.
    pub fn cell_index(&self, col: usize, row: usize) -> usize {
        row * self.n_cols + col
    }

    pub fn cell_of_index(&self, index: usize) -> (usize, usize) {
        (index % self.n_cols, index / self.n_cols)
    }

    /// Two grids are aligned iff every field matches.
    pub fn aligned(&self, other: &GridSpec) -> bool {
        self == other
    }

    pub fn cell_centroid(&self, col: usize, row: usize) -> Result<PointXY> {
        if col >= self.n_cols || row >= self.n_rows {
            return Err(Error::IndexOutOfRange {
                col,
                row,
                n_cols: self.n_cols,
                n_rows: self.n_rows,
            });
        }
        Ok(PointXY {
            x: self.origin_x + (col as f64 + 0.5) * self.cell_size,
            y: self.origin_y - (row as f64 + 0.5) * self.cell_size,
        })
    }

    /// The cell containing `p`, or `None` when `p` is outside the grid.
    pub fn point_to_cell(&self, p: PointXY) -> Option<(usize, usize)> {
        let fc = fx::floor((p.x - self.origin_x) / self.cell_size);
        let fr = fx::floor((self.origin_y - p.y) / self.cell_size);
        if fc < 0.0 || fr < 0.0 {
            return None;
        }
        let (col, row) = (fc as usize, fr as usize);
        if col >= self.n_cols || row >= self.n_rows {
            return None;
        }
        Some((col, row))
    }
}

/// A single-band value surface on a [`GridSpec`], with per-cell no-data.
///
/// Masked cells are never exposed as numeric values; their backing slots are
/// pinned to zero so equal rasters are bitwise equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    spec: GridSpec,
    values: Vec<f64>,
    nodata: Vec<bool>,
}

impl Raster {
    /// All cells unmasked with value `fill`.
    pub fn filled(spec: GridSpec, fill: f64) -> Self {
        let n = spec.n_cells();
        Raster { spec, values: vec![fill; n], nodata: vec![false; n] }
    }

    /// All cells masked.
    pub fn masked(spec: GridSpec) -> Self {
        let n = spec.n_cells();
        Raster { spec, values: vec![0.0; n], nodata: vec![true; n] }
    }

    /// Build from row-major values and a no-data mask.
    ///
    /// Rejects length mismatches and non-finite unmasked values.
    pub fn from_parts(spec: GridSpec, values: Vec<f64>, nodata: Vec<bool>) -> Result<Self> {
        let n = spec.n_cells();
        if values.len() != n || nodata.len() != n {
            return Err(Error::Validation("raster value/mask length must equal n_cols * n_rows".into()));
        }
        let mut values = values;
        for (i, v) in values.iter_mut().enumerate() {
            if nodata[i] {
                *v = 0.0;
            } else if !v.is_finite() {
                return Err(Error::Validation("raster holds a non-finite unmasked value".into()));
            }
        }
        Ok(Raster { spec, values, nodata })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn get(&self, col: usize, row: usize) -> Option<f64> {
        self.get_index(self.spec.cell_index(col, row))
    }

    pub fn get_index(&self, index: usize) -> Option<f64> {
        if self.nodata[index] {
            None
        } else {
            Some(self.values[index])
        }
    }

    pub fn is_masked(&self, index: usize) -> bool {
        self.nodata[index]
    }

    pub fn set(&mut self, col: usize, row: usize, value: f64) {
        self.set_index(self.spec.cell_index(col, row), value);
    }

    pub fn set_index(&mut self, index: usize, value: f64) {
        debug_assert!(value.is_finite());
        self.values[index] = value;
        self.nodata[index] = false;
    }

    pub fn set_masked(&mut self, col: usize, row: usize) {
        self.set_masked_index(self.spec.cell_index(col, row));
    }

    pub fn set_masked_index(&mut self, index: usize) {
        self.values[index] = 0.0;
        self.nodata[index] = true;
    }

    /// Cell values in row-major order, `None` where masked.
    pub fn cells(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.values
            .iter()
            .zip(self.nodata.iter())
            .map(|(&v, &m)| if m { None } else { Some(v) })
    }

    pub fn unmasked_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.cells().flatten()
    }

    pub fn n_unmasked(&self) -> usize {
        self.nodata.iter().filter(|&&m| !m).count()
    }
}
