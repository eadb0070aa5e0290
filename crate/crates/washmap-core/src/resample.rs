//! Raster resampling onto a target grid.
//!
//! Continuous layers use bilinear interpolation between the four source
//! centroids around each target centroid; categorical or quantized layers
//! use nearest-neighbor so values are never invented between classes.

use crate::error::{Error, Result};
use crate::fx;
use crate::grid::{GridSpec, Raster};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResampleMethod {
    Bilinear,
    Nearest,
}

/// Resamples `source` onto `target`.
///
/// When the grids are already identical the source is returned unchanged,
/// so a no-op resample is bit-exact. Target centroids outside the source
/// extent come out masked. Bilinear falls back to nearest-neighbor where
/// any of the four surrounding source centroids is masked or outside the
/// source grid.
pub fn resample(source: &Raster, target: &GridSpec, method: ResampleMethod) -> Result<Raster> {
    if source.spec().crs_tag != target.crs_tag {
        return Err(Error::Alignment(alloc::format!(
            "cannot resample between crs '{}' and crs '{}'",
            source.spec().crs_tag,
            target.crs_tag
        )));
    }
    if source.spec().aligned(target) {
        return Ok(source.clone());
    }
    let mut out = Raster::masked(target.clone());
    for row in 0..target.n_rows {
        for col in 0..target.n_cols {
            let c = target.cell_centroid(col, row)?;
            let v = match method {
                ResampleMethod::Bilinear => bilinear_at(source, c.x, c.y),
                ResampleMethod::Nearest => nearest_at(source, c.x, c.y),
            };
            if let Some(v) = v {
                out.set(col, row, v);
            }
        }
    }
    Ok(out)
}

/// Value of the source cell containing `(x, y)`, if inside and unmasked.
fn nearest_at(source: &Raster, x: f64, y: f64) -> Option<f64> {
    let (col, row) = source.spec().point_to_cell(crate::geometry::PointXY::new(x, y))?;
    source.get(col, row)
}

fn bilinear_at(source: &Raster, x: f64, y: f64) -> Option<f64> {
    let spec = source.spec();
    // Outside the source extent entirely: masked, no fallback.
    spec.point_to_cell(crate::geometry::PointXY::new(x, y))?;
    let s = spec.cell_size;
    // Fractional position in source centroid coordinates.
    let u = (x - spec.origin_x) / s - 0.5;
    let v = (spec.origin_y - y) / s - 0.5;
    let (c0, fu) = (fx::floor(u), u - fx::floor(u));
    let (r0, fv) = (fx::floor(v), v - fx::floor(v));
    let corners = match corner_values(source, c0, r0) {
        Some(c) => c,
        // A neighbor is off-grid or masked: use the containing cell.
        None => return nearest_at(source, x, y),
    };
    let [v00, v10, v01, v11] = corners;
    let top = v00 * (1.0 - fu) + v10 * fu;
    let bottom = v01 * (1.0 - fu) + v11 * fu;
    Some(top * (1.0 - fv) + bottom * fv)
}

fn corner_values(source: &Raster, c0: f64, r0: f64) -> Option<[f64; 4]> {
    let spec = source.spec();
    if c0 < 0.0 || r0 < 0.0 {
        return None;
    }
    let (c0, r0) = (c0 as usize, r0 as usize);
    if c0 + 1 >= spec.n_cols || r0 + 1 >= spec.n_rows {
        return None;
    }
    Some([
        source.get(c0, r0)?,
        source.get(c0 + 1, r0)?,
        source.get(c0, r0 + 1)?,
        source.get(c0 + 1, r0 + 1)?,
    ])
}
