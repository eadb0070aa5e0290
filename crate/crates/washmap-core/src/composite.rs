//! Per-cell median compositing of aligned rasters.
//!
//! Each satellite layer arrives as several source scenes on a shared grid.
//! Compositing takes the per-cell median of the unmasked values, which
//! discards single-scene outliers (cloud shadow, sensor glitches) without
//! tracking quality flags.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Raster;

/// Median of `vals`, which must be non-empty. Sorts in place.
/// Even counts average the two middle values.
fn median_in_place(vals: &mut [f64]) -> f64 {
    vals.sort_unstable_by(|a, b| a.partial_cmp(b).expect("values are finite"));
    let n = vals.len();
    if n % 2 == 1 {
        vals[n / 2]
    } else {
        (vals[n / 2 - 1] + vals[n / 2]) / 2.0
    }
}

/// Composites `sources` into one raster by per-cell median.
///
/// All sources must share the same grid. A cell is masked in the output
/// only when it is masked in every source.
pub fn median_composite(sources: &[Raster]) -> Result<Raster> {
    let first = sources
        .first()
        .ok_or_else(|| Error::EmptyInput("median composite needs at least one source".into()))?;
    for (i, s) in sources.iter().enumerate().skip(1) {
        if !s.spec().aligned(first.spec()) {
            return Err(Error::Alignment(alloc::format!(
                "composite source {i} is not on the grid of source 0"
            )));
        }
    }
    let spec = first.spec().clone();
    let mut out = Raster::masked(spec.clone());
    let mut stack: Vec<f64> = Vec::with_capacity(sources.len());
    for idx in 0..spec.n_cells() {
        stack.clear();
        for s in sources {
            if let Some(v) = s.get_index(idx) {
                stack.push(v);
            }
        }
        if !stack.is_empty() {
            out.set_index(idx, median_in_place(&mut stack));
        }
    }
    Ok(out)
}
