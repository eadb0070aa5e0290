//! Min-max scaling of feature layers.

use crate::error::{Error, Result};
use crate::grid::Raster;

/// Min and max over the unmasked cells of a raster.
///
/// Stored alongside trained models so prediction-time inputs are scaled
/// with the training-time statistics instead of their own range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn of(r: &Raster) -> Result<MinMax> {
        let mut it = r.unmasked_values();
        let first = it
            .next()
            .ok_or_else(|| Error::EmptyInput("cannot normalize an all-masked raster".into()))?;
        let (mut min, mut max) = (first, first);
        for v in it {
            min = min.min(v);
            max = max.max(v);
        }
        Ok(MinMax { min, max })
    }

    /// Affine map onto [0, 1]. A constant layer maps to 0.5 by convention.
    pub fn apply(&self, v: f64) -> f64 {
        if self.max == self.min {
            0.5
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }
}

/// Rescales unmasked values to [0, 1] with the raster's own min/max.
/// Returns the scaled raster and the statistics that produced it.
pub fn normalize_minmax(r: &Raster) -> Result<(Raster, MinMax)> {
    let stats = MinMax::of(r)?;
    Ok((normalize_with(r, stats), stats))
}

/// Rescales with externally supplied statistics.
pub fn normalize_with(r: &Raster, stats: MinMax) -> Raster {
    let mut out = Raster::masked(r.spec().clone());
    for idx in 0..r.spec().n_cells() {
        if let Some(v) = r.get_index(idx) {
            out.set_index(idx, stats.apply(v));
        }
    }
    out
}
