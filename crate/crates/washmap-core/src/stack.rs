//! The co-registered feature stack fed to the model.

use alloc::string::String;
use alloc::vec::Vec;

use crate::distance::distance_surface;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Raster};
use crate::normalize::{normalize_with, MinMax};
use crate::poi::{Poi, PoiKind};
use crate::resample::{resample, ResampleMethod};

/// How a layer was produced, kept for run reports.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Satellite { composited_from: usize, source_cell_size: f64, method: ResampleMethod },
    Distance { poi_kind: PoiKind, n_pois: usize },
}

/// One normalized layer plus the raw-scale statistics that scaled it.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub name: String,
    pub raster: Raster,
    pub stats: MinMax,
    pub provenance: Provenance,
}

/// Ordered, grid-aligned feature layers.
///
/// Push order is the feature order everywhere downstream: training table
/// columns, model feature lists, attribution columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    spec: GridSpec,
    layers: Vec<Layer>,
}

impl FeatureStack {
    pub fn new(spec: GridSpec) -> FeatureStack {
        FeatureStack { spec, layers: Vec::new() }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.layers.iter().map(|l| l.name.clone()).collect()
    }

    /// Composites `sources`, resamples onto the stack grid, normalizes,
    /// and appends. `stats` overrides the layer's own min/max (used at
    /// prediction time to reuse training-time scaling).
    pub fn push_satellite(
        &mut self,
        name: &str,
        sources: &[Raster],
        method: ResampleMethod,
        stats: Option<MinMax>,
    ) -> Result<()> {
        self.check_name(name)?;
        let composited = crate::composite::median_composite(sources)
            .map_err(|e| tag(name, e))?;
        let source_cell_size = composited.spec().cell_size;
        let aligned = resample(&composited, &self.spec, method).map_err(|e| tag(name, e))?;
        let stats = match stats {
            Some(s) => s,
            None => MinMax::of(&aligned).map_err(|e| tag(name, e))?,
        };
        self.layers.push(Layer {
            name: name.into(),
            raster: normalize_with(&aligned, stats),
            stats,
            provenance: Provenance::Satellite {
                composited_from: sources.len(),
                source_cell_size,
                method,
            },
        });
        Ok(())
    }

    /// Builds the normalized distance surface for `kind` and appends it
    /// under its feature name.
    pub fn push_distance(
        &mut self,
        pois: &[Poi],
        kind: PoiKind,
        stats: Option<MinMax>,
    ) -> Result<()> {
        let name = kind.feature_name();
        self.check_name(name)?;
        let surface = distance_surface(&self.spec, pois, kind).map_err(|e| tag(name, e))?;
        let n_pois = pois.iter().filter(|p| p.kind == kind).count();
        let stats = match stats {
            Some(s) => s,
            None => MinMax::of(&surface.raster).map_err(|e| tag(name, e))?,
        };
        self.layers.push(Layer {
            name: name.into(),
            raster: normalize_with(&surface.raster, stats),
            stats,
            provenance: Provenance::Distance { poi_kind: kind, n_pois },
        });
        Ok(())
    }

    /// The feature vector of one cell, `None` when any layer is masked
    /// there.
    pub fn feature_row(&self, cell_index: usize) -> Option<Vec<f64>> {
        let mut row = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            row.push(l.raster.get_index(cell_index)?);
        }
        Some(row)
    }

    fn check_name(&self, name: &str) -> Result<()> {
        if name.is_empty() {
            return Err(Error::Validation("layer name must be nonempty".into()));
        }
        if self.layer(name).is_some() {
            return Err(Error::Validation(alloc::format!("duplicate layer name '{name}'")));
        }
        Ok(())
    }
}

fn tag(layer: &str, e: Error) -> Error {
    match e {
        Error::Alignment(m) => Error::Alignment(alloc::format!("layer '{layer}': {m}")),
        Error::EmptyInput(m) => Error::EmptyInput(alloc::format!("layer '{layer}': {m}")),
        Error::Validation(m) => Error::Validation(alloc::format!("layer '{layer}': {m}")),
        other => other,
    }
}
