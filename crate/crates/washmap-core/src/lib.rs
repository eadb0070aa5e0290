//! Core algorithms for gridded access mapping.
//!
//! Everything in this crate is pure and deterministic: planar grid geometry,
//! raster feature engineering (median compositing, resampling, min-max
//! normalization, distance surfaces), block-to-grid label aggregation,
//! regression forests with cross-validated metrics, and exact path-dependent
//! SHAP attribution for those forests.
//!
//! The crate is `no_std`-compatible (with `alloc`); file formats, the CLI and
//! anything that touches the filesystem live in the companion `washmap`
//! crate. Enable the `parallel` feature for data-parallel fitting,
//! prediction and attribution via rayon.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod census;
pub mod composite;
pub mod cv;
pub mod distance;
pub mod error;
mod fx;
pub mod forest;
pub mod geometry;
pub mod grid;
pub mod metrics;
pub mod normalize;
pub mod poi;
pub mod project;
pub mod resample;
pub mod rng;
pub mod shap;
pub mod spatial;
pub mod stack;
pub mod summary;
pub mod table;
pub mod tree;

pub use error::{Error, Result};
pub use geometry::{polygon_centroid, rasterize_polygon_fraction, PointXY, Polygon};
pub use grid::{GridSpec, Raster};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
