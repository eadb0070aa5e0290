//! On-disk formats: rasters, POIs, census blocks, models, tables,
//! reports.

pub mod ascii_grid;
pub mod blocks_geojson;
pub mod model_json;
pub mod poi_csv;
pub mod reports;
pub mod table_csv;

/// Schema version stamped on every JSON artifact this tool writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Renders an f64 with 17 significant digits so parsing it back returns
/// the identical bits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
