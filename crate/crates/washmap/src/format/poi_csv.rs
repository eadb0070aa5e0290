//! Point-of-interest CSV.
//!
//! Two accepted headers: `type,lon,lat` for geographic degrees (projected
//! through the configured equirectangular reference) and `type,x,y` for
//! coordinates already in grid meters.

use std::path::Path;

use washmap_core::geometry::PointXY;
use washmap_core::poi::{Poi, PoiKind, POI_KINDS};
use washmap_core::project::Equirectangular;

use crate::error::{CliError, Result};
use crate::format::fmt_f64;

enum CoordMode {
    LonLat,
    Meters,
}

pub fn read(path: &Path, projection: Option<&Equirectangular>) -> Result<Vec<Poi>> {
    if !path.is_file() {
        return Err(CliError::missing(path, "poi csv"));
    }
    let bad = |line: u64, message: String| CliError::data(path, format!("line {line}: {message}"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::data(path, e.to_string()))?;

    let headers = reader.headers().map_err(|e| CliError::data(path, e.to_string()))?;
    let cols: Vec<&str> = headers.iter().collect();
    let mode = match cols.as_slice() {
        ["type", "lon", "lat"] => CoordMode::LonLat,
        ["type", "x", "y"] => CoordMode::Meters,
        other => {
            return Err(bad(
                1,
                format!("header must be 'type,lon,lat' or 'type,x,y', got '{}'", other.join(",")),
            ))
        }
    };
    if matches!(mode, CoordMode::LonLat) && projection.is_none() {
        return Err(CliError::usage(format!(
            "{} uses lon/lat coordinates but no [projection] reference is configured",
            path.display()
        )));
    }

    let mut pois = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            bad(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let tag = record.get(0).unwrap_or("");
        let kind = PoiKind::from_tag(tag).ok_or_else(|| {
            let known: Vec<&str> = POI_KINDS.iter().map(|k| k.tag()).collect();
            bad(line, format!("unknown poi type '{tag}' (known: {})", known.join(", ")))
        })?;
        let a = parse_coord(record.get(1).unwrap_or(""), line, path)?;
        let b = parse_coord(record.get(2).unwrap_or(""), line, path)?;
        let location = match mode {
            CoordMode::LonLat => {
                projection.expect("checked above").project(a, b)
            }
            CoordMode::Meters => PointXY::new(a, b),
        };
        pois.push(Poi { kind, location });
    }
    Ok(pois)
}

fn parse_coord(token: &str, line: u64, path: &Path) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| {
        CliError::data(path, format!("line {line}: expected a coordinate, got '{token}'"))
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::data(path, format!("line {line}: non-finite coordinate '{token}'")))
    }
}

/// Writes POIs in the meters form.
pub fn write(path: &Path, pois: &[Poi]) -> Result<()> {
    let mut out = String::from("type,x,y\n");
    for p in pois {
        out.push_str(&format!(
            "{},{},{}\n",
            p.kind.tag(),
            fmt_f64(p.location.x),
            fmt_f64(p.location.y)
        ));
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}
