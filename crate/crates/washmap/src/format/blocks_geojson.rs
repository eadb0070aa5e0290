//! Census-block GeoJSON reader.
//!
//! Expects a FeatureCollection of Polygon or MultiPolygon features whose
//! properties carry `households` and the three `pct_no_*` fractions. A
//! MultiPolygon becomes one block record per part, with households split
//! by area share (largest-remainder rounding, so the total is preserved
//! exactly). Error messages name the offending feature.

use std::path::Path;

use serde_json::Value;
use washmap_core::census::{BlockRecord, INDICATORS, N_INDICATORS};
use washmap_core::geometry::{PointXY, Polygon};

use crate::error::{CliError, Result};

pub fn read(path: &Path) -> Result<Vec<BlockRecord>> {
    if !path.is_file() {
        return Err(CliError::missing(path, "census blocks geojson"));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let doc: Value =
        serde_json::from_str(&text).map_err(|e| CliError::data(path, e.to_string()))?;

    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(CliError::data(path, "top-level 'type' must be 'FeatureCollection'"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::data(path, "'features' must be an array"))?;

    let mut blocks = Vec::new();
    for (idx, feature) in features.iter().enumerate() {
        let fid = feature_id(feature, idx);
        parse_feature(feature, &mut blocks)
            .map_err(|m| CliError::data(path, format!("feature {fid}: {m}")))?;
    }
    Ok(blocks)
}

fn feature_id(feature: &Value, idx: usize) -> String {
    let explicit = feature
        .get("id")
        .or_else(|| feature.get("properties").and_then(|p| p.get("id")));
    match explicit {
        Some(Value::String(s)) => format!("'{s}'"),
        Some(Value::Number(n)) => n.to_string(),
        _ => format!("#{idx}"),
    }
}

fn parse_feature(feature: &Value, out: &mut Vec<BlockRecord>) -> std::result::Result<(), String> {
    if feature.get("type").and_then(Value::as_str) != Some("Feature") {
        return Err("'type' must be 'Feature'".into());
    }
    let props = feature
        .get("properties")
        .and_then(Value::as_object)
        .ok_or("'properties' must be an object")?;

    let households = props
        .get("households")
        .and_then(Value::as_u64)
        .ok_or("'households' must be a non-negative integer")?;
    let mut pct_no = [0.0; N_INDICATORS];
    for (k, ind) in INDICATORS.iter().enumerate() {
        let key = ind.label_name();
        let v = props
            .get(key)
            .and_then(Value::as_f64)
            .ok_or_else(|| format!("'{key}' must be a number"))?;
        if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
            return Err(format!("'{key}' = {v} is outside [0, 1]"));
        }
        pct_no[k] = v;
    }

    let geometry = feature.get("geometry").ok_or("'geometry' is required")?;
    let coords = geometry.get("coordinates").ok_or("'coordinates' is required")?;
    match geometry.get("type").and_then(Value::as_str) {
        Some("Polygon") => {
            let poly = parse_polygon(coords)?;
            out.push(BlockRecord::new(poly, households, pct_no).map_err(|e| e.to_string())?);
        }
        Some("MultiPolygon") => {
            let parts = coords.as_array().ok_or("MultiPolygon coordinates must be an array")?;
            if parts.is_empty() {
                return Err("MultiPolygon has no parts".into());
            }
            let polys: Vec<Polygon> =
                parts.iter().map(parse_polygon).collect::<std::result::Result<_, _>>()?;
            for (poly, share) in apportion(polys, households) {
                out.push(BlockRecord::new(poly, share, pct_no).map_err(|e| e.to_string())?);
            }
        }
        other => return Err(format!("unsupported geometry type {other:?}")),
    }
    Ok(())
}

fn parse_polygon(coords: &Value) -> std::result::Result<Polygon, String> {
    let rings = coords.as_array().ok_or("Polygon coordinates must be an array of rings")?;
    if rings.is_empty() {
        return Err("Polygon has no rings".into());
    }
    let mut parsed: Vec<Vec<PointXY>> = Vec::with_capacity(rings.len());
    for ring in rings {
        let positions = ring.as_array().ok_or("ring must be an array of positions")?;
        let mut pts = Vec::with_capacity(positions.len());
        for pos in positions {
            let pair = pos.as_array().ok_or("position must be an array")?;
            if pair.len() < 2 {
                return Err("position needs at least x and y".into());
            }
            let x = pair[0].as_f64().ok_or("position x must be a number")?;
            let y = pair[1].as_f64().ok_or("position y must be a number")?;
            pts.push(PointXY::new(x, y));
        }
        parsed.push(pts);
    }
    let exterior = parsed.remove(0);
    Polygon::new(exterior, parsed).map_err(|e| e.to_string())
}

/// Splits `households` across parts proportionally to area, rounding by
/// largest remainder so the shares sum back to the input exactly.
fn apportion(polys: Vec<Polygon>, households: u64) -> Vec<(Polygon, u64)> {
    let areas: Vec<f64> = polys.iter().map(Polygon::area).collect();
    let total: f64 = areas.iter().sum();
    let mut shares: Vec<u64> = Vec::with_capacity(polys.len());
    let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(polys.len());
    for (i, a) in areas.iter().enumerate() {
        let target = households as f64 * (a / total);
        let base = target.floor().min(households as f64) as u64;
        shares.push(base);
        fractions.push((i, target - base as f64));
    }
    // Hand out (or, if float drift over-floored, claw back) the units that
    // separate the base sum from the true total.
    fractions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut assigned: u64 = shares.iter().sum();
    let mut give = 0;
    while assigned < households {
        shares[fractions[give % fractions.len()].0] += 1;
        assigned += 1;
        give += 1;
    }
    let mut take = 0;
    while assigned > households {
        let k = fractions[fractions.len() - 1 - (take % fractions.len())].0;
        if shares[k] > 0 {
            shares[k] -= 1;
            assigned -= 1;
        }
        take += 1;
    }
    polys.into_iter().zip(shares).collect()
}

pub fn write(path: &Path, blocks: &[BlockRecord]) -> Result<()> {
    let features: Vec<Value> = blocks
        .iter()
        .enumerate()
        .map(|(i, block)| {
            let mut properties = serde_json::Map::new();
            properties.insert("households".into(), block.households.into());
            for (k, indicator) in INDICATORS.iter().enumerate() {
                properties.insert(indicator.label_name().into(), block.pct_no[k].into());
            }
            serde_json::json!({
                "type": "Feature",
                "id": format!("b{i}"),
                "properties": properties,
                "geometry": {
                    "type": "Polygon",
                    "coordinates": polygon_coordinates(&block.geometry),
                },
            })
        })
        .collect();
    let doc = serde_json::json!({ "type": "FeatureCollection", "features": features });
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::Internal(format!("geojson serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn polygon_coordinates(polygon: &Polygon) -> Value {
    let close = |ring: &[PointXY]| -> Value {
        let mut positions: Vec<Value> =
            ring.iter().map(|p| serde_json::json!([p.x, p.y])).collect();
        positions.push(serde_json::json!([ring[0].x, ring[0].y]));
        Value::Array(positions)
    };
    let mut rings = vec![close(polygon.exterior())];
    for hole in polygon.holes() {
        rings.push(close(hole));
    }
    Value::Array(rings)
}
