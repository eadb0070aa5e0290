//! POI distance surfaces and the low-access flag.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Raster};
use crate::poi::{Poi, PoiKind};
use crate::spatial::SpatialIndex;

/// Distance above which a cell counts as far from its nearest water
/// source, in meters. The flag is strict: exactly 5 km is still "near".
pub const LOW_ACCESS_THRESHOLD_M: f64 = 5_000.0;

/// Per-cell Euclidean distance to the nearest POI of one category.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSurface {
    pub kind: PoiKind,
    pub raster: Raster,
}

/// Distance (meters) from every cell centroid to the nearest POI of
/// `kind` among `pois`.
pub fn distance_surface(spec: &GridSpec, pois: &[Poi], kind: PoiKind) -> Result<DistanceSurface> {
    let points: Vec<_> =
        pois.iter().filter(|p| p.kind == kind).map(|p| p.location).collect();
    if points.is_empty() {
        return Err(Error::EmptyInput(alloc::format!(
            "no points of interest with kind '{}'",
            kind.tag()
        )));
    }
    let index = SpatialIndex::build(&points)?;
    let mut raster = Raster::filled(spec.clone(), 0.0);
    for row in 0..spec.n_rows {
        for col in 0..spec.n_cols {
            let c = spec.cell_centroid(col, row)?;
            raster.set(col, row, index.nearest_distance(c));
        }
    }
    Ok(DistanceSurface { kind, raster })
}

/// Binary raster: 1 where the distance strictly exceeds `threshold_m`.
pub fn low_access_flag(d: &DistanceSurface, threshold_m: f64) -> Raster {
    let mut out = Raster::masked(d.raster.spec().clone());
    for idx in 0..d.raster.spec().n_cells() {
        if let Some(v) = d.raster.get_index(idx) {
            out.set_index(idx, if v > threshold_m { 1.0 } else { 0.0 });
        }
    }
    out
}

/// Name of the companion flag layer for a distance surface.
pub fn flag_layer_name(kind: PoiKind) -> String {
    alloc::format!("low_access_{}", kind.tag())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointXY;
    use crate::rng::Rng;
    use crate::spatial::nearest_linear;
    use alloc::vec;
    use alloc::vec::Vec;

    fn poi(kind: PoiKind, x: f64, y: f64) -> Poi {
        Poi { kind, location: PointXY::new(x, y) }
    }

    #[test]
    fn poi_at_centroid_gives_zero() {
        let spec = GridSpec::new(0.0, 1000.0, 250.0, 4, 4, "t").unwrap();
        let pois = [poi(PoiKind::Hospital, 375.0, 625.0)];
        let d = distance_surface(&spec, &pois, PoiKind::Hospital).unwrap();
        assert_eq!(d.raster.get(1, 1), Some(0.0));
    }

    #[test]
    fn single_poi_is_plain_euclidean() {
        let spec = GridSpec::new(0.0, 1000.0, 250.0, 4, 4, "t").unwrap();
        let pois = [poi(PoiKind::Highway, 125.0, 875.0)];
        let d = distance_surface(&spec, &pois, PoiKind::Highway).unwrap();
        // Centroid (625, 375) is (500, 500) away.
        let want = (500.0f64 * 500.0 + 500.0 * 500.0).sqrt();
        assert_eq!(d.raster.get(2, 2), Some(want));
    }

    #[test]
    fn missing_kind_is_named_in_error() {
        let spec = GridSpec::new(0.0, 1000.0, 250.0, 4, 4, "t").unwrap();
        let pois = [poi(PoiKind::Highway, 0.0, 0.0)];
        let err = distance_surface(&spec, &pois, PoiKind::Restaurant).unwrap_err();
        match err {
            Error::EmptyInput(msg) => assert!(msg.contains("restaurant"), "{msg}"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn matches_linear_scan_exactly() {
        let spec = GridSpec::new(-2000.0, 2000.0, 80.0, 50, 50, "t").unwrap();
        let mut rng = Rng::from_seed(404);
        let pois: Vec<Poi> = (0..200)
            .map(|_| {
                poi(
                    PoiKind::Commercial,
                    rng.range_f64(-2500.0, 2500.0),
                    rng.range_f64(-2500.0, 2500.0),
                )
            })
            .collect();
        let points: Vec<PointXY> = pois.iter().map(|p| p.location).collect();
        let d = distance_surface(&spec, &pois, PoiKind::Commercial).unwrap();
        for row in 0..spec.n_rows {
            for col in 0..spec.n_cols {
                let c = spec.cell_centroid(col, row).unwrap();
                let (_, want) = nearest_linear(&points, c).unwrap();
                let got = d.raster.get(col, row).unwrap();
                assert_eq!(got.to_bits(), want.to_bits(), "cell ({col}, {row})");
            }
        }
    }

    #[test]
    fn lipschitz_across_adjacent_cells() {
        let spec = GridSpec::new(0.0, 4000.0, 100.0, 40, 40, "t").unwrap();
        let mut rng = Rng::from_seed(99);
        let pois: Vec<Poi> = (0..30)
            .map(|_| poi(PoiKind::Waterway, rng.range_f64(0.0, 4000.0), rng.range_f64(0.0, 4000.0)))
            .collect();
        let d = distance_surface(&spec, &pois, PoiKind::Waterway).unwrap();
        let step = spec.cell_size * (1.0 + 1e-12);
        for row in 0..spec.n_rows {
            for col in 0..spec.n_cols {
                let v = d.raster.get(col, row).unwrap();
                if col + 1 < spec.n_cols {
                    let r = d.raster.get(col + 1, row).unwrap();
                    assert!((v - r).abs() <= step, "({col},{row}) horizontal");
                }
                if row + 1 < spec.n_rows {
                    let b = d.raster.get(col, row + 1).unwrap();
                    assert!((v - b).abs() <= step, "({col},{row}) vertical");
                }
            }
        }
    }

    #[test]
    fn flag_is_strictly_greater() {
        let spec = GridSpec::new(0.0, 250.0, 250.0, 3, 1, "t").unwrap();
        let raster = Raster::from_parts(
            spec,
            vec![5_000.0, 5_000.1, 0.0],
            vec![false, false, false],
        )
        .unwrap();
        let d = DistanceSurface { kind: PoiKind::Waterway, raster };
        let flags = low_access_flag(&d, LOW_ACCESS_THRESHOLD_M);
        assert_eq!(flags.get_index(0), Some(0.0));
        assert_eq!(flags.get_index(1), Some(1.0));
        assert_eq!(flags.get_index(2), Some(0.0));
    }

    #[test]
    fn zero_distances_give_zero_flags() {
        let spec = GridSpec::new(0.0, 500.0, 250.0, 2, 2, "t").unwrap();
        let d = DistanceSurface {
            kind: PoiKind::Commercial,
            raster: Raster::filled(spec, 0.0),
        };
        let flags = low_access_flag(&d, LOW_ACCESS_THRESHOLD_M);
        assert!(flags.unmasked_values().all(|v| v == 0.0));
        assert_eq!(flags.n_unmasked(), 4);
    }
}
