//! Equirectangular projection for lon/lat ingestion.
//!
//! All downstream geometry is planar in meters. Geographic inputs are
//! flattened about a reference point: `x = R * dlon * cos(lat_ref)`,
//! `y = R * dlat` (angles in radians, `R` the mean Earth radius). At
//! low-latitude, study-area scale the distortion is below one percent.

use crate::error::{Error, Result};
use crate::fx;
use crate::geometry::PointXY;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equirectangular {
    pub ref_lon_deg: f64,
    pub ref_lat_deg: f64,
}

impl Equirectangular {
    pub fn new(ref_lon_deg: f64, ref_lat_deg: f64) -> Result<Self> {
        if !ref_lon_deg.is_finite() || !ref_lat_deg.is_finite() {
            return Err(Error::Validation("projection reference must be finite".into()));
        }
        if !(-180.0..=180.0).contains(&ref_lon_deg) {
            return Err(Error::Validation(
                "reference longitude must be within [-180, 180] degrees".into(),
            ));
        }
        if !(-90.0..=90.0).contains(&ref_lat_deg) {
            return Err(Error::Validation(
                "reference latitude must be within [-90, 90] degrees".into(),
            ));
        }
        Ok(Equirectangular { ref_lon_deg, ref_lat_deg })
    }

    /// Reference at the mean lon/lat of `points` (degrees).
    pub fn about_mean(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("cannot take a mean of zero coordinates".into()));
        }
        let n = points.len() as f64;
        let (mut lon, mut lat) = (0.0, 0.0);
        for &(lo, la) in points {
            lon += lo;
            lat += la;
        }
        Equirectangular::new(lon / n, lat / n)
    }

    pub fn project(&self, lon_deg: f64, lat_deg: f64) -> PointXY {
        let dlon = (lon_deg - self.ref_lon_deg).to_radians();
        let dlat = (lat_deg - self.ref_lat_deg).to_radians();
        let cos_ref = fx::cos(self.ref_lat_deg.to_radians());
        PointXY::new(EARTH_RADIUS_M * dlon * cos_ref, EARTH_RADIUS_M * dlat)
    }
}
