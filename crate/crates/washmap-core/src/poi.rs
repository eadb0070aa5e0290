//! Point-of-interest categories used for distance features.

use alloc::vec::Vec;

use crate::geometry::PointXY;

/// The six OSM-derived categories, in feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PoiKind {
    Waterway,
    Commercial,
    Restaurant,
    Hospital,
    Airport,
    Highway,
}

pub const POI_KINDS: [PoiKind; 6] = [
    PoiKind::Waterway,
    PoiKind::Commercial,
    PoiKind::Restaurant,
    PoiKind::Hospital,
    PoiKind::Airport,
    PoiKind::Highway,
];

impl PoiKind {
    /// Stable identifier used in file formats and feature names.
    pub fn tag(self) -> &'static str {
        match self {
            PoiKind::Waterway => "waterway",
            PoiKind::Commercial => "commercial",
            PoiKind::Restaurant => "restaurant",
            PoiKind::Hospital => "hospital",
            PoiKind::Airport => "airport",
            PoiKind::Highway => "highway",
        }
    }

    pub fn from_tag(tag: &str) -> Option<PoiKind> {
        POI_KINDS.iter().copied().find(|k| k.tag() == tag)
    }

    /// Feature layer name, e.g. `dist_waterway`.
    pub fn feature_name(self) -> &'static str {
        match self {
            PoiKind::Waterway => "dist_waterway",
            PoiKind::Commercial => "dist_commercial",
            PoiKind::Restaurant => "dist_restaurant",
            PoiKind::Hospital => "dist_hospital",
            PoiKind::Airport => "dist_airport",
            PoiKind::Highway => "dist_highway",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poi {
    pub kind: PoiKind,
    pub location: PointXY,
}

/// Groups points by kind, preserving input order within each kind.
pub fn split_by_kind(pois: &[Poi]) -> [(PoiKind, Vec<PointXY>); 6] {
    let mut out = POI_KINDS.map(|k| (k, Vec::new()));
    for p in pois {
        let slot = out.iter_mut().find(|(k, _)| *k == p.kind).expect("kind is covered");
        slot.1.push(p.location);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for k in POI_KINDS {
            assert_eq!(PoiKind::from_tag(k.tag()), Some(k));
        }
        assert_eq!(PoiKind::from_tag("school"), None);
    }

    #[test]
    fn split_preserves_order() {
        let pois = [
            Poi { kind: PoiKind::Hospital, location: PointXY::new(1.0, 0.0) },
            Poi { kind: PoiKind::Waterway, location: PointXY::new(2.0, 0.0) },
            Poi { kind: PoiKind::Hospital, location: PointXY::new(3.0, 0.0) },
        ];
        let groups = split_by_kind(&pois);
        assert_eq!(groups[0].1, alloc::vec![PointXY::new(2.0, 0.0)]);
        assert_eq!(
            groups[3].1,
            alloc::vec![PointXY::new(1.0, 0.0), PointXY::new(3.0, 0.0)]
        );
        assert!(groups[2].1.is_empty());
    }
}
