//! Planar polygon primitives: centroids, containment, area-fraction
//! rasterization.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fx;
use crate::grid::{GridSpec, Raster};

/// A point in projected meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointXY {
    pub x: f64,
    pub y: f64,
}

impl PointXY {
    pub fn new(x: f64, y: f64) -> Self {
        PointXY { x, y }
    }
}

/// A simple polygon with optional holes.
///
/// Construction normalizes the rings: a repeated closing vertex is dropped,
/// the exterior is made counter-clockwise and holes clockwise, and
/// zero-area input is rejected. Signed-area formulas downstream rely on
/// that orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<PointXY>,
    holes: Vec<Vec<PointXY>>,
}

fn normalize_ring(mut ring: Vec<PointXY>, want_ccw: bool, what: &str) -> Result<Vec<PointXY>> {
    if ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    for p in &ring {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(Error::Geometry(format!("{what} has a non-finite vertex")));
        }
    }
    let mut distinct = ring.clone();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Geometry(format!("{what} needs at least 3 distinct vertices")));
    }
    let area = ring_signed_area(&ring);
    if area == 0.0 {
        return Err(Error::Geometry(format!("{what} has zero area")));
    }
    if (area > 0.0) != want_ccw {
        ring.reverse();
    }
    Ok(ring)
}

impl Polygon {
    pub fn new(exterior: Vec<PointXY>, holes: Vec<Vec<PointXY>>) -> Result<Self> {
        let exterior = normalize_ring(exterior, true, "exterior ring")?;
        let holes = holes
            .into_iter()
            .map(|h| normalize_ring(h, false, "interior ring"))
            .collect::<Result<Vec<_>>>()?;
        Ok(Polygon { exterior, holes })
    }

    pub fn exterior(&self) -> &[PointXY] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<PointXY>] {
        &self.holes
    }

    /// Area with holes subtracted.
    pub fn area(&self) -> f64 {
        let mut a = ring_signed_area(&self.exterior);
        for h in &self.holes {
            a += ring_signed_area(h);
        }
        a
    }

    /// Axis-aligned bounding box of the exterior, `(min, max)`.
    pub fn bbox(&self) -> (PointXY, PointXY) {
        let mut min = self.exterior[0];
        let mut max = self.exterior[0];
        for p in &self.exterior {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    /// Even-odd containment over all rings, so holes punch out.
    pub fn contains(&self, p: PointXY) -> bool {
        let mut inside = ray_crossings_odd(&self.exterior, p);
        for h in &self.holes {
            if ray_crossings_odd(h, p) {
                inside = !inside;
            }
        }
        inside
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Polygon {
        let shift = |ring: &[PointXY]| -> Vec<PointXY> {
            ring.iter().map(|p| PointXY::new(p.x + dx, p.y + dy)).collect()
        };
        Polygon { exterior: shift(&self.exterior), holes: self.holes.iter().map(|h| shift(h)).collect() }
    }
}

fn ring_signed_area(ring: &[PointXY]) -> f64 {
    let mut acc = 0.0;
    for i in 0..ring.len() {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        acc += a.x * b.y - b.x * a.y;
    }
    acc * 0.5
}

fn ray_crossings_odd(ring: &[PointXY], p: PointXY) -> bool {
    let mut odd = false;
    for i in 0..ring.len() {
        let a = ring[i];
        let b = ring[(i + 1) % ring.len()];
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                odd = !odd;
            }
        }
    }
    odd
}

/// Area-weighted centroid via the shoelace formula; holes subtract.
pub fn polygon_centroid(poly: &Polygon) -> PointXY {
    let mut area_acc = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    let mut accumulate = |ring: &[PointXY]| {
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            let cross = a.x * b.y - b.x * a.y;
            area_acc += cross;
            cx += (a.x + b.x) * cross;
            cy += (a.y + b.y) * cross;
        }
    };
    accumulate(&poly.exterior);
    for h in &poly.holes {
        accumulate(h);
    }
    // area_acc = 2 * signed area, nonzero by construction
    PointXY::new(cx / (3.0 * area_acc), cy / (3.0 * area_acc))
}

/// Fraction of each cell's area covered by `poly`, estimated on a
/// `subsamples x subsamples` lattice of sample points per cell.
pub fn rasterize_polygon_fraction(
    poly: &Polygon,
    spec: &GridSpec,
    subsamples: usize,
) -> Result<Raster> {
    if subsamples == 0 {
        return Err(Error::Validation("subsamples must be at least 1".into()));
    }
    let mut out = Raster::filled(spec.clone(), 0.0);
    let (bb_min, bb_max) = poly.bbox();

    // Clamp the scan window to cells overlapping the bounding box.
    let cell = spec.cell_size;
    let col_lo = fx::floor((bb_min.x - spec.origin_x) / cell).max(0.0) as usize;
    let col_hi = (fx::ceil((bb_max.x - spec.origin_x) / cell).max(0.0) as usize).min(spec.n_cols);
    let row_lo = fx::floor((spec.origin_y - bb_max.y) / cell).max(0.0) as usize;
    let row_hi = (fx::ceil((spec.origin_y - bb_min.y) / cell).max(0.0) as usize).min(spec.n_rows);

    let step = cell / subsamples as f64;
    let total = (subsamples * subsamples) as f64;
    for row in row_lo..row_hi {
        let y_top = spec.origin_y - row as f64 * cell;
        for col in col_lo..col_hi {
            let x_left = spec.origin_x + col as f64 * cell;
            let mut hit = 0usize;
            for sy in 0..subsamples {
                let y = y_top - (sy as f64 + 0.5) * step;
                for sx in 0..subsamples {
                    let x = x_left + (sx as f64 + 0.5) * step;
                    if poly.contains(PointXY::new(x, y)) {
                        hit += 1;
                    }
                }
            }
            if hit > 0 {
                out.set(col, row, hit as f64 / total);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn square(x0: f64, y0: f64, side: f64) -> Polygon {
        Polygon::new(
            alloc::vec![
                PointXY::new(x0, y0),
                PointXY::new(x0 + side, y0),
                PointXY::new(x0 + side, y0 + side),
                PointXY::new(x0, y0 + side),
            ],
            alloc::vec![],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_centroid() {
        let c = polygon_centroid(&square(0.0, 0.0, 1.0));
        assert_eq!(c, PointXY::new(0.5, 0.5));
    }

    #[test]
    fn triangle_centroid_is_vertex_mean() {
        let t = Polygon::new(
            alloc::vec![PointXY::new(0.0, 0.0), PointXY::new(3.0, 0.0), PointXY::new(0.0, 3.0)],
            alloc::vec![],
        )
        .unwrap();
        let c = polygon_centroid(&t);
        assert!((c.x - 1.0).abs() < 1e-12 && (c.y - 1.0).abs() < 1e-12);
    }

    /// Monte-Carlo check of the L-shape centroid: 1e6 uniform samples over
    /// the bounding box, tolerance 1e-3. The analytic value is (5/6, 5/6).
    #[test]
    fn l_shape_centroid_matches_monte_carlo() {
        let l = Polygon::new(
            alloc::vec![
                PointXY::new(0.0, 0.0),
                PointXY::new(2.0, 0.0),
                PointXY::new(2.0, 1.0),
                PointXY::new(1.0, 1.0),
                PointXY::new(1.0, 2.0),
                PointXY::new(0.0, 2.0),
            ],
            alloc::vec![],
        )
        .unwrap();
        let mut rng = Rng::from_seed(20240817);
        let (mut sx, mut sy, mut n) = (0.0f64, 0.0f64, 0u64);
        for _ in 0..1_000_000 {
            let p = PointXY::new(rng.range_f64(0.0, 2.0), rng.range_f64(0.0, 2.0));
            if l.contains(p) {
                sx += p.x;
                sy += p.y;
                n += 1;
            }
        }
        let mc = PointXY::new(sx / n as f64, sy / n as f64);
        let c = polygon_centroid(&l);
        assert!((c.x - mc.x).abs() < 1e-3, "shoelace {c:?} vs monte-carlo {mc:?}");
        assert!((c.y - mc.y).abs() < 1e-3, "shoelace {c:?} vs monte-carlo {mc:?}");
        assert!((c.x - 5.0 / 6.0).abs() < 1e-12);
        assert!((c.y - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn hole_shifts_centroid() {
        // 4x4 square with a 1x1 hole off to the right.
        let outer = alloc::vec![
            PointXY::new(0.0, 0.0),
            PointXY::new(4.0, 0.0),
            PointXY::new(4.0, 4.0),
            PointXY::new(0.0, 4.0),
        ];
        let hole = alloc::vec![
            PointXY::new(2.5, 1.5),
            PointXY::new(3.5, 1.5),
            PointXY::new(3.5, 2.5),
            PointXY::new(2.5, 2.5),
        ];
        let p = Polygon::new(outer, alloc::vec![hole]).unwrap();
        assert!((p.area() - 15.0).abs() < 1e-12);
        let c = polygon_centroid(&p);
        // (16*2 - 1*3) / 15
        assert!((c.x - 29.0 / 15.0).abs() < 1e-12);
        assert!((c.y - 2.0).abs() < 1e-12);
        assert!(!p.contains(PointXY::new(3.0, 2.0)));
        assert!(p.contains(PointXY::new(1.0, 2.0)));
    }

    #[test]
    fn degenerate_polygons_rejected() {
        let line = Polygon::new(
            alloc::vec![PointXY::new(0.0, 0.0), PointXY::new(1.0, 1.0), PointXY::new(2.0, 2.0)],
            alloc::vec![],
        );
        assert!(matches!(line, Err(Error::Geometry(_))));
        let two = Polygon::new(
            alloc::vec![PointXY::new(0.0, 0.0), PointXY::new(1.0, 1.0)],
            alloc::vec![],
        );
        assert!(two.is_err());
    }

    #[test]
    fn closing_vertex_accepted() {
        let p = Polygon::new(
            alloc::vec![
                PointXY::new(0.0, 0.0),
                PointXY::new(1.0, 0.0),
                PointXY::new(1.0, 1.0),
                PointXY::new(0.0, 1.0),
                PointXY::new(0.0, 0.0),
            ],
            alloc::vec![],
        )
        .unwrap();
        assert_eq!(p.exterior().len(), 4);
    }

    #[test]
    fn orientation_normalized_to_ccw() {
        let cw = Polygon::new(
            alloc::vec![
                PointXY::new(0.0, 0.0),
                PointXY::new(0.0, 1.0),
                PointXY::new(1.0, 1.0),
                PointXY::new(1.0, 0.0),
            ],
            alloc::vec![],
        )
        .unwrap();
        assert!(ring_signed_area(cw.exterior()) > 0.0);
    }

    #[test]
    fn fraction_full_and_half_coverage() {
        let spec = GridSpec::new(0.0, 3.0, 1.0, 3, 3, "t").unwrap();
        // Exactly covers cell (1, 1): x in [1,2], y in [1,2].
        let full = square(1.0, 1.0, 1.0);
        let r = rasterize_polygon_fraction(&full, &spec, 10).unwrap();
        assert_eq!(r.get(1, 1), Some(1.0));
        assert_eq!(r.get(0, 0), Some(0.0));
        assert_eq!(r.get(2, 2), Some(0.0));

        // Left half of the same cell.
        let half = Polygon::new(
            alloc::vec![
                PointXY::new(1.0, 1.0),
                PointXY::new(1.5, 1.0),
                PointXY::new(1.5, 2.0),
                PointXY::new(1.0, 2.0),
            ],
            alloc::vec![],
        )
        .unwrap();
        let r = rasterize_polygon_fraction(&half, &spec, 10).unwrap();
        let f = r.get(1, 1).unwrap();
        assert!((f - 0.5).abs() <= 0.05, "half coverage estimated at {f}");
    }

    #[test]
    fn fraction_values_stay_in_unit_interval() {
        let spec = GridSpec::new(0.0, 8.0, 1.0, 8, 8, "t").unwrap();
        let mut rng = Rng::from_seed(11);
        for _ in 0..20 {
            let poly = random_convex(&mut rng, 8.0);
            let r = rasterize_polygon_fraction(&poly, &spec, 6).unwrap();
            for v in r.unmasked_values() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    /// Random convex polygons vs a point-in-polygon Monte-Carlo oracle,
    /// 1e5 samples spread over the covered cells, 0.05 per-cell tolerance.
    #[test]
    fn fraction_matches_monte_carlo_oracle() {
        let spec = GridSpec::new(0.0, 8.0, 1.0, 8, 8, "t").unwrap();
        let mut rng = Rng::from_seed(4242);
        for _ in 0..5 {
            let poly = random_convex(&mut rng, 8.0);
            let r = rasterize_polygon_fraction(&poly, &spec, 10).unwrap();
            for row in 0..8 {
                for col in 0..8 {
                    let mut hit = 0u32;
                    let samples = 1562; // ~1e5 over 64 cells
                    for _ in 0..samples {
                        let p = PointXY::new(
                            rng.range_f64(col as f64, col as f64 + 1.0),
                            rng.range_f64(8.0 - row as f64 - 1.0, 8.0 - row as f64),
                        );
                        if poly.contains(p) {
                            hit += 1;
                        }
                    }
                    let oracle = hit as f64 / samples as f64;
                    let got = r.get(col, row).unwrap();
                    assert!(
                        (got - oracle).abs() <= 0.05,
                        "cell ({col},{row}): fraction {got} vs oracle {oracle}"
                    );
                }
            }
        }
    }

    fn random_convex(rng: &mut Rng, extent: f64) -> Polygon {
        // Convex hull of random points; retry until non-degenerate.
        loop {
            let pts: Vec<PointXY> = (0..12)
                .map(|_| PointXY::new(rng.range_f64(0.5, extent - 0.5), rng.range_f64(0.5, extent - 0.5)))
                .collect();
            let hull = convex_hull(pts);
            if hull.len() >= 3 {
                if let Ok(p) = Polygon::new(hull, alloc::vec![]) {
                    return p;
                }
            }
        }
    }

    fn convex_hull(mut pts: Vec<PointXY>) -> Vec<PointXY> {
        pts.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
        let cross = |o: PointXY, a: PointXY, b: PointXY| -> f64 {
            (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
        };
        let mut lower: Vec<PointXY> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<PointXY> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        lower
    }
}
