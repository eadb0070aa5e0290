//! Property-based checks of the geometric and normalization invariants
//! everything downstream leans on.

use proptest::prelude::*;
use washmap_core::composite::median_composite;
use washmap_core::geometry::{rasterize_polygon_fraction, PointXY, Polygon};
use washmap_core::normalize::normalize_minmax;
use washmap_core::resample::{resample, ResampleMethod};
use washmap_core::rng::Rng;
use washmap_core::{GridSpec, Raster};

fn arb_spec() -> impl Strategy<Value = GridSpec> {
    (
        -1e6f64..1e6,
        -1e6f64..1e6,
        0.5f64..1000.0,
        1usize..40,
        1usize..40,
    )
        .prop_map(|(x0, y0, cell, n_cols, n_rows)| {
            GridSpec::new(x0, y0, cell, n_cols, n_rows, "EPSG:32618").unwrap()
        })
}

fn random_raster(spec: &GridSpec, seed: u64, mask_rate: f64) -> Raster {
    let mut rng = Rng::from_seed(seed);
    let mut r = Raster::filled(spec.clone(), 0.0);
    for idx in 0..spec.n_cells() {
        if rng.next_f64() < mask_rate {
            r.set_masked_index(idx);
        } else {
            r.set_index(idx, rng.range_f64(-100.0, 100.0));
        }
    }
    r
}

proptest! {
    /// Every cell centroid maps back to its own cell, bit for bit.
    #[test]
    fn centroid_round_trips_to_its_cell(spec in arb_spec()) {
        for row in 0..spec.n_rows {
            for col in 0..spec.n_cols {
                let c = spec.cell_centroid(col, row).unwrap();
                prop_assert_eq!(spec.point_to_cell(c), Some((col, row)));
            }
        }
    }

    /// A point maps to a cell whose centroid is within half a cell of it
    /// (up to float rounding at the boundaries).
    #[test]
    fn points_map_to_the_containing_cell(
        spec in arb_spec(),
        fx in 0.0f64..1.0,
        fy in 0.0f64..1.0,
    ) {
        let width = spec.n_cols as f64 * spec.cell_size;
        let height = spec.n_rows as f64 * spec.cell_size;
        let p = PointXY::new(spec.origin_x + fx * width, spec.origin_y - fy * height);
        if let Some((col, row)) = spec.point_to_cell(p) {
            let c = spec.cell_centroid(col, row).unwrap();
            let half = 0.5 * spec.cell_size;
            let slack = 1e-9 * (spec.origin_x.abs() + spec.origin_y.abs() + width + height);
            prop_assert!((p.x - c.x).abs() <= half + slack);
            prop_assert!((p.y - c.y).abs() <= half + slack);
        }
    }

    /// Normalized values stay inside [0, 1]; the extremes hit exactly.
    #[test]
    fn normalization_is_bounded_and_tight(spec in arb_spec(), seed in any::<u64>()) {
        let r = random_raster(&spec, seed, 0.2);
        if r.n_unmasked() == 0 {
            return Ok(());
        }
        let (out, stats) = normalize_minmax(&r).unwrap();
        let mut saw_zero = false;
        let mut saw_one = false;
        for v in out.unmasked_values() {
            prop_assert!((0.0..=1.0).contains(&v));
            saw_zero |= v == 0.0;
            saw_one |= v == 1.0;
        }
        if stats.min < stats.max {
            prop_assert!(saw_zero && saw_one);
        } else {
            prop_assert!(out.unmasked_values().all(|v| v == 0.5));
        }
    }

    /// A per-cell median sits between the per-cell extremes.
    #[test]
    fn composite_median_is_bracketed(spec in arb_spec(), seed in any::<u64>()) {
        let sources: Vec<Raster> =
            (0..5).map(|i| random_raster(&spec, seed ^ i, 0.3)).collect();
        let Ok(m) = median_composite(&sources) else { return Ok(()); };
        for idx in 0..spec.n_cells() {
            let vals: Vec<f64> =
                sources.iter().filter_map(|s| s.get_index(idx)).collect();
            match m.get_index(idx) {
                None => prop_assert!(vals.is_empty()),
                Some(v) => {
                    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(v >= lo && v <= hi);
                }
            }
        }
    }

    /// Resampling a raster onto its own grid is the identity, both ways.
    #[test]
    fn resample_onto_same_spec_is_identity(spec in arb_spec(), seed in any::<u64>()) {
        let r = random_raster(&spec, seed, 0.2);
        prop_assert_eq!(&resample(&r, &spec, ResampleMethod::Nearest).unwrap(), &r);
        prop_assert_eq!(&resample(&r, &spec, ResampleMethod::Bilinear).unwrap(), &r);
    }

    /// Rasterized coverage fractions are valid fractions, and a polygon
    /// covering the whole grid yields exactly 1 everywhere.
    #[test]
    fn coverage_fractions_stay_in_unit_range(spec in arb_spec()) {
        let width = spec.n_cols as f64 * spec.cell_size;
        let height = spec.n_rows as f64 * spec.cell_size;
        let poly = Polygon::new(
            vec![
                PointXY::new(spec.origin_x - 1.0, spec.origin_y - height - 1.0),
                PointXY::new(spec.origin_x + width + 1.0, spec.origin_y - height - 1.0),
                PointXY::new(spec.origin_x + width + 1.0, spec.origin_y + 1.0),
                PointXY::new(spec.origin_x - 1.0, spec.origin_y + 1.0),
            ],
            vec![],
        ).unwrap();
        let frac = rasterize_polygon_fraction(&poly, &spec, 4).unwrap();
        for idx in 0..spec.n_cells() {
            prop_assert_eq!(frac.get_index(idx), Some(1.0));
        }
    }
}
