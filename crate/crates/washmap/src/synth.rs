//! Synthetic fixture world with a known feature-label relationship.
//!
//! Generates source rasters (3 snapshots per satellite layer, on coarser
//! and finer grids than the analysis grid), a POI file and census blocks,
//! plus the dataset manifest and a ready-to-run config.
//!
//! Block labels are a smooth, monotone function of four processed
//! layers: they fall with nighttime lights and population, and rise with
//! distance to waterways and elevation. Gaussian noise of configurable
//! sigma is added per block, so the achievable fit quality is known by
//! construction and end-to-end runs can be scored against it.

use std::path::{Path, PathBuf};

use washmap_core::census::{BlockRecord, N_INDICATORS};
use washmap_core::geometry::{PointXY, Polygon};
use washmap_core::poi::{Poi, PoiKind};
use washmap_core::rng::Rng;
use washmap_core::stack::FeatureStack;
use washmap_core::{GridSpec, Raster};

use crate::config::{CvDoc, DatasetManifest, ForestDoc, GridDoc, PipelineConfig, SatelliteLayer};
use crate::error::{CliError, Result};
use crate::format::{ascii_grid, blocks_geojson, poi_csv};

pub struct SynthParams {
    pub seed: u64,
    /// Standard deviation of the Gaussian label noise.
    pub noise: f64,
    pub n_blocks: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams { seed: 0, noise: 0.05, n_blocks: 2000 }
    }
}

const N_COLS: usize = 100;
const N_ROWS: usize = 100;
const CELL_SIZE: f64 = 250.0;
const ORIGIN_X: f64 = 0.0;
const ORIGIN_Y: f64 = 25_000.0;
const CRS: &str = "local-m";
const SNAPSHOTS: usize = 3;
/// Distinct cells that receive blocks; several blocks per cell average
/// their label noise down, the way real census blocks tile dense areas.
const LABELED_CELLS: usize = 1050;

const SATELLITE_LAYERS: [(&str, &str); 7] = [
    ("vegetation", "bilinear"),
    ("aridity", "bilinear"),
    ("temperature", "bilinear"),
    ("nighttime_lights", "bilinear"),
    ("population", "bilinear"),
    ("elevation", "bilinear"),
    ("urban_change", "nearest"),
];

// Stream separators so each artifact family draws independent randomness.
const FIELD_STREAM: u64 = 0x6669_656c_6473_7276;
const SNAP_STREAM: u64 = 0x736e_6170_7368_6f74;
const POI_STREAM: u64 = 0x706f_6973_7472_6d30;
const BLOCK_STREAM: u64 = 0x626c_6f63_6b73_7472;

pub fn generate(out: &Path, params: &SynthParams) -> Result<()> {
    if !(params.noise.is_finite() && params.noise >= 0.0) {
        return Err(CliError::usage(format!("noise must be >= 0, got {}", params.noise)));
    }
    if params.n_blocks == 0 {
        return Err(CliError::usage("at least one block is required"));
    }
    let data_dir = out.join("data");
    std::fs::create_dir_all(&data_dir).map_err(|e| CliError::io(&data_dir, e))?;

    let spec = GridSpec::new(ORIGIN_X, ORIGIN_Y, CELL_SIZE, N_COLS, N_ROWS, CRS)
        .expect("fixture grid is valid");
    let mut stack = FeatureStack::new(spec.clone());
    let mut manifest_layers = Vec::new();

    for (idx, (name, method)) in SATELLITE_LAYERS.iter().enumerate() {
        // urban_change arrives on a finer grid and is resampled nearest;
        // everything else is coarser and bilinear.
        let source_spec = if *method == "nearest" {
            GridSpec::new(ORIGIN_X, ORIGIN_Y, 125.0, 200, 200, CRS).unwrap()
        } else {
            GridSpec::new(ORIGIN_X, ORIGIN_Y, 500.0, 50, 50, CRS).unwrap()
        };
        let mut field_rng = Rng::from_seed(params.seed ^ FIELD_STREAM ^ (idx as u64) << 8);
        let base = smooth_field(&mut field_rng, &source_spec);
        let mut snapshots = Vec::with_capacity(SNAPSHOTS);
        let mut files = Vec::with_capacity(SNAPSHOTS);
        for t in 0..SNAPSHOTS {
            let mut snap_rng =
                Rng::from_seed(params.seed ^ SNAP_STREAM ^ ((idx as u64) << 8 | t as u64));
            let snap = perturb(&base, &mut snap_rng, 0.08);
            let file = data_dir.join(format!("{name}_t{t}.asc"));
            ascii_grid::write(&file, &snap)?;
            files.push(PathBuf::from(format!("data/{name}_t{t}.asc")));
            snapshots.push(snap);
        }
        stack
            .push_satellite(
                name,
                &snapshots,
                crate::config::parse_method(method).expect("methods are literal"),
                None,
            )
            .map_err(|e| CliError::Internal(format!("fixture stack: {e}")))?;
        manifest_layers.push(SatelliteLayer {
            name: name.to_string(),
            method: method.to_string(),
            sources: files,
        });
    }

    let mut poi_rng = Rng::from_seed(params.seed ^ POI_STREAM);
    let pois = place_pois(&mut poi_rng);
    poi_csv::write(&data_dir.join("pois.csv"), &pois)?;
    for kind in washmap_core::poi::POI_KINDS {
        stack
            .push_distance(&pois, kind, None)
            .map_err(|e| CliError::Internal(format!("fixture stack: {e}")))?;
    }

    let mut block_rng = Rng::from_seed(params.seed ^ BLOCK_STREAM);
    let blocks = place_blocks(&stack, &spec, params, &mut block_rng);
    blocks_geojson::write(&data_dir.join("blocks.geojson"), &blocks)?;

    let manifest = DatasetManifest {
        pois: PathBuf::from("data/pois.csv"),
        blocks: PathBuf::from("data/blocks.geojson"),
        layers: manifest_layers,
    };
    let manifest_text = toml::to_string_pretty(&manifest)
        .map_err(|e| CliError::Internal(format!("manifest serialization failed: {e}")))?;
    let manifest_path = out.join("dataset.toml");
    std::fs::write(&manifest_path, manifest_text).map_err(|e| CliError::io(&manifest_path, e))?;

    let config = PipelineConfig {
        manifest: PathBuf::from("dataset.toml"),
        out: PathBuf::from("run"),
        seed: params.seed,
        indicators: washmap_core::census::INDICATORS.iter().map(|i| i.tag().into()).collect(),
        grid: GridDoc {
            origin_x: ORIGIN_X,
            origin_y: ORIGIN_Y,
            cell_size: CELL_SIZE,
            n_cols: N_COLS,
            n_rows: N_ROWS,
            crs: CRS.into(),
        },
        projection: None,
        forest: ForestDoc::default(),
        cv: CvDoc::default(),
        nodata_area_threshold: 0.5,
        low_access_threshold: washmap_core::distance::LOW_ACCESS_THRESHOLD_M,
    };
    let config_text = toml::to_string_pretty(&config)
        .map_err(|e| CliError::Internal(format!("config serialization failed: {e}")))?;
    let config_path = out.join("config.toml");
    std::fs::write(&config_path, config_text).map_err(|e| CliError::io(&config_path, e))?;

    println!(
        "synth: fixture world -> {} ({} blocks, noise {}, seed {})",
        out.display(),
        params.n_blocks,
        params.noise,
        params.seed
    );
    Ok(())
}

/// A large-scale random field: a linear ramp plus a handful of Gaussian
/// bumps, evaluated at source-grid centroids.
fn smooth_field(rng: &mut Rng, spec: &GridSpec) -> Raster {
    let width = spec.n_cols as f64 * spec.cell_size;
    let height = spec.n_rows as f64 * spec.cell_size;
    let ramp_x = rng.range_f64(-0.6, 0.6);
    let ramp_y = rng.range_f64(-0.6, 0.6);
    let n_blobs = 3 + rng.below(3);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..n_blobs)
        .map(|_| {
            (
                spec.origin_x + rng.range_f64(0.0, width),
                spec.origin_y - rng.range_f64(0.0, height),
                rng.range_f64(-1.2, 1.2),
                rng.range_f64(3_000.0, 9_000.0),
            )
        })
        .collect();
    let mut raster = Raster::filled(spec.clone(), 0.0);
    for row in 0..spec.n_rows {
        for col in 0..spec.n_cols {
            let c = spec.cell_centroid(col, row).expect("in range");
            let mut v = ramp_x * (c.x - spec.origin_x) / width
                + ramp_y * (spec.origin_y - c.y) / height;
            for &(bx, by, amp, sigma) in &blobs {
                let d2 = (c.x - bx).powi(2) + (c.y - by).powi(2);
                v += amp * (-d2 / (2.0 * sigma * sigma)).exp();
            }
            raster.set(col, row, v);
        }
    }
    raster
}

/// One temporal snapshot: the base field plus iid per-cell noise, which
/// the median composite later suppresses.
fn perturb(base: &Raster, rng: &mut Rng, amplitude: f64) -> Raster {
    let mut out = base.clone();
    for idx in 0..base.spec().n_cells() {
        if let Some(v) = base.get_index(idx) {
            out.set_index(idx, v + rng.range_f64(-amplitude, amplitude));
        }
    }
    out
}

fn place_pois(rng: &mut Rng) -> Vec<Poi> {
    let mut pois = Vec::new();
    let width = N_COLS as f64 * CELL_SIZE;

    // A river: waterway points every 250 m along a meandering curve.
    let phase = rng.range_f64(0.0, std::f64::consts::TAU);
    let amp = rng.range_f64(5_000.0, 8_000.0);
    let mid = rng.range_f64(10_000.0, 15_000.0);
    let mut x = -500.0;
    while x <= width + 500.0 {
        let y = mid + amp * (std::f64::consts::TAU * 0.7 * x / width + phase).sin();
        pois.push(Poi { kind: PoiKind::Waterway, location: PointXY::new(x, y) });
        x += 250.0;
    }

    let mut clustered = |kind: PoiKind, n_clusters: usize, n: usize, spread: f64| {
        let centers: Vec<PointXY> = (0..n_clusters)
            .map(|_| {
                PointXY::new(
                    rng.range_f64(2_000.0, width - 2_000.0),
                    ORIGIN_Y - rng.range_f64(2_000.0, 23_000.0),
                )
            })
            .collect();
        for i in 0..n {
            let c = centers[i % n_clusters];
            pois.push(Poi {
                kind,
                location: PointXY::new(
                    c.x + rng.range_f64(-spread, spread),
                    c.y + rng.range_f64(-spread, spread),
                ),
            });
        }
    };
    clustered(PoiKind::Commercial, 3, 60, 1_500.0);
    clustered(PoiKind::Restaurant, 5, 80, 1_200.0);
    clustered(PoiKind::Hospital, 12, 12, 0.0);
    clustered(PoiKind::Airport, 2, 2, 0.0);

    // A highway: points along one straight road crossing the domain.
    let y0 = rng.range_f64(2_000.0, 23_000.0);
    let y1 = rng.range_f64(2_000.0, 23_000.0);
    let mut t = 0.0;
    while t <= 1.0 {
        pois.push(Poi {
            kind: PoiKind::Highway,
            location: PointXY::new(t * width, ORIGIN_Y - (y0 + t * (y1 - y0))),
        });
        t += 0.015;
    }
    pois
}

/// The documented generative relationship. Inputs are the normalized
/// stack values of the four driver layers; outputs are the three
/// indicator fractions before noise.
pub fn label_means(ntl: f64, dist_waterway: f64, population: f64, elevation: f64) -> [f64; N_INDICATORS] {
    let sig = |u: f64| 1.0 / (1.0 + (-6.0 * (u - 0.5)).exp());
    let dark = 1.0 - sig(ntl);
    let far = sig(dist_waterway);
    let sparse = 1.0 - sig(population);
    let high = sig(elevation);
    [
        0.06 + 0.88 * (0.40 * dark + 0.30 * far + 0.15 * sparse + 0.15 * high),
        0.08 + 0.84 * (0.35 * dark + 0.35 * far + 0.15 * sparse + 0.15 * high),
        0.05 + 0.90 * (0.30 * dark + 0.40 * far + 0.20 * sparse + 0.10 * high),
    ]
}

fn place_blocks(
    stack: &FeatureStack,
    spec: &GridSpec,
    params: &SynthParams,
    rng: &mut Rng,
) -> Vec<BlockRecord> {
    let names = stack.names();
    let feature_at = |name: &str| names.iter().position(|n| n == name).expect("layer exists");
    let ntl_i = feature_at("nighttime_lights");
    let dw_i = feature_at("dist_waterway");
    let pop_i = feature_at("population");
    let elev_i = feature_at("elevation");

    let mut cells: Vec<usize> = (0..spec.n_cells()).collect();
    rng.shuffle(&mut cells);
    cells.truncate(LABELED_CELLS);

    let mut blocks = Vec::with_capacity(params.n_blocks);
    for _ in 0..params.n_blocks {
        let cell = cells[rng.below(cells.len())];
        let (col, row) = spec.cell_of_index(cell);
        let c = spec.cell_centroid(col, row).expect("in range");
        // Side 330-410 m with a jitter small enough that the square always
        // covers its whole home cell, keeping every labeled cell above the
        // default coverage threshold.
        let half = rng.range_f64(165.0, 205.0);
        let cx = c.x + rng.range_f64(-35.0, 35.0);
        let cy = c.y + rng.range_f64(-35.0, 35.0);
        let geometry = Polygon::new(
            vec![
                PointXY::new(cx - half, cy - half),
                PointXY::new(cx + half, cy - half),
                PointXY::new(cx + half, cy + half),
                PointXY::new(cx - half, cy + half),
            ],
            vec![],
        )
        .expect("squares are valid");

        let row = stack.feature_row(cell).expect("fixture layers cover the grid");
        let mut pct = label_means(row[ntl_i], row[dw_i], row[pop_i], row[elev_i]);
        for p in &mut pct {
            if params.noise > 0.0 {
                *p += params.noise * gaussian(rng);
            }
            *p = p.clamp(0.0, 1.0);
        }
        let households = 30 + rng.below(121) as u64;
        blocks.push(BlockRecord::new(geometry, households, pct).expect("fractions in range"));
    }
    blocks
}

fn gaussian(rng: &mut Rng) -> f64 {
    let u1 = 1.0 - rng.next_f64();
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
