//! Block-level census labels onto the analysis grid.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{polygon_centroid, rasterize_polygon_fraction, Polygon};
use crate::grid::{GridSpec, Raster};

/// The three access indicators, in label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Indicator {
    Water,
    Sewage,
    Toilet,
}

pub const INDICATORS: [Indicator; 3] = [Indicator::Water, Indicator::Sewage, Indicator::Toilet];
pub const N_INDICATORS: usize = 3;

impl Indicator {
    pub fn index(self) -> usize {
        match self {
            Indicator::Water => 0,
            Indicator::Sewage => 1,
            Indicator::Toilet => 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Indicator::Water => "water",
            Indicator::Sewage => "sewage",
            Indicator::Toilet => "toilet",
        }
    }

    /// Label column name: the fraction of households without access.
    pub fn label_name(self) -> &'static str {
        match self {
            Indicator::Water => "pct_no_water",
            Indicator::Sewage => "pct_no_sewage",
            Indicator::Toilet => "pct_no_toilet",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Indicator> {
        INDICATORS.iter().copied().find(|i| i.tag() == tag)
    }
}

/// One census block: a polygon with household counts and, per indicator,
/// the fraction of households lacking access.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub geometry: Polygon,
    pub households: u64,
    pub pct_no: [f64; N_INDICATORS],
}

impl BlockRecord {
    pub fn new(geometry: Polygon, households: u64, pct_no: [f64; N_INDICATORS]) -> Result<Self> {
        for (k, p) in pct_no.iter().enumerate() {
            if !(p.is_finite() && (0.0..=1.0).contains(p)) {
                return Err(Error::Validation(alloc::format!(
                    "pct_no_{} = {p} is outside [0, 1]",
                    INDICATORS[k].tag()
                )));
            }
        }
        Ok(BlockRecord { geometry, households, pct_no })
    }
}

/// Grid-cell labels aggregated from blocks.
///
/// Label rasters are masked wherever a cell is invalid (no member blocks,
/// or mostly no-data area). The household weight is masked only where a
/// cell has no member blocks at all, so summing it recovers the household
/// total of every assigned block.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGrid {
    spec: GridSpec,
    labels: [Raster; N_INDICATORS],
    household_weight: Raster,
    valid: Vec<bool>,
}

impl LabeledGrid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn label(&self, ind: Indicator) -> &Raster {
        &self.labels[ind.index()]
    }

    pub fn household_weight(&self) -> &Raster {
        &self.household_weight
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn n_valid(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Counts from one aggregation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AggregateReport {
    pub n_blocks: usize,
    pub n_assigned: usize,
    pub n_dropped_outside: usize,
    pub n_cells_with_blocks: usize,
    pub n_valid_cells: usize,
    pub n_low_coverage_cells: usize,
}

/// Sample lattice density for the no-data coverage filter.
pub const COVERAGE_SUBSAMPLES: usize = 4;

struct Assigned<'a> {
    cell: usize,
    cx: f64,
    cy: f64,
    block: &'a BlockRecord,
}

/// Aggregates blocks onto the grid.
///
/// Every block lands in the single cell containing its centroid. Cell
/// labels are household-weighted means of member-block fractions (plain
/// means when every member reports zero households). Cells whose data
/// coverage falls below `1 - nodata_area_threshold` of their area are
/// masked.
pub fn blocks_to_grid(
    blocks: &[BlockRecord],
    spec: &GridSpec,
    nodata_area_threshold: f64,
) -> Result<(LabeledGrid, AggregateReport)> {
    if blocks.is_empty() {
        return Err(Error::EmptyInput("no census blocks to aggregate".into()));
    }
    if !(nodata_area_threshold.is_finite() && (0.0..=1.0).contains(&nodata_area_threshold)) {
        return Err(Error::Validation("nodata_area_threshold must be in [0, 1]".into()));
    }

    let mut report = AggregateReport { n_blocks: blocks.len(), ..AggregateReport::default() };

    // Assignment sorts on (cell, centroid, households, fractions) so the
    // accumulation order is a function of block values alone; permuting
    // the input cannot change any floating-point sum.
    let mut assigned: Vec<Assigned> = Vec::with_capacity(blocks.len());
    for block in blocks {
        let c = polygon_centroid(&block.geometry);
        match spec.point_to_cell(c) {
            Some((col, row)) => {
                assigned.push(Assigned {
                    cell: spec.cell_index(col, row),
                    cx: c.x,
                    cy: c.y,
                    block,
                });
            }
            None => report.n_dropped_outside += 1,
        }
    }
    report.n_assigned = assigned.len();
    assigned.sort_by(|a, b| {
        (a.cell, a.cx, a.cy, a.block.households, a.block.pct_no)
            .partial_cmp(&(b.cell, b.cx, b.cy, b.block.households, b.block.pct_no))
            .expect("sort keys are finite")
    });

    let n_cells = spec.n_cells();
    let mut labels = [
        Raster::masked(spec.clone()),
        Raster::masked(spec.clone()),
        Raster::masked(spec.clone()),
    ];
    let mut household_weight = Raster::masked(spec.clone());
    let mut has_members = alloc::vec![false; n_cells];
    let mut cell_labels = alloc::vec![[0.0f64; N_INDICATORS]; n_cells];

    let mut i = 0;
    while i < assigned.len() {
        let cell = assigned[i].cell;
        let mut j = i;
        let mut hsum: u64 = 0;
        let mut weighted = [0.0f64; N_INDICATORS];
        let mut plain = [0.0f64; N_INDICATORS];
        while j < assigned.len() && assigned[j].cell == cell {
            let b = assigned[j].block;
            hsum += b.households;
            for k in 0..N_INDICATORS {
                weighted[k] += b.households as f64 * b.pct_no[k];
                plain[k] += b.pct_no[k];
            }
            j += 1;
        }
        let count = (j - i) as f64;
        for k in 0..N_INDICATORS {
            cell_labels[cell][k] =
                if hsum > 0 { weighted[k] / hsum as f64 } else { plain[k] / count };
        }
        has_members[cell] = true;
        household_weight.set_index(cell, hsum as f64);
        report.n_cells_with_blocks += 1;
        i = j;
    }

    // Step-4 filter: how much of each cell is covered by any block at all.
    let mut coverage = alloc::vec![0.0f64; n_cells];
    for block in blocks {
        let frac = rasterize_polygon_fraction(&block.geometry, spec, COVERAGE_SUBSAMPLES)?;
        for (idx, c) in coverage.iter_mut().enumerate() {
            if let Some(f) = frac.get_index(idx) {
                *c += f;
            }
        }
    }

    let need = 1.0 - nodata_area_threshold;
    let mut valid = alloc::vec![false; n_cells];
    for idx in 0..n_cells {
        if !has_members[idx] {
            continue;
        }
        if coverage[idx] < need {
            report.n_low_coverage_cells += 1;
            continue;
        }
        valid[idx] = true;
        report.n_valid_cells += 1;
        for k in 0..N_INDICATORS {
            labels[k].set_index(idx, cell_labels[idx][k]);
        }
    }

    Ok((LabeledGrid { spec: spec.clone(), labels, household_weight, valid }, report))
}
