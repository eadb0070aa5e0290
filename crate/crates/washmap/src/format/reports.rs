//! JSON report documents written by the stages, plus the attribution CSV.
//!
//! Every document carries `schema_version` and serializes with fixed
//! field order, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use washmap_core::census::AggregateReport;
use washmap_core::cv::{CvMode, EvalReport};
use washmap_core::forest::LayerStats;
use washmap_core::shap::AttributionMatrix;
use washmap_core::stack::{FeatureStack, Provenance};
use washmap_core::summary::SummaryReport;
use washmap_core::table::JoinReport;

use crate::config::{method_name, GridDoc, PipelineConfig};
use crate::error::{CliError, Result};
use crate::format::{fmt_f64, SCHEMA_VERSION};

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::Internal(format!("report serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    if !path.is_file() {
        return Err(CliError::missing(path, what));
    }
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::data(path, e.to_string()))
}

/// Provenance and scaling record for one feature-stack build.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackDoc {
    pub schema_version: u32,
    pub grid: GridDoc,
    pub layers: Vec<StackLayerDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackLayerDoc {
    pub name: String,
    pub source: SourceDoc,
    /// Raw-scale minimum and maximum that scaled this layer to [0, 1].
    pub min: f64,
    pub max: f64,
    pub n_unmasked: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceDoc {
    Satellite { composited_from: usize, source_cell_size: f64, method: String },
    Distance { poi_type: String, n_pois: usize },
}

impl StackDoc {
    pub fn from_stack(stack: &FeatureStack) -> StackDoc {
        let spec = stack.spec();
        StackDoc {
            schema_version: SCHEMA_VERSION,
            grid: GridDoc {
                origin_x: spec.origin_x,
                origin_y: spec.origin_y,
                cell_size: spec.cell_size,
                n_cols: spec.n_cols,
                n_rows: spec.n_rows,
                crs: spec.crs_tag.clone(),
            },
            layers: stack
                .layers()
                .iter()
                .map(|l| StackLayerDoc {
                    name: l.name.clone(),
                    source: match &l.provenance {
                        Provenance::Satellite { composited_from, source_cell_size, method } => {
                            SourceDoc::Satellite {
                                composited_from: *composited_from,
                                source_cell_size: *source_cell_size,
                                method: method_name(*method).to_string(),
                            }
                        }
                        Provenance::Distance { poi_kind, n_pois } => SourceDoc::Distance {
                            poi_type: poi_kind.tag().to_string(),
                            n_pois: *n_pois,
                        },
                    },
                    min: l.stats.min,
                    max: l.stats.max,
                    n_unmasked: l.raster.n_unmasked(),
                })
                .collect(),
        }
    }

    /// Normalization stats in layer order, for embedding into models.
    pub fn layer_stats(&self) -> Vec<LayerStats> {
        self.layers
            .iter()
            .map(|l| LayerStats { name: l.name.clone(), min: l.min, max: l.max })
            .collect()
    }
}

/// Aggregation stage outcome: block assignment plus the feature join.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateDoc {
    pub schema_version: u32,
    pub n_blocks: usize,
    pub n_assigned: usize,
    pub n_dropped_outside: usize,
    pub n_cells_with_blocks: usize,
    pub n_valid_cells: usize,
    pub n_low_coverage_cells: usize,
    pub rows_emitted: usize,
    pub dropped_label_invalid: usize,
    pub dropped_feature_masked: usize,
}

impl AggregateDoc {
    pub fn new(agg: &AggregateReport, join: &JoinReport) -> AggregateDoc {
        AggregateDoc {
            schema_version: SCHEMA_VERSION,
            n_blocks: agg.n_blocks,
            n_assigned: agg.n_assigned,
            n_dropped_outside: agg.n_dropped_outside,
            n_cells_with_blocks: agg.n_cells_with_blocks,
            n_valid_cells: agg.n_valid_cells,
            n_low_coverage_cells: agg.n_low_coverage_cells,
            rows_emitted: join.rows_emitted,
            dropped_label_invalid: join.dropped_label_invalid,
            dropped_feature_masked: join.dropped_feature_masked,
        }
    }
}

/// Cross-validation metrics for every requested indicator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalDoc {
    pub schema_version: u32,
    pub indicators: Vec<IndicatorEvalDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicatorEvalDoc {
    pub label: String,
    pub mode: String,
    pub n_folds: usize,
    pub fold_seed: u64,
    pub folds: Vec<FoldDoc>,
    pub mean_r_squared: f64,
    pub mean_rmse: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldDoc {
    pub r_squared: f64,
    pub rmse: f64,
    pub n_test: usize,
}

impl IndicatorEvalDoc {
    pub fn new(label: &str, report: &EvalReport) -> IndicatorEvalDoc {
        IndicatorEvalDoc {
            label: label.to_string(),
            mode: match report.mode {
                CvMode::Partition => "partition".into(),
                CvMode::Resample => "resample".into(),
            },
            n_folds: report.n_folds,
            fold_seed: report.fold_seed,
            folds: report
                .folds
                .iter()
                .map(|f| FoldDoc { r_squared: f.r_squared, rmse: f.rmse, n_test: f.n_test })
                .collect(),
            mean_r_squared: report.mean_r_squared,
            mean_rmse: report.mean_rmse,
        }
    }
}

/// Attribution summary for one indicator model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryDoc {
    pub schema_version: u32,
    pub label: String,
    /// Which attribution method produced these numbers.
    pub variant: String,
    pub base_value: f64,
    pub n_samples: usize,
    pub features: Vec<SummaryFeatureDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryFeatureDoc {
    pub rank: usize,
    pub name: String,
    pub mean_abs_shap: f64,
    pub correlation: f64,
    pub correlation_sign: i8,
    pub correlation_defined: bool,
}

impl SummaryDoc {
    pub fn new(label: &str, attr: &AttributionMatrix, summary: &SummaryReport) -> SummaryDoc {
        SummaryDoc {
            schema_version: SCHEMA_VERSION,
            label: label.to_string(),
            variant: "path_dependent_tree_shap".into(),
            base_value: attr.base_value,
            n_samples: attr.n_samples(),
            features: summary
                .features
                .iter()
                .map(|f| SummaryFeatureDoc {
                    rank: f.rank,
                    name: f.name.clone(),
                    mean_abs_shap: f.mean_abs_shap,
                    correlation: f.correlation,
                    correlation_sign: f.correlation_sign,
                    correlation_defined: f.correlation_defined,
                })
                .collect(),
        }
    }
}

/// Per-cell attribution table: `cell_id` plus one column per feature.
pub fn write_attributions(
    path: &Path,
    attr: &AttributionMatrix,
    cell_ids: &[usize],
) -> Result<()> {
    if cell_ids.len() != attr.n_samples() {
        return Err(CliError::Internal(format!(
            "{} cell ids for {} attribution rows",
            cell_ids.len(),
            attr.n_samples()
        )));
    }
    let mut out = String::from("cell_id");
    for name in &attr.feature_names {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, id) in cell_ids.iter().enumerate() {
        let _ = write!(out, "{id}");
        for v in attr.row(i) {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// The run record `run-all` leaves next to its artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifestDoc {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub core_version: String,
    pub seed: u64,
    /// SHA-256 of the effective config serialized back to TOML.
    pub config_sha256: String,
    pub stages: Vec<String>,
    pub config: PipelineConfig,
}

impl RunManifestDoc {
    pub fn new(config: &PipelineConfig, stages: &[&str]) -> Result<RunManifestDoc> {
        let effective = toml::to_string_pretty(config)
            .map_err(|e| CliError::Internal(format!("config echo failed: {e}")))?;
        Ok(RunManifestDoc {
            schema_version: SCHEMA_VERSION,
            tool: "washmap".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            core_version: washmap_core::VERSION.into(),
            seed: config.seed,
            config_sha256: sha256_hex(effective.as_bytes()),
            stages: stages.iter().map(|s| s.to_string()).collect(),
            config: config.clone(),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}
