//! The pipeline stages behind each subcommand.
//!
//! Stages communicate exclusively through files under the configured
//! output directory, so `run-all` is nothing more than the stages in
//! order and rerunning any stage reproduces its outputs byte for byte.

use std::path::{Path, PathBuf};

use washmap_core::census::{blocks_to_grid, Indicator, LabeledGrid, INDICATORS};
use washmap_core::cv::cross_validate;
use washmap_core::distance::{distance_surface, flag_layer_name, low_access_flag};
use washmap_core::forest::{fit_forest, ForestModel};
use washmap_core::poi::POI_KINDS;
use washmap_core::shap::tree_shap;
use washmap_core::stack::FeatureStack;
use washmap_core::summary::summarize_attributions;
use washmap_core::table::{JoinReport, TrainingTable};
use washmap_core::{GridSpec, Raster};

use crate::config::{parse_method, DatasetManifest, PipelineConfig};
use crate::error::{CliError, Result};
use crate::format::reports::{
    read_json, write_attributions, write_json, AggregateDoc, EvalDoc, IndicatorEvalDoc,
    RunManifestDoc, StackDoc, SummaryDoc,
};
use crate::format::{ascii_grid, blocks_geojson, model_json, poi_csv, table_csv};

/// File layout under one output directory.
pub struct OutPaths {
    root: PathBuf,
}

impl OutPaths {
    pub fn new(root: &Path) -> OutPaths {
        OutPaths { root: root.to_path_buf() }
    }

    pub fn features_dir(&self) -> PathBuf {
        self.root.join("features")
    }

    pub fn layer_asc(&self, name: &str) -> PathBuf {
        self.features_dir().join(format!("{name}.asc"))
    }

    pub fn stack_json(&self) -> PathBuf {
        self.features_dir().join("stack.json")
    }

    pub fn aggregate_dir(&self) -> PathBuf {
        self.root.join("aggregate")
    }

    pub fn label_asc(&self, ind: Indicator) -> PathBuf {
        self.aggregate_dir().join(format!("{}.asc", ind.label_name()))
    }

    pub fn weight_asc(&self) -> PathBuf {
        self.aggregate_dir().join("household_weight.asc")
    }

    pub fn table_csv(&self) -> PathBuf {
        self.aggregate_dir().join("table.csv")
    }

    pub fn aggregate_json(&self) -> PathBuf {
        self.aggregate_dir().join("aggregate_report.json")
    }

    pub fn train_dir(&self) -> PathBuf {
        self.root.join("train")
    }

    pub fn model_json(&self, ind: Indicator) -> PathBuf {
        self.train_dir().join(format!("model_{}.json", ind.tag()))
    }

    pub fn evaluate_dir(&self) -> PathBuf {
        self.root.join("evaluate")
    }

    pub fn metrics_json(&self) -> PathBuf {
        self.evaluate_dir().join("metrics.json")
    }

    pub fn predict_dir(&self) -> PathBuf {
        self.root.join("predict")
    }

    pub fn pred_asc(&self, ind: Indicator) -> PathBuf {
        self.predict_dir().join(format!("pred_{}.asc", ind.tag()))
    }

    pub fn residual_asc(&self, ind: Indicator) -> PathBuf {
        self.predict_dir().join(format!("residual_{}.asc", ind.tag()))
    }

    pub fn explain_dir(&self) -> PathBuf {
        self.root.join("explain")
    }

    pub fn attributions_csv(&self, ind: Indicator) -> PathBuf {
        self.explain_dir().join(format!("attributions_{}.csv", ind.tag()))
    }

    pub fn summary_json(&self, ind: Indicator) -> PathBuf {
        self.explain_dir().join(format!("summary_{}.json", ind.tag()))
    }

    pub fn summary_txt(&self, ind: Indicator) -> PathBuf {
        self.explain_dir().join(format!("summary_{}.txt", ind.tag()))
    }

    pub fn run_manifest_json(&self) -> PathBuf {
        self.root.join("run_manifest.json")
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn features(cfg: &PipelineConfig) -> Result<()> {
    let spec = cfg.grid_spec()?;
    let manifest = DatasetManifest::load(&cfg.manifest)?;
    let paths = OutPaths::new(&cfg.out);
    ensure_dir(&paths.features_dir())?;

    let mut stack = FeatureStack::new(spec.clone());
    for layer in &manifest.layers {
        let method = parse_method(&layer.method).map_err(CliError::Usage)?;
        let sources: Vec<Raster> =
            layer.sources.iter().map(|p| ascii_grid::read(p)).collect::<Result<_>>()?;
        stack.push_satellite(&layer.name, &sources, method, None)?;
    }

    let projection = cfg.projection();
    let pois = poi_csv::read(&manifest.pois, projection.as_ref())?;
    let mut flags = Vec::with_capacity(POI_KINDS.len());
    for kind in POI_KINDS {
        let surface = distance_surface(&spec, &pois, kind)?;
        flags.push((flag_layer_name(kind), low_access_flag(&surface, cfg.low_access_threshold)));
        stack.push_distance(&pois, kind, None)?;
    }

    for layer in stack.layers() {
        ascii_grid::write(&paths.layer_asc(&layer.name), &layer.raster)?;
    }
    for (name, raster) in &flags {
        ascii_grid::write(&paths.layer_asc(name), raster)?;
    }
    write_json(&paths.stack_json(), &StackDoc::from_stack(&stack))?;
    println!(
        "features: {} layers and {} flag rasters -> {}",
        stack.n_layers(),
        flags.len(),
        paths.features_dir().display()
    );
    Ok(())
}

/// Reads the stack report and the layer rasters a previous `features`
/// run left behind, verifying alignment with the configured grid.
fn load_feature_layers(paths: &OutPaths, spec: &GridSpec) -> Result<(StackDoc, Vec<Raster>)> {
    let doc: StackDoc = read_json(
        &paths.stack_json(),
        "feature stack report (run 'washmap features' first)",
    )?;
    let mut rasters = Vec::with_capacity(doc.layers.len());
    for layer in &doc.layers {
        let path = paths.layer_asc(&layer.name);
        if !path.is_file() {
            return Err(CliError::missing(&path, format!("feature raster for layer '{}'", layer.name)));
        }
        let raster = ascii_grid::read(&path)?;
        if !raster.spec().aligned(spec) {
            return Err(CliError::Invalid(format!(
                "layer '{}' is on a different grid than the config",
                layer.name
            )));
        }
        rasters.push(raster);
    }
    if rasters.is_empty() {
        return Err(CliError::Invalid("feature stack report lists no layers".into()));
    }
    Ok((doc, rasters))
}

/// Joins label-valid cells with fully unmasked feature rows, mirroring
/// the in-memory stack join.
fn join_layers(
    doc: &StackDoc,
    rasters: &[Raster],
    grid: &LabeledGrid,
) -> Result<(TrainingTable, JoinReport)> {
    let spec = grid.spec();
    let mut report = JoinReport::default();
    let mut cell_ids = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    'cells: for idx in 0..spec.n_cells() {
        if !grid.valid_mask()[idx] {
            report.dropped_label_invalid += 1;
            continue;
        }
        let start = features.len();
        for raster in rasters {
            match raster.get_index(idx) {
                Some(v) => features.push(v),
                None => {
                    features.truncate(start);
                    report.dropped_feature_masked += 1;
                    continue 'cells;
                }
            }
        }
        cell_ids.push(idx);
        for ind in INDICATORS {
            labels.push(grid.label(ind).get_index(idx).expect("valid cell has labels"));
        }
        report.rows_emitted += 1;
    }
    if cell_ids.is_empty() {
        return Err(CliError::Invalid(
            "no cell is both label-valid and fully covered by features".into(),
        ));
    }
    let table = TrainingTable::from_parts(
        doc.layers.iter().map(|l| l.name.clone()).collect(),
        INDICATORS.iter().map(|i| i.label_name().to_string()).collect(),
        cell_ids,
        features,
        labels,
    )?;
    Ok((table, report))
}

pub fn aggregate(cfg: &PipelineConfig) -> Result<()> {
    let spec = cfg.grid_spec()?;
    let manifest = DatasetManifest::load(&cfg.manifest)?;
    let paths = OutPaths::new(&cfg.out);
    let (doc, rasters) = load_feature_layers(&paths, &spec)?;

    let blocks = blocks_geojson::read(&manifest.blocks)?;
    let (grid, agg_report) = blocks_to_grid(&blocks, &spec, cfg.nodata_area_threshold)?;
    let (table, join_report) = join_layers(&doc, &rasters, &grid)?;

    ensure_dir(&paths.aggregate_dir())?;
    for ind in INDICATORS {
        ascii_grid::write(&paths.label_asc(ind), grid.label(ind))?;
    }
    ascii_grid::write(&paths.weight_asc(), grid.household_weight())?;
    table_csv::write(&paths.table_csv(), &table, spec.n_cols)?;
    write_json(&paths.aggregate_json(), &AggregateDoc::new(&agg_report, &join_report))?;
    println!(
        "aggregate: {} blocks -> {} valid cells, {} training rows -> {}",
        agg_report.n_blocks,
        agg_report.n_valid_cells,
        join_report.rows_emitted,
        paths.aggregate_dir().display()
    );
    Ok(())
}

fn load_table(paths: &OutPaths) -> Result<TrainingTable> {
    let path = paths.table_csv();
    if !path.is_file() {
        return Err(CliError::missing(&path, "training table (run 'washmap aggregate' first)"));
    }
    table_csv::read(&path)
}

fn label_index(table: &TrainingTable, ind: Indicator) -> Result<usize> {
    table.label_index(ind.label_name()).ok_or_else(|| {
        CliError::Invalid(format!("training table has no '{}' column", ind.label_name()))
    })
}

pub fn train(cfg: &PipelineConfig) -> Result<()> {
    let paths = OutPaths::new(&cfg.out);
    let table = load_table(&paths)?;
    let doc: StackDoc = read_json(
        &paths.stack_json(),
        "feature stack report (run 'washmap features' first)",
    )?;
    let stats = doc.layer_stats();
    let stat_names: Vec<&String> = stats.iter().map(|s| &s.name).collect();
    let table_names: Vec<&String> = table.feature_names().iter().collect();
    if stat_names != table_names {
        return Err(CliError::Invalid(
            "feature stack report and training table disagree on feature columns".into(),
        ));
    }

    ensure_dir(&paths.train_dir())?;
    let params = cfg.forest_params();
    let indicators = cfg.indicator_list();
    for &ind in &indicators {
        let label = label_index(&table, ind)?;
        let mut model = fit_forest(&table, label, &params)?;
        model.normalization = stats.clone();
        model_json::write(&paths.model_json(ind), &model)?;
    }
    println!("train: {} models -> {}", indicators.len(), paths.train_dir().display());
    Ok(())
}

fn load_model(paths: &OutPaths, ind: Indicator) -> Result<ForestModel> {
    let path = paths.model_json(ind);
    if !path.is_file() {
        return Err(CliError::missing(
            &path,
            format!("model for '{}' (run 'washmap train' first)", ind.tag()),
        ));
    }
    let model = model_json::read(&path)?;
    if model.label_name != ind.label_name() {
        return Err(CliError::Invalid(format!(
            "{} predicts '{}', expected '{}'",
            path.display(),
            model.label_name,
            ind.label_name()
        )));
    }
    Ok(model)
}

pub fn evaluate(cfg: &PipelineConfig) -> Result<()> {
    let paths = OutPaths::new(&cfg.out);
    let table = load_table(&paths)?;
    let mode = cfg.cv_mode().map_err(CliError::Usage)?;

    let mut docs = Vec::new();
    for ind in cfg.indicator_list() {
        let model = load_model(&paths, ind)?;
        if model.feature_names != table.feature_names() {
            return Err(CliError::Invalid(format!(
                "model for '{}' was trained on different features than the table",
                ind.tag()
            )));
        }
        let label = label_index(&table, ind)?;
        let report = cross_validate(&table, label, &model.params, cfg.cv.n_folds, mode)?;
        println!(
            "evaluate {}: mean R2 {:.4}, mean RMSE {:.4} over {} folds",
            ind.label_name(),
            report.mean_r_squared,
            report.mean_rmse,
            report.n_folds
        );
        docs.push(IndicatorEvalDoc::new(ind.label_name(), &report));
    }
    ensure_dir(&paths.evaluate_dir())?;
    write_json(
        &paths.metrics_json(),
        &EvalDoc { schema_version: crate::format::SCHEMA_VERSION, indicators: docs },
    )?;
    Ok(())
}

pub fn predict(cfg: &PipelineConfig) -> Result<()> {
    let spec = cfg.grid_spec()?;
    let paths = OutPaths::new(&cfg.out);
    let (doc, rasters) = load_feature_layers(&paths, &spec)?;
    ensure_dir(&paths.predict_dir())?;

    let names: Vec<String> = doc.layers.iter().map(|l| l.name.clone()).collect();
    for ind in cfg.indicator_list() {
        let model = load_model(&paths, ind)?;
        if model.feature_names != names {
            return Err(CliError::Invalid(format!(
                "model for '{}' was trained on different features than the stack",
                ind.tag()
            )));
        }
        let label_path = paths.label_asc(ind);
        if !label_path.is_file() {
            return Err(CliError::missing(
                &label_path,
                format!("label raster for '{}' (run 'washmap aggregate' first)", ind.tag()),
            ));
        }
        let labels = ascii_grid::read(&label_path)?;
        if !labels.spec().aligned(&spec) {
            return Err(CliError::Invalid(format!(
                "label raster for '{}' is on a different grid than the config",
                ind.tag()
            )));
        }

        let mut pred = Raster::masked(spec.clone());
        let mut residual = Raster::masked(spec.clone());
        let mut row = Vec::with_capacity(rasters.len());
        'cells: for idx in 0..spec.n_cells() {
            row.clear();
            for raster in &rasters {
                match raster.get_index(idx) {
                    Some(v) => row.push(v),
                    None => continue 'cells,
                }
            }
            let p = model.predict(&row);
            pred.set_index(idx, p);
            if let Some(observed) = labels.get_index(idx) {
                residual.set_index(idx, p - observed);
            }
        }
        ascii_grid::write(&paths.pred_asc(ind), &pred)?;
        ascii_grid::write(&paths.residual_asc(ind), &residual)?;
        println!(
            "predict {}: {} cells predicted, {} with residuals",
            ind.tag(),
            pred.n_unmasked(),
            residual.n_unmasked()
        );
    }
    Ok(())
}

pub fn explain(cfg: &PipelineConfig) -> Result<()> {
    let paths = OutPaths::new(&cfg.out);
    let table = load_table(&paths)?;
    ensure_dir(&paths.explain_dir())?;

    for ind in cfg.indicator_list() {
        let model = load_model(&paths, ind)?;
        if model.feature_names != table.feature_names() {
            return Err(CliError::Invalid(format!(
                "model for '{}' was trained on different features than the table",
                ind.tag()
            )));
        }
        let attr = tree_shap(&model, table.feature_matrix())?;
        let summary = summarize_attributions(&attr, table.feature_matrix())?;
        write_attributions(&paths.attributions_csv(ind), &attr, table.cell_ids())?;
        write_json(&paths.summary_json(ind), &SummaryDoc::new(ind.label_name(), &attr, &summary))?;
        let txt = paths.summary_txt(ind);
        std::fs::write(&txt, summary.to_table()).map_err(|e| CliError::io(&txt, e))?;
        let top = &summary.features[0];
        println!(
            "explain {}: top feature '{}' (mean |phi| {:.4})",
            ind.tag(),
            top.name,
            top.mean_abs_shap
        );
    }
    Ok(())
}

pub fn run_all(cfg: &PipelineConfig) -> Result<()> {
    let stages = ["features", "aggregate", "train", "evaluate", "predict", "explain"];
    features(cfg)?;
    aggregate(cfg)?;
    train(cfg)?;
    evaluate(cfg)?;
    predict(cfg)?;
    explain(cfg)?;
    let paths = OutPaths::new(&cfg.out);
    write_json(&paths.run_manifest_json(), &RunManifestDoc::new(cfg, &stages)?)?;
    println!("run-all: complete -> {}", cfg.out.display());
    Ok(())
}
