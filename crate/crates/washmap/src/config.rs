//! Pipeline configuration (TOML) and the dataset manifest it points at.
//!
//! The config is the single record of a run: grid, indicators, forest
//! hyperparameters, cross-validation settings, thresholds, seed, paths.
//! Unknown keys are rejected everywhere. Relative paths inside the config
//! resolve against the config file's directory; the same rule applies to
//! the manifest. Flag overrides (`--seed`, `--out`) are applied before
//! validation, and the effective config is echoed into the run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use washmap_core::census::{Indicator, INDICATORS};
use washmap_core::cv::CvMode;
use washmap_core::forest::{ForestParams, MaxFeatures};
use washmap_core::poi::POI_KINDS;
use washmap_core::project::Equirectangular;
use washmap_core::resample::ResampleMethod;
use washmap_core::GridSpec;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub manifest: PathBuf,
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_indicators")]
    pub indicators: Vec<String>,
    pub grid: GridDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionDoc>,
    #[serde(default)]
    pub forest: ForestDoc,
    #[serde(default)]
    pub cv: CvDoc,
    /// A cell is dropped when more than this fraction of its area is
    /// outside any census block.
    #[serde(default = "default_nodata_area_threshold")]
    pub nodata_area_threshold: f64,
    /// Distance in meters beyond which a cell is flagged low-access.
    #[serde(default = "default_low_access_threshold")]
    pub low_access_threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub n_cols: usize,
    pub n_rows: usize,
    pub crs: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionDoc {
    pub ref_lon: f64,
    pub ref_lat: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestDoc {
    #[serde(default = "default_n_trees")]
    pub n_trees: usize,
    /// Integer → fixed count; float → fraction of p, rounded up.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_features: Option<MaxFeaturesToml>,
    #[serde(default = "default_min_samples_leaf")]
    pub min_samples_leaf: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default = "default_true")]
    pub bootstrap: bool,
    #[serde(default = "default_bootstrap_size")]
    pub bootstrap_size: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaxFeaturesToml {
    Count(usize),
    Fraction(f64),
}

impl Default for ForestDoc {
    fn default() -> Self {
        ForestDoc {
            n_trees: default_n_trees(),
            max_features: None,
            min_samples_leaf: default_min_samples_leaf(),
            max_depth: None,
            bootstrap: true,
            bootstrap_size: default_bootstrap_size(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvDoc {
    #[serde(default = "default_n_folds")]
    pub n_folds: usize,
    /// `partition` (disjoint folds) or `resample` (independent splits).
    #[serde(default = "default_cv_mode")]
    pub mode: String,
}

impl Default for CvDoc {
    fn default() -> Self {
        CvDoc { n_folds: default_n_folds(), mode: default_cv_mode() }
    }
}

fn default_indicators() -> Vec<String> {
    INDICATORS.iter().map(|i| i.tag().to_string()).collect()
}

fn default_nodata_area_threshold() -> f64 {
    0.5
}

fn default_low_access_threshold() -> f64 {
    washmap_core::distance::LOW_ACCESS_THRESHOLD_M
}

fn default_n_trees() -> usize {
    100
}

fn default_min_samples_leaf() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_bootstrap_size() -> f64 {
    1.0
}

fn default_n_folds() -> usize {
    5
}

fn default_cv_mode() -> String {
    "partition".into()
}

/// Flag values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<PipelineConfig> {
        if !path.is_file() {
            return Err(CliError::missing(path, "config file"));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.manifest = absolutize(base, &config.manifest);
        config.out = absolutize(base, &config.out);
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(out) = &overrides.out {
            config.out = out.clone();
        }
        config.validate().map_err(|m| CliError::usage(format!("{}: {m}", path.display())))?;
        Ok(config)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        self.grid_spec().map_err(|e| e.to_string())?;
        if self.indicators.is_empty() {
            return Err("indicators must not be empty".into());
        }
        for tag in &self.indicators {
            if Indicator::from_tag(tag).is_none() {
                let known: Vec<&str> = INDICATORS.iter().map(|i| i.tag()).collect();
                return Err(format!("unknown indicator '{tag}' (known: {})", known.join(", ")));
            }
        }
        let mut tags = self.indicators.clone();
        tags.sort();
        if tags.windows(2).any(|w| w[0] == w[1]) {
            return Err("duplicate indicator".into());
        }
        self.forest_params().validate().map_err(|e| e.to_string())?;
        self.cv_mode()?;
        if self.cv.n_folds < 2 {
            return Err("cv.n_folds must be at least 2".into());
        }
        if !(self.nodata_area_threshold.is_finite()
            && (0.0..=1.0).contains(&self.nodata_area_threshold))
        {
            return Err(format!(
                "nodata_area_threshold {} must be in [0, 1]",
                self.nodata_area_threshold
            ));
        }
        if !(self.low_access_threshold.is_finite() && self.low_access_threshold > 0.0) {
            return Err(format!(
                "low_access_threshold {} must be positive meters",
                self.low_access_threshold
            ));
        }
        if let Some(p) = &self.projection {
            Equirectangular::new(p.ref_lon, p.ref_lat).map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> washmap_core::Result<GridSpec> {
        GridSpec::new(
            self.grid.origin_x,
            self.grid.origin_y,
            self.grid.cell_size,
            self.grid.n_cols,
            self.grid.n_rows,
            self.grid.crs.clone(),
        )
    }

    /// Indicators in canonical order, deduplicated by `validate`.
    pub fn indicator_list(&self) -> Vec<Indicator> {
        INDICATORS
            .iter()
            .copied()
            .filter(|i| self.indicators.iter().any(|t| t == i.tag()))
            .collect()
    }

    pub fn forest_params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.forest.n_trees,
            max_features: match self.forest.max_features {
                None => ForestParams::default().max_features,
                Some(MaxFeaturesToml::Count(k)) => MaxFeatures::Count(k),
                Some(MaxFeaturesToml::Fraction(f)) => MaxFeatures::Fraction(f),
            },
            min_samples_leaf: self.forest.min_samples_leaf,
            max_depth: self.forest.max_depth,
            bootstrap: self.forest.bootstrap,
            bootstrap_size: self.forest.bootstrap_size,
            seed: self.seed,
        }
    }

    pub fn cv_mode(&self) -> std::result::Result<CvMode, String> {
        match self.cv.mode.as_str() {
            "partition" => Ok(CvMode::Partition),
            "resample" => Ok(CvMode::Resample),
            other => Err(format!("cv.mode must be 'partition' or 'resample', got '{other}'")),
        }
    }

    pub fn projection(&self) -> Option<Equirectangular> {
        self.projection
            .as_ref()
            .map(|p| Equirectangular::new(p.ref_lon, p.ref_lat).expect("validated at load"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub pois: PathBuf,
    pub blocks: PathBuf,
    pub layers: Vec<SatelliteLayer>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteLayer {
    pub name: String,
    pub method: String,
    pub sources: Vec<PathBuf>,
}

impl DatasetManifest {
    /// Loads and checks the manifest: unique layer names, known resample
    /// methods, and every referenced path present on disk.
    pub fn load(path: &Path) -> Result<DatasetManifest> {
        if !path.is_file() {
            return Err(CliError::missing(path, "dataset manifest"));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut manifest: DatasetManifest = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        manifest.pois = absolutize(base, &manifest.pois);
        manifest.blocks = absolutize(base, &manifest.blocks);
        for layer in &mut manifest.layers {
            for s in &mut layer.sources {
                *s = absolutize(base, s);
            }
        }
        manifest.validate(path)?;
        Ok(manifest)
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let usage = |m: String| CliError::usage(format!("{}: {m}", path.display()));
        if self.layers.is_empty() {
            return Err(usage("at least one satellite layer is required".into()));
        }
        let mut names: Vec<&str> = Vec::new();
        for layer in &self.layers {
            if layer.name.is_empty() {
                return Err(usage("layer names must be nonempty".into()));
            }
            if names.contains(&layer.name.as_str()) {
                return Err(usage(format!("duplicate layer name '{}'", layer.name)));
            }
            if POI_KINDS.iter().any(|k| k.feature_name() == layer.name) {
                return Err(usage(format!(
                    "layer name '{}' is reserved for the distance surfaces",
                    layer.name
                )));
            }
            names.push(&layer.name);
            parse_method(&layer.method).map_err(|m| usage(format!("layer '{}': {m}", layer.name)))?;
            if layer.sources.is_empty() {
                return Err(usage(format!("layer '{}' lists no source rasters", layer.name)));
            }
            for s in &layer.sources {
                if !s.is_file() {
                    return Err(CliError::missing(
                        s,
                        format!("source raster for layer '{}'", layer.name),
                    ));
                }
            }
        }
        if !self.pois.is_file() {
            return Err(CliError::missing(&self.pois, "poi csv"));
        }
        if !self.blocks.is_file() {
            return Err(CliError::missing(&self.blocks, "census blocks geojson"));
        }
        Ok(())
    }
}

pub fn parse_method(name: &str) -> std::result::Result<ResampleMethod, String> {
    match name {
        "nearest" => Ok(ResampleMethod::Nearest),
        "bilinear" => Ok(ResampleMethod::Bilinear),
        other => Err(format!("resample method must be 'nearest' or 'bilinear', got '{other}'")),
    }
}

pub fn method_name(method: ResampleMethod) -> &'static str {
    match method {
        ResampleMethod::Nearest => "nearest",
        ResampleMethod::Bilinear => "bilinear",
    }
}

fn absolutize(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ExitCode;

    const MINIMAL: &str = r#"
manifest = "dataset.toml"
out = "run"

[grid]
origin_x = 0.0
origin_y = 25000.0
cell_size = 250.0
n_cols = 100
n_rows = 100
crs = "local-m"
"#;

    fn write_config(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.toml");
        std::fs::write(&path, content).unwrap();
        (dir, path)
    }

    /// Splices a snippet into the minimal config: top-level keys must come
    /// before the first table header, tables go at the end.
    fn compose(snippet: &str) -> String {
        if snippet.starts_with('[') {
            format!("{MINIMAL}\n{snippet}\n")
        } else {
            format!("{snippet}\n{MINIMAL}")
        }
    }

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let (dir, path) = write_config(MINIMAL);
        let cfg = PipelineConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.indicators, ["water", "sewage", "toilet"]);
        assert_eq!(cfg.forest_params(), ForestParams::default());
        assert_eq!(cfg.cv.n_folds, 5);
        assert_eq!(cfg.cv_mode().unwrap(), CvMode::Partition);
        assert_eq!(cfg.nodata_area_threshold, 0.5);
        assert_eq!(cfg.low_access_threshold, 5000.0);
        assert_eq!(cfg.manifest, dir.path().join("dataset.toml"));
        assert_eq!(cfg.out, dir.path().join("run"));
        assert_eq!(cfg.indicator_list().len(), 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let (_d, path) = write_config(&compose("mystery = 1"));
        let err = PipelineConfig::load(&path, &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), ExitCode::Usage);
        assert!(err.to_string().contains("mystery"), "{err}");

        let (_d, path) = write_config(&MINIMAL.replace("[grid]", "[grid]\nskew = 2.0"));
        let err = PipelineConfig::load(&path, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("skew"), "{err}");
    }

    #[test]
    fn overrides_beat_the_file() {
        let (dir, path) = write_config(&compose("seed = 7"));
        let over = Overrides { seed: Some(99), out: Some(PathBuf::from("/tmp/elsewhere")) };
        let cfg = PipelineConfig::load(&path, &over).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.out, PathBuf::from("/tmp/elsewhere"));
        assert_eq!(cfg.manifest, dir.path().join("dataset.toml"));
    }

    #[test]
    fn max_features_distinguishes_count_from_fraction() {
        let (_d, path) = write_config(&format!("{MINIMAL}\n[forest]\nmax_features = 4\n"));
        let cfg = PipelineConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.forest_params().max_features, MaxFeatures::Count(4));

        let (_d, path) = write_config(&format!("{MINIMAL}\n[forest]\nmax_features = 0.25\n"));
        let cfg = PipelineConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.forest_params().max_features, MaxFeatures::Fraction(0.25));
    }

    #[test]
    fn bad_values_fail_validation() {
        for (snippet, needle) in [
            ("indicators = [\"water\", \"power\"]", "power"),
            ("indicators = []", "empty"),
            ("indicators = [\"water\", \"water\"]", "duplicate"),
            ("[cv]\nmode = \"jackknife\"", "jackknife"),
            ("[cv]\nn_folds = 1", "n_folds"),
            ("nodata_area_threshold = 1.5", "nodata_area_threshold"),
            ("low_access_threshold = -2.0", "low_access_threshold"),
            ("[forest]\nn_trees = 0", "n_trees"),
            ("[projection]\nref_lon = 10.0\nref_lat = 95.0", "lat"),
        ] {
            let (_d, path) = write_config(&compose(snippet));
            let err = PipelineConfig::load(&path, &Overrides::default()).unwrap_err();
            assert_eq!(err.exit_code(), ExitCode::Usage, "{snippet}");
            assert!(
                err.to_string().to_lowercase().contains(needle),
                "{snippet} -> {err}"
            );
        }
    }

    #[test]
    fn missing_config_is_a_usage_error() {
        let err =
            PipelineConfig::load(Path::new("/nonexistent/config.toml"), &Overrides::default())
                .unwrap_err();
        assert_eq!(err.exit_code(), ExitCode::Usage);
    }

    #[test]
    fn subset_of_indicators_is_allowed() {
        let (_d, path) = write_config(&compose("indicators = [\"sewage\"]"));
        let cfg = PipelineConfig::load(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.indicator_list(), [Indicator::Sewage]);
    }

    #[test]
    fn manifest_checks_layers_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        let touch = |name: &str| {
            let p = dir.path().join(name);
            std::fs::write(&p, "x").unwrap();
            p
        };
        touch("veg.asc");
        touch("pois.csv");
        touch("blocks.geojson");
        let path = dir.path().join("dataset.toml");

        let good = r#"
pois = "pois.csv"
blocks = "blocks.geojson"

[[layers]]
name = "vegetation"
method = "bilinear"
sources = ["veg.asc"]
"#;
        std::fs::write(&path, good).unwrap();
        let m = DatasetManifest::load(&path).unwrap();
        assert_eq!(m.layers[0].name, "vegetation");
        assert_eq!(m.layers[0].sources[0], dir.path().join("veg.asc"));

        let missing = good.replace("veg.asc", "gone.asc");
        std::fs::write(&path, missing).unwrap();
        let err = DatasetManifest::load(&path).unwrap_err();
        assert_eq!(err.exit_code(), ExitCode::Usage);
        assert!(err.to_string().contains("vegetation"), "{err}");

        let reserved = good.replace("vegetation", "dist_waterway");
        std::fs::write(&path, reserved).unwrap();
        let err = DatasetManifest::load(&path).unwrap_err();
        assert!(err.to_string().contains("reserved"), "{err}");

        let dup = format!("{good}\n[[layers]]\nname = \"vegetation\"\nmethod = \"nearest\"\nsources = [\"veg.asc\"]\n");
        std::fs::write(&path, dup).unwrap();
        let err = DatasetManifest::load(&path).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");

        let bad_method = good.replace("bilinear", "cubic");
        std::fs::write(&path, bad_method).unwrap();
        let err = DatasetManifest::load(&path).unwrap_err();
        assert!(err.to_string().contains("cubic"), "{err}");
    }
}
