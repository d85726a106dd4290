use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingMethod, UmapParams};
use crate::error::{Error, Result};
use crate::fim::DEFAULT_MINSUP_RELATIVE;
use crate::geo::DEFAULT_CODE_ATTRIBUTE;
use crate::neighborhood::DEFAULT_BUFFER_DISTANCE;
use crate::report::{ColorMap, RenderConfig};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "URBANFIM_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEntry {
    pub city_name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Vec<InputEntry>,
    pub code_attribute: String,
    pub buffer_distance_m: f64,
    pub minsup_relative: f64,
    pub embedding: EmbeddingMethod,
    pub umap: UmapParams,
    pub k_min: usize,
    pub k_max: usize,
    pub cut_distance: Option<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads for per-city extraction and mining; `None` uses all cores.
    pub jobs: Option<usize>,
    pub colors: ColorMap,
    pub render: RenderConfig,
}

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("urbanfim-out"))
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            code_attribute: DEFAULT_CODE_ATTRIBUTE.into(),
            buffer_distance_m: DEFAULT_BUFFER_DISTANCE,
            minsup_relative: DEFAULT_MINSUP_RELATIVE,
            embedding: EmbeddingMethod::Pca,
            umap: UmapParams::default(),
            k_min: 2,
            k_max: 10,
            cut_distance: None,
            seed: 42,
            output_dir: default_output_dir(),
            jobs: None,
            colors: ColorMap::default(),
            render: RenderConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Parses a JSON config; relative input paths resolve against `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        for input in &mut cfg.inputs {
            if input.path.is_relative() {
                input.path = base.join(&input.path);
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.inputs.is_empty() {
            return fail("at least one input is required".into());
        }
        let mut names = BTreeSet::new();
        for input in &self.inputs {
            if input.city_name.is_empty() {
                return fail(format!("input {} has an empty city name", input.path.display()));
            }
            if !names.insert(input.city_name.as_str()) {
                return fail(format!("city {} listed twice", input.city_name));
            }
        }
        if !(self.buffer_distance_m.is_finite() && self.buffer_distance_m >= 0.0) {
            return fail(format!("buffer distance must be >= 0, got {}", self.buffer_distance_m));
        }
        if !(self.minsup_relative > 0.0 && self.minsup_relative <= 1.0) {
            return fail(format!("minsup must be in (0, 1], got {}", self.minsup_relative));
        }
        if self.k_min < 2 || self.k_min > self.k_max {
            return fail(format!("invalid k range {}..={}", self.k_min, self.k_max));
        }
        if let Some(c) = self.cut_distance {
            if !(c.is_finite() && c >= 0.0) {
                return fail(format!("cut distance must be >= 0, got {c}"));
            }
        }
        if self.jobs == Some(0) {
            return fail("jobs must be at least 1".into());
        }
        self.colors.validate()?;
        self.render.validate()
    }

    /// The k range must fit the number of cities when clustering runs.
    pub fn validate_k_range(&self, cities: usize) -> Result<()> {
        if cities >= 2 && (cities < 3 || self.k_max > cities - 1) {
            return Err(Error::Config(format!(
                "k range {}..={} needs k_max <= {} for {cities} cities",
                self.k_min,
                self.k_max,
                cities.saturating_sub(1)
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_input() -> PipelineConfig {
        PipelineConfig {
            inputs: vec![InputEntry {
                city_name: "A".into(),
                path: "a.geojson".into(),
            }],
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = PipelineConfig::from_json(
            r#"{"inputs": [{"city_name": "A", "path": "a.geojson"}], "minsup_relative": 0.2}"#,
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(cfg.inputs[0].path, PathBuf::from("/data/a.geojson"));
        assert_eq!(cfg.minsup_relative, 0.2);
        assert_eq!(cfg.buffer_distance_m, 100.0);
        assert_eq!(cfg.code_attribute, "code_2018");
        assert_eq!((cfg.k_min, cfg.k_max), (2, 10));
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_fields_are_config_errors() {
        let e = PipelineConfig::from_json(r#"{"bufer": 3}"#, Path::new(".")).unwrap_err();
        assert_eq!(e.kind(), crate::ErrorKind::Config);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(PipelineConfig::default().validate().is_err());
        for bad in [
            PipelineConfig { buffer_distance_m: -1.0, ..with_input() },
            PipelineConfig { minsup_relative: 0.0, ..with_input() },
            PipelineConfig { minsup_relative: 1.5, ..with_input() },
            PipelineConfig { k_min: 1, ..with_input() },
            PipelineConfig { k_min: 5, k_max: 4, ..with_input() },
            PipelineConfig { cut_distance: Some(f64::NAN), ..with_input() },
            PipelineConfig { jobs: Some(0), ..with_input() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        let mut dup = with_input();
        dup.inputs.push(dup.inputs[0].clone());
        assert!(dup.validate().is_err());
    }

    #[test]
    fn k_range_against_city_count() {
        let cfg = PipelineConfig { k_max: 5, ..with_input() };
        assert!(cfg.validate_k_range(6).is_ok());
        assert!(cfg.validate_k_range(5).is_err());
        assert!(cfg.validate_k_range(1).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let cfg = with_input();
        let back = PipelineConfig::from_json(&cfg.to_json(), Path::new("")).unwrap();
        assert_eq!(back, cfg);
    }
}
