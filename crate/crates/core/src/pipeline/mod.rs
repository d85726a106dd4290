//! Configuration, the end-to-end run, the buffer-distance sweep and the
//! run manifest.

mod config;
mod stages;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::{cut_by_distance, read_dendrogram_json};
use crate::error::{Error, Result};
use crate::fim::{database_from_transaction_set, mine_frequent_itemsets, read_itemsets_csv, MiningParams};
use crate::fixtures::synthetic_bundle;
use crate::geo::{load_feature_collection, write_feature_collection};
use crate::matrix::read_matrix_csv;
use crate::neighborhood::extract_transactions;

pub use config::{default_output_dir, InputEntry, PipelineConfig, OUT_DIR_ENV};
pub use stages::{
    city_from_path, cluster_stage, embed_stage, extract_stage, matrix_stage, mine_stage,
    report_stage, ArtifactLayout, ClusterOutputs, ReportInputs,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub stage: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub entries: Vec<ManifestEntry>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("manifest serializes")
    }

    pub fn count(&self, stage: &str) -> usize {
        self.entries.iter().filter(|e| e.stage == stage).count()
    }

    fn record(&mut self, root: &Path, path: &Path, stage: &str) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let rel = path.strip_prefix(root).unwrap_or(path);
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        self.entries.push(ManifestEntry {
            path: rel,
            stage: stage.into(),
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::malformed(path, e.to_string()))
}

/// Runs `f` on a pool with `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Full run: extract and mine per city, then matrix, embedding, clustering
/// and reports. Every artifact lands in `cfg.output_dir` and is listed,
/// with its hash, in `manifest.json`. With a single city the run stops after
/// mining.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let mut inputs = cfg.inputs.clone();
    inputs.sort_by(|a, b| a.city_name.cmp(&b.city_name));
    if inputs.len() >= 2 {
        cfg.validate_k_range(inputs.len())?;
    }
    let layout = ArtifactLayout::new(&cfg.output_dir);
    fs::create_dir_all(&layout.root).map_err(|e| Error::io(&layout.root, e))?;
    let params = MiningParams::relative(cfg.minsup_relative)?;
    let mut manifest = RunManifest::default();

    info!("extracting and mining {} cities", inputs.len());
    let per_city: Vec<Result<()>> = with_jobs(cfg.jobs, || {
        inputs
            .par_iter()
            .map(|input| {
                let city = input.city_name.as_str();
                let tx = layout.transactions(city);
                extract_stage(&input.path, city, &cfg.code_attribute, cfg.buffer_distance_m, &tx)
                    .map_err(|e| e.in_stage("extract", Some(city)))?;
                mine_stage(&tx, &params, &layout.itemsets(city))
                    .map_err(|e| e.in_stage("mine", Some(city)))?;
                Ok(())
            })
            .collect()
    })?;
    per_city.into_iter().collect::<Result<()>>()?;
    for input in &inputs {
        manifest.record(&layout.root, &layout.transactions(&input.city_name), "extract")?;
    }
    for input in &inputs {
        manifest.record(&layout.root, &layout.itemsets(&input.city_name), "mine")?;
    }

    if inputs.len() < 2 {
        manifest
            .notes
            .push("clustering needs at least 2 cities; stopped after mining".into());
        write_manifest(&manifest, &layout)?;
        return Ok(manifest);
    }

    let fi_files: Vec<(String, PathBuf)> = inputs
        .iter()
        .map(|i| (i.city_name.clone(), layout.itemsets(&i.city_name)))
        .collect();
    info!("merging itemsets");
    matrix_stage(&fi_files, &layout.matrix()).map_err(|e| e.in_stage("matrix", None))?;
    manifest.record(&layout.root, &layout.matrix(), "matrix")?;

    info!("embedding with {}", cfg.embedding);
    let umap = crate::embedding::UmapParams {
        seed: cfg.seed,
        ..cfg.umap
    };
    embed_stage(&layout.matrix(), cfg.embedding, &umap, &layout.embedding(), &layout.distances())
        .map_err(|e| e.in_stage("embed", None))?;
    manifest.record(&layout.root, &layout.embedding(), "embed")?;
    manifest.record(&layout.root, &layout.distances(), "embed")?;

    info!("clustering");
    let clusters = cluster_stage(&layout.embedding(), cfg.k_min..=cfg.k_max, cfg.cut_distance, &layout)
        .map_err(|e| e.in_stage("cluster", None))?;
    for p in [layout.dendrogram(), layout.k_selection(), layout.assignment()] {
        manifest.record(&layout.root, &p, "cluster")?;
    }
    manifest.notes.push(clusters.selection.rationale.clone());

    info!("rendering reports");
    let report = ReportInputs {
        embedding: layout.embedding(),
        dendrogram: layout.dendrogram(),
        assignment: layout.assignment(),
        layers: inputs.iter().map(|i| (i.city_name.clone(), i.path.clone())).collect(),
        code_attribute: &cfg.code_attribute,
        colors: &cfg.colors,
        render: &cfg.render,
    };
    for p in report_stage(&report, &layout).map_err(|e| e.in_stage("report", None))? {
        manifest.record(&layout.root, &p, "report")?;
    }

    write_manifest(&manifest, &layout)?;
    Ok(manifest)
}

fn write_manifest(m: &RunManifest, layout: &ArtifactLayout) -> Result<()> {
    let path = layout.manifest();
    fs::write(&path, m.to_json()).map_err(|e| Error::io(&path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub buffer_distance_m: f64,
    pub transaction_count: usize,
    pub median_transaction_length: f64,
    pub mean_transaction_length: f64,
    pub fi_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub city_name: String,
    pub rows: Vec<SweepRow>,
}

pub fn format_sweep_csv(r: &SweepResult) -> String {
    let mut out = String::from(
        "buffer_distance_m,transaction_count,median_transaction_length,mean_transaction_length,fi_count\n",
    );
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{}",
            row.buffer_distance_m,
            row.transaction_count,
            row.median_transaction_length,
            row.mean_transaction_length,
            row.fi_count
        );
    }
    out
}

fn median(sorted: &[usize]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

/// Extracts and mines one city at each distance; writes `buffer_sweep.csv`.
pub fn run_buffer_sweep(cfg: &PipelineConfig, distances: &[f64]) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.inputs.len() != 1 {
        return Err(Error::Config(format!(
            "the sweep takes exactly one city, got {}",
            cfg.inputs.len()
        )));
    }
    if distances.is_empty() || distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::Config("sweep distances must be a non-empty list of values >= 0".into()));
    }
    let input = &cfg.inputs[0];
    let city = input.city_name.as_str();
    let layer = load_feature_collection(&input.path, &cfg.code_attribute, city)
        .map_err(|e| e.in_stage("extract", Some(city)))?;
    let params = MiningParams::relative(cfg.minsup_relative)?;

    let rows = with_jobs(cfg.jobs, || {
        distances
            .iter()
            .map(|&d| {
                let ts = extract_transactions(&layer, d).map_err(|e| e.in_stage("extract", Some(city)))?;
                let mut lengths: Vec<usize> = ts.transactions.iter().map(|t| t.len()).collect();
                lengths.sort_unstable();
                let db = database_from_transaction_set(&ts).map_err(|e| e.in_stage("mine", Some(city)))?;
                let fi_count = mine_frequent_itemsets(&db, &params).len();
                Ok(SweepRow {
                    buffer_distance_m: d,
                    transaction_count: lengths.len(),
                    median_transaction_length: median(&lengths),
                    mean_transaction_length: lengths.iter().sum::<usize>() as f64 / lengths.len().max(1) as f64,
                    fi_count,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let result = SweepResult {
        city_name: city.into(),
        rows,
    };
    let layout = ArtifactLayout::new(&cfg.output_dir);
    fs::create_dir_all(&layout.root).map_err(|e| Error::io(&layout.root, e))?;
    let path = layout.sweep();
    fs::write(&path, format_sweep_csv(&result)).map_err(|e| Error::io(&path, e))?;
    Ok(result)
}

/// Writes the seeded six-city synthetic bundle as GeoJSON files under `dir`
/// and returns a matching config (PCA, k in 2..=5, output in `dir/out`).
pub fn write_synthetic_bundle(dir: &Path, seed: u64) -> Result<PipelineConfig> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut inputs = Vec::new();
    for (layer, _) in synthetic_bundle(seed) {
        let path = dir.join(format!("{}.geojson", layer.city_name));
        write_feature_collection(&layer, &path)?;
        inputs.push(InputEntry {
            city_name: layer.city_name.clone(),
            path,
        });
    }
    Ok(PipelineConfig {
        inputs,
        k_min: 2,
        k_max: 5,
        seed,
        output_dir: dir.join("out"),
        ..PipelineConfig::default()
    })
}

/// Structural properties of a finished run, used when full-scale results
/// cannot be compared number for number.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralReport {
    pub fi_counts: BTreeMap<String, usize>,
    pub matrix_shape: (usize, usize),
    pub union_fi_count: usize,
    /// A cut height giving exactly `target_k` non-empty groups, if any.
    pub target_k_cut: Option<f64>,
    pub target_k: usize,
}

impl StructuralReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (city, &n) in &self.fi_counts {
            if n == 0 {
                out.push(format!("{city} has no frequent itemsets"));
            }
        }
        if self.matrix_shape != (self.fi_counts.len(), self.union_fi_count) {
            out.push(format!(
                "matrix shape {:?} differs from cities x union itemsets ({}, {})",
                self.matrix_shape,
                self.fi_counts.len(),
                self.union_fi_count
            ));
        }
        if self.target_k_cut.is_none() {
            out.push(format!("no cut height yields {} groups", self.target_k));
        }
        out
    }
}

/// Checks the artifacts of a run in `out_dir` for the listed cities.
pub fn structural_check(out_dir: &Path, cities: &[String], target_k: usize) -> Result<StructuralReport> {
    let layout = ArtifactLayout::new(out_dir);
    let mut fi_counts = BTreeMap::new();
    let mut union = std::collections::BTreeSet::new();
    for city in cities {
        let fis = read_itemsets_csv(layout.itemsets(city))?;
        for fi in &fis {
            union.insert(fi.key());
        }
        fi_counts.insert(city.clone(), fis.len());
    }
    let m = read_matrix_csv(layout.matrix())?;
    let d = read_dendrogram_json(layout.dendrogram())?;
    let n = d.len();
    let mut target_k_cut = None;
    if target_k >= 1 && target_k <= n {
        let lo = if target_k < n { d.merges[n - target_k - 1].height } else { 0.0 };
        let hi = d.merges.get(n - target_k).map_or(lo + 1.0, |m| m.height);
        let h = (lo + hi) / 2.0;
        if cut_by_distance(&d, h)?.members().iter().filter(|g| !g.is_empty()).count() == target_k {
            target_k_cut = Some(h);
        }
    }
    Ok(StructuralReport {
        fi_counts,
        matrix_shape: (m.rows(), m.cols()),
        union_fi_count: union.len(),
        target_k_cut,
        target_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[1, 2, 3]), 2.0);
        assert_eq!(median(&[1, 2, 3, 4]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }

    #[test]
    fn sha_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
