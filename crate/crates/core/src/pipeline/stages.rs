//! One function per stage. Each reads the previous stage's files and writes
//! its own, so a full run is exactly the composition of the stages.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use crate::clustering::{
    cut_by_distance, cut_by_k, read_assignment_json, read_dendrogram_json, select_k,
    ward_linkage_embedding, write_assignment_json, write_dendrogram_json, write_k_selection_csv,
    ClusterAssignment, CutCriterion, Dendrogram, KSelectionReport,
};
use crate::embedding::{
    pairwise_sqeuclidean, pca_embed, read_embedding_csv, umap_embed, write_distance_csv,
    write_embedding_csv, Embedding, EmbeddingMethod, UmapParams,
};
use crate::error::{Error, Result};
use crate::fim::{
    build_database, mine_frequent_itemsets, read_itemsets_csv, write_itemsets_csv,
    FrequentItemset, MiningParams,
};
use crate::geo::load_feature_collection;
use crate::matrix::{merge_city_fis, read_matrix_csv, write_matrix_csv, CityFIMatrix};
use crate::neighborhood::{export_transactions, extract_transactions, read_transactions, TransactionSet};
use crate::report::{
    render_city_thumbnail, render_dendrogram, render_heatmap, render_scatter, write_svg, ColorMap,
    LeafOrdering, RenderConfig,
};

/// File names inside an output directory.
#[derive(Debug, Clone)]
pub struct ArtifactLayout {
    pub root: PathBuf,
}

impl ArtifactLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ArtifactLayout { root: root.into() }
    }

    pub fn transactions(&self, city: &str) -> PathBuf {
        self.root.join("transactions").join(format!("{city}.transactions.txt"))
    }

    pub fn itemsets(&self, city: &str) -> PathBuf {
        self.root.join("itemsets").join(format!("{city}.fi.csv"))
    }

    pub fn matrix(&self) -> PathBuf {
        self.root.join("city_fi_matrix.csv")
    }

    pub fn embedding(&self) -> PathBuf {
        self.root.join("embedding.csv")
    }

    pub fn distances(&self) -> PathBuf {
        self.root.join("distances.csv")
    }

    pub fn dendrogram(&self) -> PathBuf {
        self.root.join("dendrogram.json")
    }

    pub fn k_selection(&self) -> PathBuf {
        self.root.join("k_selection.csv")
    }

    pub fn assignment(&self) -> PathBuf {
        self.root.join("assignment.json")
    }

    pub fn heatmap_svg(&self) -> PathBuf {
        self.root.join("similarity.heatmap.svg")
    }

    pub fn dendrogram_svg(&self) -> PathBuf {
        self.root.join("cities.dendrogram.svg")
    }

    pub fn scatter_svg(&self) -> PathBuf {
        self.root.join("cities.scatter.svg")
    }

    pub fn thumbnail_svg(&self, city: &str) -> PathBuf {
        self.root.join("thumbnails").join(format!("{city}.thumbnail.svg"))
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn sweep(&self) -> PathBuf {
        self.root.join("buffer_sweep.csv")
    }
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

pub(crate) fn require(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingPrerequisite(path.to_owned()))
    }
}

/// City name from `<city>.fi.csv` or `<city>.<anything>`.
pub fn city_from_path(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    name.strip_suffix(".fi.csv")
        .or_else(|| name.split('.').next())
        .unwrap_or(name)
        .to_owned()
}

pub fn extract_stage(
    input: &Path,
    city: &str,
    code_attribute: &str,
    buffer_distance: f64,
    out: &Path,
) -> Result<TransactionSet> {
    require(input)?;
    let layer = load_feature_collection(input, code_attribute, city)?;
    let ts = extract_transactions(&layer, buffer_distance)?;
    ensure_parent(out)?;
    export_transactions(&ts, out)?;
    Ok(ts)
}

pub fn mine_stage(transactions: &Path, params: &MiningParams, out: &Path) -> Result<Vec<FrequentItemset>> {
    require(transactions)?;
    let db = build_database(read_transactions(transactions)?)?;
    let fis = mine_frequent_itemsets(&db, params);
    ensure_parent(out)?;
    write_itemsets_csv(&fis, out)?;
    Ok(fis)
}

pub fn matrix_stage(fi_files: &[(String, PathBuf)], out: &Path) -> Result<CityFIMatrix> {
    let mut loaded = Vec::with_capacity(fi_files.len());
    for (city, path) in fi_files {
        require(path)?;
        loaded.push((city.clone(), read_itemsets_csv(path)?));
    }
    let m = merge_city_fis(loaded.iter().map(|(c, f)| (c.as_str(), f.as_slice())))?;
    ensure_parent(out)?;
    write_matrix_csv(&m, out)?;
    Ok(m)
}

pub fn embed_stage(
    matrix: &Path,
    method: EmbeddingMethod,
    umap: &UmapParams,
    out_embedding: &Path,
    out_distances: &Path,
) -> Result<Embedding> {
    require(matrix)?;
    let m = read_matrix_csv(matrix)?;
    let e = match method {
        EmbeddingMethod::Pca => pca_embed(&m)?,
        EmbeddingMethod::Umap => umap_embed(&m, umap)?,
    };
    ensure_parent(out_embedding)?;
    write_embedding_csv(&e, out_embedding)?;
    ensure_parent(out_distances)?;
    write_distance_csv(&pairwise_sqeuclidean(&e), out_distances)?;
    Ok(e)
}

#[derive(Debug, Clone)]
pub struct ClusterOutputs {
    pub dendrogram: Dendrogram,
    pub selection: KSelectionReport,
    pub assignment: ClusterAssignment,
}

/// Linkage, k selection and the final cut. Needs only the embedding file.
pub fn cluster_stage(
    embedding: &Path,
    k_range: RangeInclusive<usize>,
    cut_distance: Option<f64>,
    layout: &ArtifactLayout,
) -> Result<ClusterOutputs> {
    require(embedding)?;
    let e = read_embedding_csv(embedding, EmbeddingMethod::Pca)?;
    let dendrogram = ward_linkage_embedding(&e)?;
    let selection = select_k(&e.coords, &dendrogram, k_range)?;
    let assignment = match cut_distance {
        Some(d) => cut_by_distance(&dendrogram, d)?,
        None => cut_by_k(&dendrogram, selection.chosen_k)?,
    };
    for p in [layout.dendrogram(), layout.k_selection(), layout.assignment()] {
        ensure_parent(&p)?;
    }
    write_dendrogram_json(&dendrogram, layout.dendrogram())?;
    write_k_selection_csv(&selection, layout.k_selection())?;
    write_assignment_json(&assignment, layout.assignment())?;
    Ok(ClusterOutputs {
        dendrogram,
        selection,
        assignment,
    })
}

/// Height that reproduces an assignment's partition when drawn as a cut.
fn cut_height(d: &Dendrogram, a: &ClusterAssignment) -> f64 {
    match a.criterion {
        CutCriterion::CutDistance(h) => h,
        CutCriterion::TargetK(k) => {
            let n = d.len();
            let below = if k < n { d.merges[n - k - 1].height } else { 0.0 };
            match d.merges.get(n - k) {
                Some(above) if k > 1 => (below + above.height) / 2.0,
                _ => below * 1.05 + 1e-9,
            }
        }
    }
}

/// Inputs for the report stage. `layers` maps city names to land-use files
/// for thumbnails and may be empty.
#[derive(Debug, Clone)]
pub struct ReportInputs<'a> {
    pub embedding: PathBuf,
    pub dendrogram: PathBuf,
    pub assignment: PathBuf,
    pub layers: BTreeMap<String, PathBuf>,
    pub code_attribute: &'a str,
    pub colors: &'a ColorMap,
    pub render: &'a RenderConfig,
}

/// Writes heatmap, dendrogram, scatter and thumbnail SVGs; returns their paths.
pub fn report_stage(inputs: &ReportInputs<'_>, layout: &ArtifactLayout) -> Result<Vec<PathBuf>> {
    for p in [&inputs.embedding, &inputs.dendrogram, &inputs.assignment] {
        require(p)?;
    }
    let e = read_embedding_csv(&inputs.embedding, EmbeddingMethod::Pca)?;
    let d = read_dendrogram_json(&inputs.dendrogram)?;
    let a = read_assignment_json(&inputs.assignment)?;
    if d.leaves != e.city_names {
        return Err(Error::LabelMismatch("dendrogram leaves differ from embedding cities".into()));
    }
    let mut written = Vec::new();

    let order: Vec<String> = match inputs.render.leaf_ordering {
        LeafOrdering::Dendrogram => d.leaf_order().into_iter().map(|i| d.leaves[i].clone()).collect(),
        LeafOrdering::Input => e.city_names.clone(),
    };
    let heat = render_heatmap(&pairwise_sqeuclidean(&e), Some(&order), inputs.colors, inputs.render)?;
    let dendro = render_dendrogram(&d, Some(cut_height(&d, &a)), inputs.render)?;

    let mut thumbs = BTreeMap::new();
    for (city, path) in &inputs.layers {
        require(path)?;
        let layer = load_feature_collection(path, inputs.code_attribute, city)?;
        let svg = render_city_thumbnail(&layer, inputs.colors, inputs.render.thumbnail_size);
        let out = layout.thumbnail_svg(city);
        ensure_parent(&out)?;
        write_svg(&svg, &out)?;
        written.push(out);
        thumbs.insert(city.clone(), svg);
    }
    let scatter = render_scatter(&e, &a, Some(&thumbs).filter(|t| !t.is_empty()), inputs.render)?;

    for (svg, path) in [
        (heat, layout.heatmap_svg()),
        (dendro, layout.dendrogram_svg()),
        (scatter, layout.scatter_svg()),
    ] {
        ensure_parent(&path)?;
        write_svg(&svg, &path)?;
        written.push(path);
    }
    written.sort();
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn city_names_from_file_names() {
        assert_eq!(city_from_path(Path::new("x/BRNO.fi.csv")), "BRNO");
        assert_eq!(city_from_path(Path::new("LYON.transactions.txt")), "LYON");
    }

    #[test]
    fn missing_inputs_are_named() {
        let err = mine_stage(
            Path::new("/nonexistent/t.txt"),
            &MiningParams::relative(0.1).unwrap(),
            Path::new("/tmp/x.csv"),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingPrerequisite(ref p) if p.ends_with("t.txt")));
    }
}
