//! Two-dimensional city embeddings and their pairwise distances.

mod pca;
mod umap;

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighborhood::csv_field;

pub use pca::{pca_embed, pca_project};
pub use umap::{fit_output_kernel, smooth_knn_bandwidth, umap_embed, UmapParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMethod {
    Pca,
    Umap,
}

impl fmt::Display for EmbeddingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EmbeddingMethod::Pca => "pca",
            EmbeddingMethod::Umap => "umap",
        })
    }
}

impl FromStr for EmbeddingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pca" => Ok(EmbeddingMethod::Pca),
            "umap" => Ok(EmbeddingMethod::Umap),
            other => Err(Error::Config(format!("unknown embedding method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub city_names: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    pub method: EmbeddingMethod,
    pub seed: Option<u64>,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Symmetric matrix of squared Euclidean distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    /// Row-major `n x n`.
    pub values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.len() + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn pairwise_sqeuclidean(e: &Embedding) -> DistanceMatrix {
    let n = e.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = e.coords[i][0] - e.coords[j][0];
            let dy = e.coords[i][1] - e.coords[j][1];
            let d = dx * dx + dy * dy;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix {
        labels: e.city_names.clone(),
        values,
    }
}

/// `city,x,y`, coordinates printed at round-trip precision.
pub fn format_embedding_csv(e: &Embedding) -> String {
    let mut out = String::from("city,x,y\n");
    for (name, [x, y]) in e.city_names.iter().zip(&e.coords) {
        let _ = writeln!(out, "{},{x},{y}", csv_field(name));
    }
    out
}

pub fn write_embedding_csv(e: &Embedding, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_embedding_csv(e)).map_err(|err| Error::io(path, err))
}

/// The method tag is not stored in the CSV; the caller supplies it.
pub fn parse_embedding_csv(text: &str, method: EmbeddingMethod) -> std::result::Result<Embedding, String> {
    let mut lines = text.lines().filter(|l| !l.is_empty());
    if lines.next() != Some("city,x,y") {
        return Err("embedding header must be `city,x,y`".into());
    }
    let mut city_names = Vec::new();
    let mut coords = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut f = line.rsplitn(3, ',');
        let (y, x, city) = match (f.next(), f.next(), f.next()) {
            (Some(y), Some(x), Some(c)) => (y, x, c),
            _ => return Err(format!("row {}: expected 3 fields", i + 1)),
        };
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("row {}: bad coordinate {s:?}", i + 1))
        };
        coords.push([parse(x)?, parse(y)?]);
        city_names.push(city.trim_matches('"').to_owned());
    }
    Ok(Embedding {
        city_names,
        coords,
        method,
        seed: None,
    })
}

pub fn read_embedding_csv(path: impl AsRef<Path>, method: EmbeddingMethod) -> Result<Embedding> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embedding_csv(&text, method).map_err(|m| Error::malformed(path, m))
}

pub fn format_distance_csv(d: &DistanceMatrix) -> String {
    let mut out = String::from("city");
    for l in &d.labels {
        out.push(',');
        out.push_str(&csv_field(l));
    }
    out.push('\n');
    let n = d.len();
    for (i, l) in d.labels.iter().enumerate() {
        out.push_str(&csv_field(l));
        for j in 0..n {
            let _ = write!(out, ",{}", d.values[i * n + j]);
        }
        out.push('\n');
    }
    out
}

pub fn write_distance_csv(d: &DistanceMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_distance_csv(d)).map_err(|e| Error::io(path, e))
}

pub fn parse_distance_csv(text: &str) -> std::result::Result<DistanceMatrix, String> {
    let mut lines = text.lines().filter(|l| !l.is_empty());
    let header = lines.next().ok_or("empty distance file")?;
    let mut h = header.split(',');
    if h.next() != Some("city") {
        return Err("distance header must start with `city`".into());
    }
    let labels: Vec<String> = h.map(str::to_owned).collect();
    let n = labels.len();
    let mut values = Vec::with_capacity(n * n);
    for (i, line) in lines.enumerate() {
        let mut f = line.split(',');
        if f.next() != Some(labels.get(i).map(String::as_str).unwrap_or("")) {
            return Err(format!("row {} label does not match header", i + 1));
        }
        for v in f {
            values.push(v.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1))?);
        }
    }
    if values.len() != n * n {
        return Err(format!("expected {n}x{n} values, got {}", values.len()));
    }
    Ok(DistanceMatrix { labels, values })
}

pub fn read_distance_csv(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_distance_csv(&text).map_err(|m| Error::malformed(path, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(points: &[[f64; 2]]) -> Embedding {
        Embedding {
            city_names: (0..points.len()).map(|i| format!("c{i}")).collect(),
            coords: points.to_vec(),
            method: EmbeddingMethod::Pca,
            seed: None,
        }
    }

    #[test]
    fn three_four_five() {
        let d = pairwise_sqeuclidean(&emb(&[[0.0, 0.0], [3.0, 4.0]]));
        assert_eq!(d.get(0, 1), 25.0);
        assert_eq!(d.get(1, 0), 25.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn identical_points() {
        let d = pairwise_sqeuclidean(&emb(&[[1.5, -2.0], [1.5, -2.0]]));
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn csv_round_trips() {
        let e = emb(&[[0.1, 1.0 / 3.0], [-2.5e-7, 12345.678]]);
        let back = parse_embedding_csv(&format_embedding_csv(&e), EmbeddingMethod::Pca).unwrap();
        assert_eq!(back, e);
        let d = pairwise_sqeuclidean(&e);
        assert_eq!(parse_distance_csv(&format_distance_csv(&d)).unwrap(), d);
    }
}
