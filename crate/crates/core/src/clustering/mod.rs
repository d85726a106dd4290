//! Ward hierarchical clustering of embedded cities, flat cuts and
//! selection of the number of clusters.

mod validity;
mod ward;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedding::Embedding;
use crate::error::{Error, Result};

pub use validity::{calinski_harabasz, davies_bouldin, silhouette, wcss};
pub use ward::{cut_by_distance, cut_by_k, ward_linkage};

/// One agglomeration step. Leaves are nodes `0..n`, the merge at step `t`
/// creates node `n + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// Leaf order for drawing, children visited left before right.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.leaves.len();
        if self.merges.is_empty() {
            return (0..n).collect();
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        while let Some(node) = stack.pop() {
            if node < n {
                order.push(node);
            } else {
                let m = &self.merges[node - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        order
    }
}

pub fn ward_linkage_embedding(e: &Embedding) -> Result<Dendrogram> {
    ward_linkage(e.city_names.clone(), &e.coords)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutCriterion {
    CutDistance(f64),
    TargetK(usize),
}

/// Flat partition. `labels[i]` is the cluster of `leaves[i]`; clusters are
/// numbered by first appearance in leaf order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub leaves: Vec<String>,
    pub labels: Vec<usize>,
    pub k: usize,
    pub criterion: CutCriterion,
}

impl ClusterAssignment {
    pub fn label_of(&self, city: &str) -> Option<usize> {
        self.leaves.iter().position(|l| l == city).map(|i| self.labels[i])
    }

    pub fn label_map(&self) -> BTreeMap<String, usize> {
        self.leaves.iter().cloned().zip(self.labels.iter().copied()).collect()
    }

    /// Members of each cluster, in leaf order.
    pub fn members(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.k];
        for (leaf, &l) in self.leaves.iter().zip(&self.labels) {
            out[l].push(leaf.as_str());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KScore {
    pub k: usize,
    pub silhouette: f64,
    pub calinski_harabasz: f64,
    pub davies_bouldin: f64,
    pub wcss: f64,
    /// Discrete second difference of WCSS around `k`.
    pub elbow: f64,
    pub mean_rank: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSelectionReport {
    pub scores: Vec<KScore>,
    pub chosen_k: usize,
    pub rationale: String,
}

/// Competition ranks (1 is best); equal values share the lowest rank.
fn ranks(values: &[f64], higher_is_better: bool) -> Vec<f64> {
    let key = |v: f64| {
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if higher_is_better {
            v
        } else {
            -v
        }
    };
    values
        .iter()
        .map(|&v| 1.0 + values.iter().filter(|&&w| key(w) > key(v)).count() as f64)
        .collect()
}

/// Scores every `k` in `range` on the dendrogram's cuts and picks the `k`
/// with the best mean rank over silhouette, Calinski-Harabasz,
/// Davies-Bouldin and the WCSS elbow. Ties go to the smaller `k`.
pub fn select_k(
    points: &[[f64; 2]],
    dendro: &Dendrogram,
    range: RangeInclusive<usize>,
) -> Result<KSelectionReport> {
    let n = points.len();
    if n != dendro.len() {
        return Err(Error::LabelMismatch(format!(
            "{n} points for a dendrogram over {} leaves",
            dendro.len()
        )));
    }
    let (lo, hi) = (*range.start(), *range.end());
    if n < 3 || lo < 2 || lo > hi || hi > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "k range {lo}..={hi} must lie within 2..={} for {n} points",
            n.saturating_sub(1)
        )));
    }
    let wcss_at = |k: usize| -> Result<f64> { wcss(points, &cut_by_k(dendro, k)?.labels) };

    let mut scores = Vec::new();
    for k in lo..=hi {
        let labels = cut_by_k(dendro, k)?.labels;
        let w = wcss(points, &labels)?;
        scores.push(KScore {
            k,
            silhouette: silhouette(points, &labels)?,
            calinski_harabasz: calinski_harabasz(points, &labels)?,
            davies_bouldin: davies_bouldin(points, &labels)?,
            wcss: w,
            elbow: wcss_at(k - 1)? - 2.0 * w + wcss_at(k + 1)?,
            mean_rank: 0.0,
        });
    }

    let column = |f: fn(&KScore) -> f64| scores.iter().map(f).collect::<Vec<_>>();
    let rank_sets = [
        ranks(&column(|s| s.silhouette), true),
        ranks(&column(|s| s.calinski_harabasz), true),
        ranks(&column(|s| s.davies_bouldin), false),
        ranks(&column(|s| s.elbow), true),
    ];
    for (i, s) in scores.iter_mut().enumerate() {
        s.mean_rank = rank_sets.iter().map(|r| r[i]).sum::<f64>() / rank_sets.len() as f64;
    }
    let best = scores
        .iter()
        .min_by(|a, b| a.mean_rank.total_cmp(&b.mean_rank).then(a.k.cmp(&b.k)))
        .expect("non-empty k range");
    let rationale = format!(
        "k={} has the best mean rank {:.2} (silhouette {:.4}, Calinski-Harabasz {:.4}, Davies-Bouldin {:.4}, WCSS elbow {:.4})",
        best.k, best.mean_rank, best.silhouette, best.calinski_harabasz, best.davies_bouldin, best.elbow
    );
    Ok(KSelectionReport {
        chosen_k: best.k,
        rationale,
        scores,
    })
}

#[derive(Serialize, Deserialize)]
struct DendrogramDoc {
    leaves: Vec<String>,
    merges: Vec<(usize, usize, f64, usize)>,
}

/// `{"leaves": [...], "merges": [[left, right, height, size], ...]}`
pub fn format_dendrogram_json(d: &Dendrogram) -> String {
    let doc = DendrogramDoc {
        leaves: d.leaves.clone(),
        merges: d.merges.iter().map(|m| (m.left, m.right, m.height, m.size)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("dendrogram serializes")
}

pub fn parse_dendrogram_json(text: &str) -> std::result::Result<Dendrogram, String> {
    let doc: DendrogramDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let n = doc.leaves.len();
    if n == 0 || doc.merges.len() != n - 1 {
        return Err(format!("{} merges for {n} leaves", doc.merges.len()));
    }
    for (t, &(l, r, h, _)) in doc.merges.iter().enumerate() {
        if l >= n + t || r >= n + t || l == r || !h.is_finite() {
            return Err(format!("merge {t} is invalid"));
        }
    }
    Ok(Dendrogram {
        leaves: doc.leaves,
        merges: doc
            .merges
            .into_iter()
            .map(|(left, right, height, size)| Merge {
                left,
                right,
                height,
                size,
            })
            .collect(),
    })
}

pub fn write_dendrogram_json(d: &Dendrogram, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_dendrogram_json(d)).map_err(|e| Error::io(path, e))
}

pub fn read_dendrogram_json(path: impl AsRef<Path>) -> Result<Dendrogram> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dendrogram_json(&text).map_err(|m| Error::malformed(path, m))
}

#[derive(Serialize, Deserialize)]
struct AssignmentDoc {
    leaves: Vec<String>,
    labels: BTreeMap<String, usize>,
    k: usize,
    criterion: CutCriterion,
}

pub fn format_assignment_json(a: &ClusterAssignment) -> String {
    let doc = AssignmentDoc {
        leaves: a.leaves.clone(),
        labels: a.label_map(),
        k: a.k,
        criterion: a.criterion,
    };
    serde_json::to_string_pretty(&doc).expect("assignment serializes")
}

pub fn parse_assignment_json(text: &str) -> std::result::Result<ClusterAssignment, String> {
    let doc: AssignmentDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let labels = doc
        .leaves
        .iter()
        .map(|l| doc.labels.get(l).copied().ok_or_else(|| format!("no label for {l:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if labels.iter().any(|&l| l >= doc.k) {
        return Err(format!("label out of range for k={}", doc.k));
    }
    Ok(ClusterAssignment {
        leaves: doc.leaves,
        labels,
        k: doc.k,
        criterion: doc.criterion,
    })
}

pub fn write_assignment_json(a: &ClusterAssignment, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_assignment_json(a)).map_err(|e| Error::io(path, e))
}

pub fn read_assignment_json(path: impl AsRef<Path>) -> Result<ClusterAssignment> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_assignment_json(&text).map_err(|m| Error::malformed(path, m))
}

/// `k,silhouette,calinski_harabasz,davies_bouldin,wcss,chosen`
pub fn format_k_selection_csv(r: &KSelectionReport) -> String {
    let mut out = String::from("k,silhouette,calinski_harabasz,davies_bouldin,wcss,chosen\n");
    for s in &r.scores {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{}",
            s.k,
            s.silhouette,
            s.calinski_harabasz,
            s.davies_bouldin,
            s.wcss,
            u8::from(s.k == r.chosen_k)
        );
    }
    out
}

pub fn write_k_selection_csv(r: &KSelectionReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_k_selection_csv(r)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("C{i}")).collect()
    }

    fn three_blobs() -> Vec<[f64; 2]> {
        let mut p = Vec::new();
        for (cx, cy) in [(0.0, 0.0), (50.0, 0.0), (0.0, 50.0)] {
            for (dx, dy) in [(0.0, 0.0), (1.0, 0.5), (-0.5, 1.0), (0.7, -0.8)] {
                p.push([cx + dx, cy + dy]);
            }
        }
        p
    }

    #[test]
    fn select_k_finds_three_blobs() {
        let p = three_blobs();
        let d = ward_linkage(names(p.len()), &p).unwrap();
        let r = select_k(&p, &d, 2..=6).unwrap();
        assert_eq!(r.chosen_k, 3);
        assert_eq!(r.scores.len(), 5);
        let csv = format_k_selection_csv(&r);
        assert_eq!(csv.lines().filter(|l| l.ends_with(",1")).count(), 1);
    }

    #[test]
    fn select_k_range_checked() {
        let p = three_blobs();
        let d = ward_linkage(names(p.len()), &p).unwrap();
        assert!(select_k(&p, &d, 1..=3).is_err());
        assert!(select_k(&p, &d, 2..=12).is_err());
        assert!(select_k(&p, &d, 4..=3).is_err());
    }

    #[test]
    fn ranks_share_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0], true), [1.0, 3.0, 1.0]);
        assert_eq!(ranks(&[3.0, 1.0, 3.0], false), [2.0, 1.0, 2.0]);
    }

    #[test]
    fn json_round_trips() {
        let p = three_blobs();
        let d = ward_linkage(names(p.len()), &p).unwrap();
        let back = parse_dendrogram_json(&format_dendrogram_json(&d)).unwrap();
        assert_eq!(back, d);
        let a = cut_by_k(&d, 3).unwrap();
        let back = parse_assignment_json(&format_assignment_json(&a)).unwrap();
        assert_eq!(back, a);
        assert!(parse_dendrogram_json(r#"{"leaves":["a","b"],"merges":[]}"#).is_err());
    }

    #[test]
    fn leaf_order_covers_all_leaves() {
        let p = three_blobs();
        let d = ward_linkage(names(p.len()), &p).unwrap();
        let mut order = d.leaf_order();
        order.sort_unstable();
        assert_eq!(order, (0..p.len()).collect::<Vec<_>>());
    }
}
