use crate::error::{Error, Result};

use super::{ClusterAssignment, CutCriterion, Dendrogram, Merge};

/// Ward agglomerative clustering of 2-D points.
///
/// Distances start as half the squared Euclidean distances, which is the
/// ESS increase of merging two singletons, and are updated with the
/// Lance-Williams Ward recurrence, so every merge height is the increase in
/// total within-cluster sum of squares caused by that merge. Ties go to the
/// smallest `(min node id, max node id)` pair.
pub fn ward_linkage(labels: Vec<String>, points: &[[f64; 2]]) -> Result<Dendrogram> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "Ward linkage needs at least 2 points, got {n}"
        )));
    }
    if labels.len() != n {
        return Err(Error::LabelMismatch(format!(
            "{} labels for {n} points",
            labels.len()
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite coordinate".into()));
    }

    // slot i starts as leaf i; merged clusters reuse the smaller slot
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = points[i][0] - points[j][0];
            let dy = points[i][1] - points[j][1];
            let d = (dx * dx + dy * dy) / 2.0;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let mut node = (0..n).collect::<Vec<usize>>();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..n {
            if !active[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !active[b] {
                    continue;
                }
                let h = dist[a * n + b];
                let (lo, hi) = (node[a].min(node[b]), node[a].max(node[b]));
                let better = match best {
                    None => true,
                    Some((bh, _, _, blo, bhi)) => {
                        h < bh || (h == bh && (lo, hi) < (blo, bhi))
                    }
                };
                if better {
                    best = Some((h, a, b, lo, hi));
                }
            }
        }
        let (height, a, b, lo, hi) = best.expect("at least two active clusters");
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in 0..n {
            if !active[k] || k == a || k == b {
                continue;
            }
            let nk = size[k] as f64;
            let d = ((na + nk) * dist[a * n + k] + (nb + nk) * dist[b * n + k] - nk * height)
                / (na + nb + nk);
            dist[a * n + k] = d;
            dist[k * n + a] = d;
        }
        merges.push(Merge {
            left: lo,
            right: hi,
            height,
            size: size[a] + size[b],
        });
        node[a] = n + step;
        size[a] += size[b];
        active[b] = false;
    }

    Ok(Dendrogram {
        leaves: labels,
        merges,
    })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Applies the first `applied` merges and labels components by first leaf
/// appearance.
fn cut_prefix(dendro: &Dendrogram, applied: usize, criterion: CutCriterion) -> ClusterAssignment {
    let n = dendro.leaves.len();
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    for (t, m) in dendro.merges.iter().take(applied).enumerate() {
        parent[m.left] = n + t;
        parent[m.right] = n + t;
    }
    let mut root_label: Vec<Option<usize>> = vec![None; 2 * n - 1];
    let mut labels = Vec::with_capacity(n);
    let mut k = 0;
    for leaf in 0..n {
        let root = find(&mut parent, leaf);
        let label = *root_label[root].get_or_insert_with(|| {
            k += 1;
            k - 1
        });
        labels.push(label);
    }
    ClusterAssignment {
        leaves: dendro.leaves.clone(),
        labels,
        k,
        criterion,
    }
}

/// Components after removing every merge higher than `d`.
pub fn cut_by_distance(dendro: &Dendrogram, d: f64) -> Result<ClusterAssignment> {
    if !(d >= 0.0) {
        return Err(Error::InvalidParameter(format!("cut distance must be >= 0, got {d}")));
    }
    let applied = dendro.merges.iter().take_while(|m| m.height <= d).count();
    Ok(cut_prefix(dendro, applied, CutCriterion::CutDistance(d)))
}

/// Flat partition with exactly `k` clusters (undo the last `k - 1` merges).
pub fn cut_by_k(dendro: &Dendrogram, k: usize) -> Result<ClusterAssignment> {
    let n = dendro.leaves.len();
    if k < 1 || k > n {
        return Err(Error::InvalidParameter(format!("k must be in 1..={n}, got {k}")));
    }
    Ok(cut_prefix(dendro, n - k, CutCriterion::TargetK(k)))
}
