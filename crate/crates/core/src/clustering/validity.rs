//! Internal cluster validity indices. Labels must be dense `0..k`.

use crate::error::{Error, Result};

fn cluster_count(labels: &[usize]) -> Result<usize> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; k];
    for &l in labels {
        seen[l] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidParameter("cluster labels are not dense".into()));
    }
    Ok(k)
}

fn check_shape(points: &[[f64; 2]], labels: &[usize]) -> Result<usize> {
    if points.len() != labels.len() {
        return Err(Error::LabelMismatch(format!(
            "{} labels for {} points",
            labels.len(),
            points.len()
        )));
    }
    cluster_count(labels)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn centroids(points: &[[f64; 2]], labels: &[usize], k: usize) -> (Vec<[f64; 2]>, Vec<usize>) {
    let mut sums = vec![[0.0; 2]; k];
    let mut sizes = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        sums[l][0] += p[0];
        sums[l][1] += p[1];
        sizes[l] += 1;
    }
    let c = sums
        .iter()
        .zip(&sizes)
        .map(|(s, &m)| [s[0] / m as f64, s[1] / m as f64])
        .collect();
    (c, sizes)
}

/// Mean silhouette with Euclidean distances; points in singleton clusters
/// score 0.
pub fn silhouette(points: &[[f64; 2]], labels: &[usize]) -> Result<f64> {
    let k = check_shape(points, labels)?;
    if k < 2 {
        return Err(Error::InvalidParameter("silhouette needs at least 2 clusters".into()));
    }
    let (_, sizes) = centroids(points, labels, k);
    let n = points.len();
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sums[labels[j]] += dist(points[i], points[j]);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// Variance-ratio criterion. Returns `+inf` when the within-cluster sum of
/// squares is zero.
pub fn calinski_harabasz(points: &[[f64; 2]], labels: &[usize]) -> Result<f64> {
    let k = check_shape(points, labels)?;
    let n = points.len();
    if k < 2 || k > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "Calinski-Harabasz needs 2 <= k <= n-1, got k={k}, n={n}"
        )));
    }
    let (cent, sizes) = centroids(points, labels, k);
    let global = [
        points.iter().map(|p| p[0]).sum::<f64>() / n as f64,
        points.iter().map(|p| p[1]).sum::<f64>() / n as f64,
    ];
    let between: f64 = cent
        .iter()
        .zip(&sizes)
        .map(|(c, &m)| m as f64 * dist(*c, global).powi(2))
        .sum();
    let within = wcss(points, labels)?;
    if within == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((between / (k - 1) as f64) / (within / (n - k) as f64))
}

/// Davies-Bouldin index. Returns `+inf` when two centroids coincide.
pub fn davies_bouldin(points: &[[f64; 2]], labels: &[usize]) -> Result<f64> {
    let k = check_shape(points, labels)?;
    if k < 2 {
        return Err(Error::InvalidParameter("Davies-Bouldin needs at least 2 clusters".into()));
    }
    let (cent, sizes) = centroids(points, labels, k);
    let mut scatter = vec![0.0; k];
    for (p, &l) in points.iter().zip(labels) {
        scatter[l] += dist(*p, cent[l]);
    }
    for (s, &m) in scatter.iter_mut().zip(&sizes) {
        *s /= m as f64;
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst: f64 = 0.0;
        for j in 0..k {
            if i == j {
                continue;
            }
            let d = dist(cent[i], cent[j]);
            if d == 0.0 {
                return Ok(f64::INFINITY);
            }
            worst = worst.max((scatter[i] + scatter[j]) / d);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// Within-cluster sum of squared distances to the cluster centroids.
pub fn wcss(points: &[[f64; 2]], labels: &[usize]) -> Result<f64> {
    let k = check_shape(points, labels)?;
    if k < 1 {
        return Err(Error::InvalidParameter("WCSS needs at least one cluster".into()));
    }
    let (cent, _) = centroids(points, labels, k);
    Ok(points
        .iter()
        .zip(labels)
        .map(|(p, &l)| dist(*p, cent[l]).powi(2))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs() -> (Vec<[f64; 2]>, Vec<usize>) {
        (
            vec![[0.0, 0.0], [1.0, 0.0], [10.0, 0.0], [11.0, 0.0]],
            vec![0, 0, 1, 1],
        )
    }

    #[test]
    fn pair_fixture_values() {
        let (p, l) = pairs();
        // outer points: a = 1, b = 10.5; inner points: a = 1, b = 9.5
        let expected = (9.5 / 10.5 + 8.5 / 9.5) / 2.0;
        assert!((silhouette(&p, &l).unwrap() - expected).abs() < 1e-12);
        assert!((calinski_harabasz(&p, &l).unwrap() - 200.0).abs() < 1e-9);
        assert!((davies_bouldin(&p, &l).unwrap() - 0.1).abs() < 1e-9);
        assert!((wcss(&p, &l).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coincident_clusters() {
        // two clusters sharing the same centroid and spread
        let p = vec![[-1.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [1.0, 0.0]];
        let l = vec![0, 0, 1, 1];
        assert!(silhouette(&p, &l).unwrap() <= 0.0);
        assert_eq!(davies_bouldin(&p, &l).unwrap(), f64::INFINITY);
    }

    #[test]
    fn zero_within_is_infinite_ch() {
        let p = vec![[0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [5.0, 5.0]];
        assert_eq!(calinski_harabasz(&p, &[0, 0, 1, 1]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn far_blobs_approach_one() {
        let spread = 1.0;
        let sep = 1e6 * spread;
        let p = vec![[0.0, 0.0], [spread, 0.0], [0.0, spread], [sep, 0.0], [sep + spread, 0.0], [sep, spread]];
        let l = vec![0, 0, 0, 1, 1, 1];
        assert!(silhouette(&p, &l).unwrap() > 0.99);
    }

    #[test]
    fn label_permutation_and_scale() {
        let p = vec![[0.0, 0.3], [1.0, 0.2], [4.0, 4.0], [5.0, 4.5], [9.0, 0.0], [9.5, 1.0]];
        let l = vec![0, 0, 1, 1, 2, 2];
        let relabeled = vec![2, 2, 0, 0, 1, 1];
        for f in [silhouette, calinski_harabasz, davies_bouldin, wcss] {
            let a = f(&p, &l).unwrap();
            let b = f(&p, &relabeled).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        let scaled: Vec<[f64; 2]> = p.iter().map(|q| [q[0] * 7.5, q[1] * 7.5]).collect();
        let a = davies_bouldin(&p, &l).unwrap();
        let b = davies_bouldin(&scaled, &l).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn range_errors() {
        let (p, _) = pairs();
        assert!(silhouette(&p, &[0, 0, 0, 0]).is_err());
        assert!(calinski_harabasz(&p, &[0, 1, 2, 3]).is_err());
        assert!(davies_bouldin(&p, &[0, 0, 0, 0]).is_err());
        assert_eq!(wcss(&p, &[0, 1, 2, 3]).unwrap(), 0.0);
        assert!(wcss(&p, &[0, 0, 2, 2]).is_err());
    }
}
