//! Small, exact UMAP: brute-force k-nearest neighbors, fuzzy simplicial set,
//! seeded single-threaded SGD layout. Initialization is a seeded Gaussian
//! rather than a spectral layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CityFIMatrix;

use super::{Embedding, EmbeddingMethod};

const SPREAD: f64 = 1.0;
const NEGATIVE_SAMPLE_RATE: usize = 5;
const REPULSION_STRENGTH: f64 = 1.0;
const INIT_SCALE: f64 = 10.0;
const BANDWIDTH_TOLERANCE: f64 = 1e-5;
const BANDWIDTH_ITERATIONS: usize = 64;
const MIN_BANDWIDTH_SCALE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for UmapParams {
    fn default() -> Self {
        UmapParams {
            n_neighbors: 15,
            min_dist: 0.1,
            epochs: 500,
            learning_rate: 1.0,
            seed: 42,
        }
    }
}

impl UmapParams {
    fn check(&self, rows: usize) -> Result<()> {
        if self.n_neighbors < 2 {
            return Err(Error::InvalidParameter("n_neighbors must be at least 2".into()));
        }
        if self.n_neighbors >= rows {
            return Err(Error::InvalidParameter(format!(
                "n_neighbors ({}) must be smaller than the number of rows ({rows})",
                self.n_neighbors
            )));
        }
        if !(self.min_dist > 0.0 && self.min_dist.is_finite()) {
            return Err(Error::InvalidParameter("min_dist must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Fits `1 / (1 + a x^(2b))` to the min-dist/spread target curve by
/// Levenberg-Marquardt least squares.
pub fn fit_output_kernel(min_dist: f64) -> (f64, f64) {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * SPREAD * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| {
            if x < min_dist {
                1.0
            } else {
                (-(x - min_dist) / SPREAD).exp()
            }
        })
        .collect();

    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = 1.0 / (1.0 + a * x.powf(2.0 * b)) - y;
                r * r
            })
            .sum()
    };

    let (mut a, mut b) = (1.0, 1.0);
    let mut lambda = 1e-3;
    let mut cost = sse(a, b);
    for _ in 0..500 {
        // normal equations J^T J and J^T r
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&x, &y) in xs.iter().zip(&ys) {
            let p = if x > 0.0 { x.powf(2.0 * b) } else { 0.0 };
            let denom = 1.0 + a * p;
            let r = 1.0 / denom - y;
            let da = -p / (denom * denom);
            let db = if x > 0.0 {
                -a * p * 2.0 * x.ln() / (denom * denom)
            } else {
                0.0
            };
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let (maa, mbb) = (jaa * (1.0 + lambda), jbb * (1.0 + lambda));
        let det = maa * mbb - jab * jab;
        if det.abs() < f64::MIN_POSITIVE {
            break;
        }
        let step_a = -(mbb * ga - jab * gb) / det;
        let step_b = -(maa * gb - jab * ga) / det;
        let (na, nb) = (a + step_a, b + step_b);
        let new_cost = if na > 0.0 && nb > 0.0 { sse(na, nb) } else { f64::INFINITY };
        if new_cost < cost {
            let improvement = cost - new_cost;
            a = na;
            b = nb;
            cost = new_cost;
            lambda = (lambda / 10.0).max(1e-12);
            if improvement < 1e-15 * (1.0 + cost) {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    (a, b)
}

/// Binary search for the bandwidth `sigma` such that
/// `sum_j exp(-max(0, d_j - rho) / sigma) = target`.
///
/// `distances` are the distances to the k nearest neighbors (self
/// excluded). Returns `None` when the target is reachable but the search did
/// not get within tolerance in `max_iter` steps.
pub fn smooth_knn_bandwidth(distances: &[f64], rho: f64, target: f64, max_iter: usize) -> Option<f64> {
    let psum = |sigma: f64| -> f64 {
        distances
            .iter()
            .map(|&d| {
                let gap = d - rho;
                if gap > 0.0 {
                    (-gap / sigma).exp()
                } else {
                    1.0
                }
            })
            .sum()
    };

    // Neighbors at distance rho contribute 1 whatever sigma is; if they
    // alone exceed the target the search can only shrink toward zero.
    let plateau = distances.iter().filter(|&&d| d - rho <= 0.0).count() as f64;
    let reachable = plateau <= target;

    let (mut lo, mut hi, mut mid) = (0.0_f64, f64::INFINITY, 1.0_f64);
    let mut converged = false;
    for _ in 0..max_iter {
        let s = psum(mid);
        if (s - target).abs() < BANDWIDTH_TOLERANCE {
            converged = true;
            break;
        }
        if s > target {
            hi = mid;
            mid = (lo + hi) / 2.0;
        } else {
            lo = mid;
            mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
        }
    }
    if !converged && reachable {
        return None;
    }
    Some(mid)
}

struct Graph {
    heads: Vec<usize>,
    tails: Vec<usize>,
    weights: Vec<f64>,
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn fuzzy_graph(rows: &[Vec<f64>], k: usize) -> Result<Graph> {
    let n = rows.len();
    let target = (k as f64).log2();
    let mut all_mean = 0.0;
    let mut knn: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut d: Vec<(usize, f64)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (j, euclidean(&rows[i], &rows[j])))
            .collect();
        all_mean += d.iter().map(|x| x.1).sum::<f64>();
        d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        d.truncate(k);
        knn.push(d);
    }
    all_mean /= (n * (n - 1)) as f64;

    // directed membership strengths, dense since n is small
    let mut strength = vec![0.0; n * n];
    for (i, neigh) in knn.iter().enumerate() {
        let dists: Vec<f64> = neigh.iter().map(|x| x.1).collect();
        let rho = dists.iter().copied().find(|&d| d > 0.0).unwrap_or(0.0);
        let mut sigma = smooth_knn_bandwidth(&dists, rho, target, BANDWIDTH_ITERATIONS)
            .ok_or(Error::BandwidthNotConverged { point: i })?;
        let mean_i = dists.iter().sum::<f64>() / dists.len() as f64;
        let floor = if rho > 0.0 { mean_i } else { all_mean } * MIN_BANDWIDTH_SCALE;
        sigma = sigma.max(floor);
        for &(j, d) in neigh {
            let gap = d - rho;
            strength[i * n + j] = if gap > 0.0 && sigma > 0.0 {
                (-gap / sigma).exp()
            } else {
                1.0
            };
        }
    }

    let mut graph = Graph {
        heads: Vec::new(),
        tails: Vec::new(),
        weights: Vec::new(),
    };
    for i in 0..n {
        for j in 0..n {
            let a = strength[i * n + j];
            let b = strength[j * n + i];
            let w = a + b - a * b;
            if w > 0.0 {
                graph.heads.push(i);
                graph.tails.push(j);
                graph.weights.push(w);
            }
        }
    }
    Ok(graph)
}

fn clip(v: f64) -> f64 {
    v.clamp(-4.0, 4.0)
}

pub fn umap_embed(matrix: &CityFIMatrix, params: &UmapParams) -> Result<Embedding> {
    let rows = matrix.to_rows();
    let n = rows.len();
    params.check(n)?;

    let graph = fuzzy_graph(&rows, params.n_neighbors)?;
    let (a, b) = fit_output_kernel(params.min_dist);

    let max_w = graph.weights.iter().copied().fold(0.0, f64::max);
    let epochs = params.epochs as f64;
    let keep: Vec<usize> = (0..graph.weights.len())
        .filter(|&e| graph.weights[e] >= max_w / epochs)
        .collect();
    let heads: Vec<usize> = keep.iter().map(|&e| graph.heads[e]).collect();
    let tails: Vec<usize> = keep.iter().map(|&e| graph.tails[e]).collect();
    let epochs_per_sample: Vec<f64> = keep.iter().map(|&e| max_w / graph.weights[e]).collect();
    let epochs_per_negative: Vec<f64> = epochs_per_sample
        .iter()
        .map(|e| e / NEGATIVE_SAMPLE_RATE as f64)
        .collect();
    let mut next_sample = epochs_per_sample.clone();
    let mut next_negative = epochs_per_negative.clone();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut y: Vec<f64> = (0..2 * n)
        .map(|_| INIT_SCALE * rng.sample::<f64, _>(StandardNormal))
        .collect();

    for epoch in 0..params.epochs {
        let alpha = params.learning_rate * (1.0 - epoch as f64 / epochs);
        let now = epoch as f64;
        for e in 0..heads.len() {
            if next_sample[e] > now {
                continue;
            }
            let (j, k) = (heads[e], tails[e]);
            let dx = y[2 * j] - y[2 * k];
            let dy = y[2 * j + 1] - y[2 * k + 1];
            let dist_sq = dx * dx + dy * dy;
            let coeff = if dist_sq > 0.0 {
                -2.0 * a * b * dist_sq.powf(b - 1.0) / (a * dist_sq.powf(b) + 1.0)
            } else {
                0.0
            };
            let gx = clip(coeff * dx) * alpha;
            let gy = clip(coeff * dy) * alpha;
            y[2 * j] += gx;
            y[2 * j + 1] += gy;
            y[2 * k] -= gx;
            y[2 * k + 1] -= gy;
            next_sample[e] += epochs_per_sample[e];

            let negatives = ((now - next_negative[e]) / epochs_per_negative[e]).floor().max(0.0) as usize;
            for _ in 0..negatives {
                let k = rng.gen_range(0..n);
                if k == j {
                    continue;
                }
                let dx = y[2 * j] - y[2 * k];
                let dy = y[2 * j + 1] - y[2 * k + 1];
                let dist_sq = dx * dx + dy * dy;
                let (gx, gy) = if dist_sq > 0.0 {
                    let coeff = 2.0 * REPULSION_STRENGTH * b
                        / ((0.001 + dist_sq) * (a * dist_sq.powf(b) + 1.0));
                    (clip(coeff * dx), clip(coeff * dy))
                } else {
                    (4.0, 4.0)
                };
                y[2 * j] += gx * alpha;
                y[2 * j + 1] += gy * alpha;
            }
            next_negative[e] += negatives as f64 * epochs_per_negative[e];
        }
    }

    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("UMAP layout diverged".into()));
    }
    Ok(Embedding {
        city_names: matrix.city_names.clone(),
        coords: y.chunks(2).map(|c| [c[0], c[1]]).collect(),
        method: EmbeddingMethod::Umap,
        seed: Some(params.seed),
    })
}
