use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::CityFIMatrix;

use super::{Embedding, EmbeddingMethod};

/// Projects centered rows onto the leading `dims` principal directions.
///
/// Directions are ordered by descending singular value; each is signed so
/// its largest-magnitude loading is positive. Missing components (rank below
/// `dims`) come back as zero columns.
pub fn pca_project(rows: &[Vec<f64>], dims: usize) -> Result<Vec<Vec<f64>>> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "PCA needs at least 2 rows, got {n}"
        )));
    }
    let m = rows[0].len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidParameter("rows have different lengths".into()));
    }
    let mut out = vec![vec![0.0; dims]; n];
    if m == 0 {
        return Ok(out);
    }

    let means: Vec<f64> = (0..m)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let x = DMatrix::from_fn(n, m, |i, j| rows[i][j] - means[j]);

    let svd = x.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });

    for (k, &c) in order.iter().take(dims).enumerate() {
        let loading = v_t.row(c);
        let mut pivot = 0;
        for j in 1..m {
            if loading[j].abs() > loading[pivot].abs() {
                pivot = j;
            }
        }
        let sign = if loading[pivot] < 0.0 { -1.0 } else { 1.0 };
        // numerically null directions stay exactly zero
        if svd.singular_values[c] <= f64::EPSILON * svd.singular_values[order[0]] * n.max(m) as f64 {
            continue;
        }
        // projecting each row on its own keeps equal rows exactly equal
        for (i, row) in out.iter_mut().enumerate() {
            row[k] = sign * x.row(i).dot(&loading);
        }
    }
    Ok(out)
}

pub fn pca_embed(matrix: &CityFIMatrix) -> Result<Embedding> {
    let coords = pca_project(&matrix.to_rows(), 2)?
        .into_iter()
        .map(|r| [r[0], r[1]])
        .collect();
    Ok(Embedding {
        city_names: matrix.city_names.clone(),
        coords,
        method: EmbeddingMethod::Pca,
        seed: None,
    })
}
