use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Principal components of a set of embeddings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaProjection {
    pub mean: Array1<f64>,
    /// `k x d`, orthonormal rows, largest-magnitude entry of each row positive.
    pub components: Array2<f64>,
    /// Descending; share of total variance per component.
    pub explained_variance_ratio: Array1<f64>,
    /// `N x k`.
    pub coordinates: Array2<f64>,
}

impl PcaProjection {
    /// Maps projected coordinates back to the input space.
    pub fn reconstruct(&self) -> Array2<f64> {
        self.coordinates.dot(&self.components) + &self.mean
    }
}

/// Projects `embeddings` (one row per point) onto the top `k` eigenvectors of
/// their sample covariance.
pub fn pca_project(embeddings: &Array2<f64>, k: usize) -> Result<PcaProjection> {
    let (n, d) = embeddings.dim();
    if n < 2 {
        return Err(Error::Config(format!("PCA needs at least 2 points, got {n}")));
    }
    if k == 0 || k > (n - 1).min(d) {
        return Err(Error::Config(format!(
            "k = {k} outside 1..={} for {n} points of width {d}",
            (n - 1).min(d)
        )));
    }
    if embeddings.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite embedding".into()));
    }
    let mean = embeddings.mean_axis(Axis(0)).expect("n >= 2");
    let centered = embeddings - &mean;
    let cov = centered.t().dot(&centered) / (n - 1) as f64;

    let eig = SymmetricEigen::new(DMatrix::from_fn(d, d, |i, j| cov[[i, j]]));
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();

    let mut components = Array2::zeros((k, d));
    let mut ratios = Array1::zeros(k);
    for (row, &idx) in order.iter().take(k).enumerate() {
        let v = eig.eigenvectors.column(idx);
        let pivot = v
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[[row, j]] = sign * v[j];
        }
        ratios[row] = if total > 0.0 {
            eig.eigenvalues[idx].max(0.0) / total
        } else {
            0.0
        };
    }
    let coordinates = centered.dot(&components.t()).as_standard_layout().into_owned();
    Ok(PcaProjection {
        mean,
        components,
        explained_variance_ratio: ratios,
        coordinates,
    })
}
