use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::Serialize;

use super::eigen::jacobi_eigen;
use crate::error::{Error, Result};

/// A fitted principal component model.
#[derive(Debug, Clone, Serialize)]
pub struct PcaModel {
    pub mean: Array1<f64>,
    /// `k × d`; rows are orthonormal principal directions.
    pub components: Array2<f64>,
    /// Sample-covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Flips `row` so that its largest-magnitude coordinate is positive
/// (first such coordinate on ties).
fn orient_by_largest(row: &mut [f64]) {
    let mut best = 0;
    for (i, v) in row.iter().enumerate() {
        if v.abs() > row[best].abs() {
            best = i;
        }
    }
    if row[best] < 0.0 {
        row.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Fits a `k`-component PCA.
///
/// Forms the sample covariance (divisor `N - 1`) explicitly and diagonalizes
/// it with the Jacobi solver. Explained-variance ratios divide each
/// eigenvalue by the covariance trace.
pub fn fit_pca(data: ArrayView2<f64>, k: usize) -> Result<PcaModel> {
    let (n, d) = data.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("PCA needs at least 2 rows, got {n}")));
    }
    if k == 0 || k > n.min(d) {
        return Err(Error::InvalidArgument(format!(
            "k = {k} out of range 1..={}",
            n.min(d)
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("data has non-finite entries".into()));
    }
    let first = data.row(0);
    if data.outer_iter().all(|r| r == first) {
        return Err(Error::ZeroVariance);
    }

    let mean = data.mean_axis(Axis(0)).expect("n >= 2");
    let centered = &data - &mean;
    let cov = centered.t().dot(&centered) / (n - 1) as f64;
    let trace = cov.diag().sum();
    if trace <= 0.0 {
        return Err(Error::ZeroVariance);
    }

    let eig = jacobi_eigen(cov.view())?;
    let mut components = Array2::zeros((k, d));
    let mut eigenvalues = Vec::with_capacity(k);
    for c in 0..k {
        let mut row = eig.vectors.column(c).to_vec();
        orient_by_largest(&mut row);
        components.row_mut(c).assign(&Array1::from(row));
        eigenvalues.push(eig.values[c].max(0.0));
    }
    let explained_variance_ratio = eigenvalues.iter().map(|l| l / trace).collect();

    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        explained_variance_ratio,
    })
}

/// Projects rows onto the principal directions: `(data - mean) · componentsᵀ`.
pub fn transform(model: &PcaModel, data: ArrayView2<f64>) -> Result<Array2<f64>> {
    if data.ncols() != model.dim() {
        return Err(Error::LengthMismatch {
            left: data.ncols(),
            right: model.dim(),
        });
    }
    let centered = &data - &model.mean;
    Ok(centered.dot(&model.components.t()))
}
