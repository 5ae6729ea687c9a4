//! Truncated SVD feature reduction with min–max scaling to `[0, 1)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Upper end of the scaled range; keeps features strictly below 1.
const SCALE_TOP: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    /// `k × p` matrix of right singular vectors, largest singular value first.
    pub components: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub total_energy: f64,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl TruncatedSvd {
    /// Fits `k` components on the rows of `raw` (no centring).
    pub fn fit(raw: &DMatrix<f64>, k: usize) -> Result<Self> {
        let (rows, cols) = raw.shape();
        if k == 0 || k > rows.min(cols) {
            return Err(Error::Config(format!(
                "cannot keep {k} components of a {rows}×{cols} matrix"
            )));
        }
        let svd = raw.clone().svd(false, true);
        let v_t = svd
            .v_t
            .as_ref()
            .ok_or_else(|| Error::Optimization("SVD did not return right singular vectors".into()))?;
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let tol = svd.singular_values.max() * rows.max(cols) as f64 * f64::EPSILON;
        let mut components = DMatrix::zeros(k, cols);
        let mut singular_values = Vec::with_capacity(k);
        for (r, &idx) in order.iter().take(k).enumerate() {
            let sigma = svd.singular_values[idx];
            if sigma <= tol {
                log::warn!("component {r} exceeds the rank of the training matrix; padding with zeros");
                singular_values.push(0.0);
                continue;
            }
            components.set_row(r, &v_t.row(idx));
            singular_values.push(sigma);
        }
        let total_energy = svd.singular_values.iter().map(|s| s * s).sum();
        let projected = raw * components.transpose();
        let min = (0..k).map(|c| projected.column(c).min()).collect();
        let max = (0..k).map(|c| projected.column(c).max()).collect();
        Ok(TruncatedSvd {
            components,
            singular_values,
            total_energy,
            min,
            max,
        })
    }

    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    /// Unscaled coordinates of each row in the component basis.
    pub fn project(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if raw.ncols() != self.components.ncols() {
            return Err(Error::Config(format!(
                "expected {} columns, got {}",
                self.components.ncols(),
                raw.ncols()
            )));
        }
        Ok(raw * self.components.transpose())
    }

    /// Rows mapped back from their projection.
    pub fn reconstruct(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.project(raw)? * &self.components)
    }

    /// Fraction of the training matrix's squared Frobenius norm captured.
    pub fn captured_energy(&self) -> f64 {
        if self.total_energy == 0.0 {
            return 0.0;
        }
        self.singular_values.iter().map(|s| s * s).sum::<f64>() / self.total_energy
    }

    /// Projected and scaled features; values outside the training range are
    /// clipped into `[0, 1)`.
    pub fn transform(&self, raw: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
        let p = self.project(raw)?;
        Ok(p.row_iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(c, &v)| {
                        let span = self.max[c] - self.min[c];
                        if span <= 0.0 {
                            0.0
                        } else {
                            ((v - self.min[c]) / span * SCALE_TOP).clamp(0.0, SCALE_TOP)
                        }
                    })
                    .collect()
            })
            .collect())
    }
}

/// Fits on `train` and returns scaled features for both sets.
pub fn truncated_svd_reduce(
    train: &DMatrix<f64>,
    test: &DMatrix<f64>,
    k: usize,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, TruncatedSvd)> {
    let svd = TruncatedSvd::fit(train, k)?;
    Ok((svd.transform(train)?, svd.transform(test)?, svd))
}
