use serde::Serialize;

use super::eigen::symmetric_eigen;
use crate::batch::PointBatch;
use crate::error::Result;

/// Mean and covariance (divisor `n - 1`) of the rows of `batch`.
pub fn covariance(batch: &PointBatch) -> Result<(Vec<f64>, Vec<f64>)> {
    batch.require_count(2)?;
    let (n, d) = (batch.count(), batch.dim());
    let mut mean = vec![0.0; d];
    for row in batch.rows() {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![0.0; d * d];
    let mut centred = vec![0.0; d];
    for row in batch.rows() {
        for k in 0..d {
            centred[k] = row[k] - mean[k];
        }
        for i in 0..d {
            let ci = centred[i];
            for j in i..d {
                cov[i * d + j] += ci * centred[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    Ok((mean, cov))
}

/// Eigen-decomposition of a latent covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub dim: usize,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Trace of the covariance matrix.
    pub trace: f64,
    pub mean: Vec<f64>,
    /// `dim x dim` row-major; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: Vec<f64>,
}

impl SpectrumReport {
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.eigenvectors[r * self.dim + k]).collect()
    }

    /// Largest `|sigma_k^2 - 1|`: distance from the flat, standard-normal spectrum.
    pub fn max_deviation_from_unit(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Ratio of the largest to the smallest eigenvalue.
    pub fn condition_ratio(&self) -> f64 {
        self.eigenvalues[0] / self.eigenvalues[self.dim - 1]
    }

    /// Coordinates of `batch` along the eigenvectors, after removing the mean.
    pub fn project(&self, batch: &PointBatch) -> Result<Embedding> {
        batch.check_dim(self.dim)?;
        let mut centred = batch.clone();
        for row in centred.as_mut_slice().chunks_exact_mut(self.dim) {
            for (x, m) in row.iter_mut().zip(&self.mean) {
                *x -= m;
            }
        }
        Ok(Embedding {
            coords: centred.transform(&self.eigenvectors, self.dim)?,
        })
    }

    /// Inverse of [`SpectrumReport::project`].
    pub fn reconstruct(&self, embedding: &Embedding) -> Result<PointBatch> {
        embedding.coords.check_dim(self.dim)?;
        let d = self.dim;
        let mut transposed = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                transposed[j * d + i] = self.eigenvectors[i * d + j];
            }
        }
        let mut out = embedding.coords.transform(&transposed, d)?;
        for row in out.as_mut_slice().chunks_exact_mut(d) {
            for (x, m) in row.iter_mut().zip(&self.mean) {
                *x += m;
            }
        }
        Ok(out)
    }
}

pub fn spectrum(batch: &PointBatch) -> Result<SpectrumReport> {
    let (mean, cov) = covariance(batch)?;
    let d = batch.dim();
    let trace = (0..d).map(|i| cov[i * d + i]).sum();
    let eig = symmetric_eigen(&cov, d)?;
    Ok(SpectrumReport {
        dim: d,
        eigenvalues: eig.values,
        trace,
        mean,
        eigenvectors: eig.vectors,
    })
}

/// Items expressed in principal-component coordinates `(p_1, ..., p_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: PointBatch,
}

impl Embedding {
    pub fn new(coords: PointBatch) -> Self {
        Self { coords }
    }

    pub fn items(&self) -> usize {
        self.coords.count()
    }

    pub fn dim(&self) -> usize {
        self.coords.dim()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.coords.column(k)
    }
}

/// Centres `batch` and rotates it onto its covariance eigenvectors, so that
/// column variances come out in descending order.
pub fn to_principal_embedding(batch: &PointBatch) -> Result<Embedding> {
    spectrum(batch)?.project(batch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cross_shape_covariance() {
        // sum of x^2 is 2 per axis, divisor n - 1 = 3
        let b = PointBatch::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]).unwrap();
        let s = spectrum(&b).unwrap();
        assert_relative_eq!(s.eigenvalues[0], 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(s.eigenvalues[1], 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(s.trace, 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn points_on_axis() {
        let b = PointBatch::from_rows(&[[1.0, 0.0], [2.0, 0.0], [-4.0, 0.0]]).unwrap();
        let s = spectrum(&b).unwrap();
        assert!(s.eigenvalues[0] > 0.0);
        assert_eq!(s.eigenvalues[1], 0.0);
    }

    #[test]
    fn needs_two_items() {
        let b = PointBatch::from_rows(&[[1.0, 0.0]]).unwrap();
        assert!(spectrum(&b).is_err());
    }

    #[test]
    fn axis_aligned_embedding_is_column_permutation() {
        // column 1 has the larger spread
        let b = PointBatch::from_rows(&[[1.0, 3.0], [-1.0, -3.0], [1.0, -3.0], [-1.0, 3.0]]).unwrap();
        let e = to_principal_embedding(&b).unwrap();
        for (out, inp) in e.coords.rows().zip(b.rows()) {
            assert_relative_eq!(out[0].abs(), inp[1].abs(), epsilon = 1e-14);
            assert_relative_eq!(out[1].abs(), inp[0].abs(), epsilon = 1e-14);
        }
    }
}
