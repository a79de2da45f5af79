use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::eigen::symmetric_eigen;
use super::spectrum::covariance;
use crate::batch::PointBatch;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    /// i.i.d. standard normal.
    Standard,
    /// Gaussian with the mean and covariance of a reference batch.
    Matched,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub batch: PointBatch,
    /// Set when the reference had fewer than `dim + 1` items, so its
    /// covariance estimate cannot be full rank.
    pub rank_deficient: bool,
}

/// Symmetric square root `V diag(sqrt(max(l, 0))) V^T` of a covariance matrix.
pub fn psd_sqrt(cov: &[f64], dim: usize) -> Result<Vec<f64>> {
    let eig = symmetric_eigen(cov, dim)?;
    let roots: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let v = &eig.vectors;
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[i * dim + j] = (0..dim).map(|k| v[i * dim + k] * roots[k] * v[j * dim + k]).sum();
        }
    }
    Ok(out)
}

pub fn sample_latents(
    mode: SampleMode,
    reference: Option<&PointBatch>,
    n: usize,
    dim: usize,
    seed: u64,
) -> Result<Sampled> {
    if dim == 0 {
        return Err(Error::invalid("sample dimension must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normals = |count: usize| -> Vec<f64> {
        (0..count).map(|_| StandardNormal.sample(&mut rng)).collect()
    };
    match mode {
        SampleMode::Standard => Ok(Sampled {
            batch: PointBatch::new(n, dim, normals(n * dim))?,
            rank_deficient: false,
        }),
        SampleMode::Matched => {
            let reference = reference
                .ok_or_else(|| Error::invalid("matched sampling needs a reference batch"))?;
            reference.check_dim(dim)?;
            let (mean, cov) = covariance(reference)?;
            let factor = psd_sqrt(&cov, dim)?;
            let g = normals(n * dim);
            let mut data = Vec::with_capacity(n * dim);
            for row in g.chunks_exact(dim) {
                for i in 0..dim {
                    let lg: f64 = (0..dim).map(|j| factor[i * dim + j] * row[j]).sum();
                    data.push(mean[i] + lg);
                }
            }
            Ok(Sampled {
                batch: PointBatch::new(n, dim, data)?,
                rank_deficient: reference.count() < dim + 1,
            })
        }
    }
}
