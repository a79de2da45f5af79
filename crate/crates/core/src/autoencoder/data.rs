//! Datasets: built-in synthetic generators and IDX image files.

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::idx;
use crate::batch::PointBatch;
use crate::error::{Error, Result};

/// Feature vectors in `[0, 1]` with optional integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: PointBatch,
    pub labels: Option<Vec<u32>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select(indices),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// `k` isotropic clusters (std 0.05) with centres in `[0.25, 0.75]^dim`.
    GaussianMixture { k: usize, n: usize, dim: usize, seed: u64 },
    /// Concentric rings around `(0.5, 0.5)` with radii `0.4 (r + 1) / rings`.
    NoisyRing { rings: usize, n: usize, noise: f64, seed: u64 },
    /// A thin slab of the swiss roll, rescaled into the unit cube.
    SwissRoll { n: usize, seed: u64 },
    Idx {
        images: PathBuf,
        labels: PathBuf,
        limit: Option<usize>,
    },
}

pub fn load_dataset(source: &DataSource) -> Result<Dataset> {
    match *source {
        DataSource::GaussianMixture { k, n, dim, seed } => gaussian_mixture(k, n, dim, seed),
        DataSource::NoisyRing { rings, n, noise, seed } => noisy_ring(rings, n, noise, seed),
        DataSource::SwissRoll { n, seed } => swiss_roll(n, seed),
        DataSource::Idx {
            ref images,
            ref labels,
            limit,
        } => {
            let (imgs, labs) = idx::read_pair(images, labels, limit)?;
            let width = imgs.rows * imgs.cols;
            if width == 0 {
                return Err(Error::invalid("IDX images have zero pixels"));
            }
            let features = imgs.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
            Ok(Dataset {
                features: PointBatch::new(imgs.count, width, features)?,
                labels: Some(labs.into_iter().map(u32::from).collect()),
            })
        }
    }
}

fn gaussian_mixture(k: usize, n: usize, dim: usize, seed: u64) -> Result<Dataset> {
    if k == 0 || dim == 0 {
        return Err(Error::invalid("gaussian mixture needs k >= 1 and dim >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<f64> = (0..k * dim).map(|_| rng.random_range(0.25..0.75)).collect();
    let noise = Normal::new(0.0, 0.05).expect("valid std");
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let c = rng.random_range(0..k);
        for j in 0..dim {
            features.push((centres[c * dim + j] + noise.sample(&mut rng)).clamp(0.0, 1.0));
        }
        labels.push(c as u32);
    }
    Ok(Dataset {
        features: PointBatch::new(n, dim, features)?,
        labels: Some(labels),
    })
}

fn noisy_ring(rings: usize, n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if rings == 0 || !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::invalid("noisy ring needs rings >= 1 and noise >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid std");
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let ring = i % rings;
        let radius = 0.4 * (ring + 1) as f64 / rings as f64;
        let theta = rng.random_range(0.0..2.0 * PI);
        let (s, c) = theta.sin_cos();
        let x = 0.5 + radius * c + jitter.sample(&mut rng);
        let y = 0.5 + radius * s + jitter.sample(&mut rng);
        features.push(x.clamp(0.0, 1.0));
        features.push(y.clamp(0.0, 1.0));
        labels.push(ring as u32);
    }
    Ok(Dataset {
        features: PointBatch::new(n, 2, features)?,
        labels: Some(labels),
    })
}

fn swiss_roll(n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_max = 4.5 * PI;
    let mut features = Vec::with_capacity(3 * n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let t: f64 = rng.random_range(1.5 * PI..t_max);
        let h: f64 = rng.random_range(0.45..0.55);
        features.push(0.5 + 0.45 * t * t.cos() / t_max);
        features.push(h);
        features.push(0.5 + 0.45 * t * t.sin() / t_max);
        labels.push(((t - 1.5 * PI) / (0.75 * PI)).floor().min(3.0) as u32);
    }
    Ok(Dataset {
        features: PointBatch::new(n, 3, features)?,
        labels: Some(labels),
    })
}
