//! Full-batch gradient descent on a free point cloud under the eccentric
//! loss alone. The cloud settles on a sphere whose radius is set by
//! `(d, mu, N)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::batch::{sq_norm, PointBatch};
use crate::error::{Error, Result};
use crate::kernel::{batch_loss, batch_loss_gradient};
use crate::latent::{spectrum, SpectrumReport};
use crate::params::ParamSet;

pub const DEFAULT_RECORD_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: ParamSet,
    pub count: usize,
    pub steps: usize,
    pub step_size: f64,
    pub seed: u64,
    /// Standard deviation of the Gaussian initial cloud.
    pub init_scale: f64,
    pub record_every: usize,
}

impl SimConfig {
    pub fn new(params: ParamSet, count: usize, steps: usize, step_size: f64, seed: u64) -> Self {
        Self {
            params,
            count,
            steps,
            step_size,
            seed,
            init_scale: 0.01,
            record_every: DEFAULT_RECORD_EVERY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.count < 2 {
            return Err(Error::invalid(format!("need at least 2 particles, got {}", self.count)));
        }
        if self.steps < 1 {
            return Err(Error::invalid("need at least one step"));
        }
        if !(self.step_size.is_finite() && self.step_size >= 0.0) {
            return Err(Error::invalid(format!("bad step size {}", self.step_size)));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::invalid(format!("bad init scale {}", self.init_scale)));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record interval must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    #[serde(skip)]
    pub final_batch: PointBatch,
    /// Loss before step 0 and after every `record_every` steps, plus the final step.
    pub loss_trace: Vec<f64>,
    /// Step index of each `loss_trace` entry.
    pub trace_steps: Vec<usize>,
    pub radial_mean: f64,
    pub radial_std: f64,
    pub spectrum: SpectrumReport,
}

/// Mean and population standard deviation of the row norms.
pub fn radial_stats(batch: &PointBatch) -> Result<(f64, f64)> {
    batch.require_count(1)?;
    let norms: Vec<f64> = batch.rows().map(|r| sq_norm(r).sqrt()).collect();
    let n = norms.len() as f64;
    let mean = norms.iter().sum::<f64>() / n;
    let var = norms.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    Ok((mean, var.sqrt()))
}

/// Gaussian cloud drawn from `seed`.
pub fn initial_cloud(count: usize, dim: usize, scale: f64, seed: u64) -> PointBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..count * dim)
        .map(|_| {
            let g: f64 = StandardNormal.sample(&mut rng);
            scale * g
        })
        .collect();
    PointBatch::new(count, dim, data).expect("gaussian draws are finite")
}

/// Exactly uniform on the sphere of `radius`: normalized Gaussian draws.
pub fn sample_sphere(count: usize, dim: usize, radius: f64, seed: u64) -> PointBatch {
    let mut batch = initial_cloud(count, dim, 1.0, seed);
    for row in batch.as_mut_slice().chunks_exact_mut(dim) {
        let norm = sq_norm(row).sqrt();
        row.iter_mut().for_each(|x| *x *= radius / norm);
    }
    batch
}

pub fn simulate(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let init = initial_cloud(
        config.count,
        config.params.dim,
        config.init_scale,
        config.seed,
    );
    simulate_from(config, init)
}

/// Runs `z <- z - step_size * grad` from a given starting cloud.
pub fn simulate_from(config: &SimConfig, init: PointBatch) -> Result<SimReport> {
    config.validate()?;
    init.check_dim(config.params.dim)?;
    init.require_count(2)?;
    let mut z = init;
    let mut loss_trace = vec![batch_loss(&z, &config.params)?];
    let mut trace_steps = vec![0];
    for step in 1..=config.steps {
        let grad = batch_loss_gradient(&z, &config.params)?;
        for (x, g) in z.as_mut_slice().iter_mut().zip(grad.as_slice()) {
            *x -= config.step_size * g;
        }
        if !z.is_finite() {
            return Err(Error::Divergence { step });
        }
        if step % config.record_every == 0 || step == config.steps {
            loss_trace.push(batch_loss(&z, &config.params)?);
            trace_steps.push(step);
        }
    }
    let overflow = |e| match e {
        Error::NonFinite(_) => Error::Divergence { step: config.steps },
        e => e,
    };
    let (radial_mean, radial_std) = radial_stats(&z).map_err(overflow)?;
    let spectrum = spectrum(&z).map_err(overflow)?;
    if !radial_mean.is_finite() || !radial_std.is_finite() {
        return Err(Error::Divergence { step: config.steps });
    }
    Ok(SimReport {
        final_batch: z,
        loss_trace,
        trace_steps,
        radial_mean,
        radial_std,
        spectrum,
    })
}
