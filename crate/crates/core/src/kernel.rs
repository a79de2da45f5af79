//! The eccentric loss
//!
//! ```text
//! l({z_i}) = 1/(b(b-1)) * sum_{i != j} K(z_i, z_j)
//! K(x, y)  = (|x|^2 + |y|^2)/2 - mu*N*log(1 + |x - y|^2 / N)
//! ```
//!
//! Its gradient is an attraction of each point toward the origin plus a
//! softened pairwise repulsion.

use rayon::prelude::*;

use crate::batch::{dot, sq_dist, sq_norm, PointBatch};
use crate::error::{Error, Result};
use crate::params::ParamSet;

/// Softening scale that places the stationary radius close to `sqrt(dim)`:
/// `N = 2d(1 + 1/(2 mu (d-1))) / (2 mu - 1)`.
pub fn choose_big_n(dim: usize, mu: f64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::invalid(format!("dimension must be at least 2, got {dim}")));
    }
    if !mu.is_finite() || mu <= 0.5 {
        return Err(Error::invalid(format!(
            "repulsion strength mu must exceed 1/2, got {mu}"
        )));
    }
    let d = dim as f64;
    Ok(2.0 * d * (1.0 + 1.0 / (2.0 * mu * (d - 1.0))) / (2.0 * mu - 1.0))
}

pub fn pair_kernel(zi: &[f64], zj: &[f64], params: &ParamSet) -> Result<f64> {
    for z in [zi, zj] {
        if z.len() != params.dim {
            return Err(Error::DimensionMismatch {
                expected: params.dim,
                found: z.len(),
            });
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("kernel argument"));
        }
    }
    Ok(kernel_unchecked(zi, zj, params.mu, params.big_n))
}

fn kernel_unchecked(zi: &[f64], zj: &[f64], mu: f64, big_n: f64) -> f64 {
    0.5 * (sq_norm(zi) + sq_norm(zj)) - mu * big_n * (sq_dist(zi, zj) / big_n).ln_1p()
}

fn check_batch(batch: &PointBatch, params: &ParamSet) -> Result<()> {
    params.validate()?;
    batch.check_dim(params.dim)?;
    batch.require_count(2)
}

/// Mean of the kernel over ordered pairs `i != j`.
///
/// Each unordered pair is visited once and counted twice.
pub fn batch_loss(batch: &PointBatch, params: &ParamSet) -> Result<f64> {
    check_batch(batch, params)?;
    let b = batch.count();
    let attraction: f64 = batch.rows().map(sq_norm).sum::<f64>() / b as f64;
    let repulsion = log_pair_sum(batch, params.big_n, false);
    Ok(attraction - params.mu * params.big_n * 2.0 * repulsion / (b * (b - 1)) as f64)
}

/// Same value as [`batch_loss`], but summing over all `b^2` ordered pairs
/// including `i == j`, whose log terms vanish.
pub fn batch_loss_with_diagonal(batch: &PointBatch, params: &ParamSet) -> Result<f64> {
    check_batch(batch, params)?;
    let b = batch.count();
    let attraction: f64 = batch.rows().map(sq_norm).sum::<f64>() / b as f64;
    let repulsion = log_pair_sum(batch, params.big_n, true);
    Ok(attraction - params.mu * params.big_n * repulsion / (b * (b - 1)) as f64)
}

fn log_pair_sum(batch: &PointBatch, big_n: f64, all_ordered: bool) -> f64 {
    let b = batch.count();
    let mut total = 0.0;
    for i in 0..b {
        let zi = batch.row(i);
        let start = if all_ordered { 0 } else { i + 1 };
        for j in start..b {
            total += (sq_dist(zi, batch.row(j)) / big_n).ln_1p();
        }
    }
    total
}

/// The loss written through the Gram matrix: squared distances are
/// `|x|^2 + |y|^2 - 2<x, y>` (clamped at zero), summed over all `b^2` pairs.
pub fn batch_loss_gram(batch: &PointBatch, params: &ParamSet) -> Result<f64> {
    check_batch(batch, params)?;
    let b = batch.count();
    let norms: Vec<f64> = batch.rows().map(sq_norm).collect();
    let mut log_sum = 0.0;
    for i in 0..b {
        for j in 0..b {
            let d2 = (norms[i] + norms[j] - 2.0 * dot(batch.row(i), batch.row(j))).max(0.0);
            log_sum += (d2 / params.big_n).ln_1p();
        }
    }
    let total: f64 = norms.iter().sum();
    Ok((total - params.mu * params.big_n * log_sum / (b - 1) as f64) / b as f64)
}

/// Exact gradient of [`batch_loss`]:
///
/// ```text
/// dl/dz_i = (2/b) z_i - 4 mu / (b(b-1)) * sum_{j != i} (z_i - z_j) / (1 + |z_i - z_j|^2 / N)
/// ```
///
/// Rows are computed in parallel; within a row the sum runs over `j` in
/// ascending order, so the result does not depend on the thread count.
pub fn batch_loss_gradient(batch: &PointBatch, params: &ParamSet) -> Result<PointBatch> {
    check_batch(batch, params)?;
    let b = batch.count();
    let d = batch.dim();
    let attract = 2.0 / b as f64;
    let repel = 4.0 * params.mu / (b * (b - 1)) as f64;
    let inv_n = 1.0 / params.big_n;

    let mut grad = PointBatch::zeros(b, d);
    grad.as_mut_slice()
        .par_chunks_exact_mut(d)
        .enumerate()
        .for_each(|(i, out)| {
            let zi = batch.row(i);
            let mut force = vec![0.0; d];
            for j in 0..b {
                if j == i {
                    continue;
                }
                let zj = batch.row(j);
                let w = 1.0 / (1.0 + sq_dist(zi, zj) * inv_n);
                for k in 0..d {
                    force[k] += (zi[k] - zj[k]) * w;
                }
            }
            for k in 0..d {
                out[k] = attract * zi[k] - repel * force[k];
            }
        });
    Ok(grad)
}
