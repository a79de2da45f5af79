use serde::Serialize;

use super::spectrum::Embedding;
use crate::batch::{dot, sq_dist, sq_norm};
use crate::error::{Error, Result};

pub(crate) fn check_embedding_pair(e1: &Embedding, e2: &Embedding) -> Result<()> {
    if e1.items() != e2.items() {
        return Err(Error::invalid(format!(
            "embeddings index different item counts: {} vs {}",
            e1.items(),
            e2.items()
        )));
    }
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            found: e2.dim(),
        });
    }
    Ok(())
}

/// `dim x dim` Pearson correlations between the columns of two embeddings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub dim: usize,
    /// Row-major; entry `(i, j)` correlates `p_i` with `q_j`.
    pub values: Vec<f64>,
    /// Entries forced to 0 because a column had zero variance.
    pub degenerate: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `sum_i |corr_ii|`.
    pub fn diagonal_mass(&self) -> f64 {
        self.diagonal().iter().map(|v| v.abs()).sum()
    }
}

fn centred_columns(e: &Embedding) -> Vec<Vec<f64>> {
    (0..e.dim())
        .map(|k| {
            let col = e.column(k);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            col.into_iter().map(|x| x - mean).collect()
        })
        .collect()
}

pub fn cross_correlation(e1: &Embedding, e2: &Embedding) -> Result<CorrelationMatrix> {
    check_embedding_pair(e1, e2)?;
    let d = e1.dim();
    let p = centred_columns(e1);
    let q = centred_columns(e2);
    let p_norm: Vec<f64> = p.iter().map(|c| sq_norm(c).sqrt()).collect();
    let q_norm: Vec<f64> = q.iter().map(|c| sq_norm(c).sqrt()).collect();
    let mut values = vec![0.0; d * d];
    let mut degenerate = vec![false; d * d];
    for i in 0..d {
        for j in 0..d {
            let denom = p_norm[i] * q_norm[j];
            if denom == 0.0 {
                degenerate[i * d + j] = true;
            } else {
                values[i * d + j] = (dot(&p[i], &q[j]) / denom).clamp(-1.0, 1.0);
            }
        }
    }
    Ok(CorrelationMatrix {
        dim: d,
        values,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityMetrics {
    pub rms_distance: f64,
    pub mean_cosine: f64,
    pub mean_angle_deg: f64,
    /// Items left out of the cosine and angle means because a row was zero.
    pub zero_rows: usize,
}

/// Row-wise distance, cosine and angle between two embeddings of the same items.
pub fn similarity_metrics(e1: &Embedding, e2: &Embedding) -> Result<SimilarityMetrics> {
    check_embedding_pair(e1, e2)?;
    let n = e1.items();
    if n == 0 {
        return Err(Error::TooFewPoints { needed: 1, found: 0 });
    }
    let mut dist2 = 0.0;
    let mut cos_sum = 0.0;
    let mut angle_sum = 0.0;
    let mut used = 0usize;
    for (a, b) in e1.coords.rows().zip(e2.coords.rows()) {
        dist2 += sq_dist(a, b);
        let denom = (sq_norm(a) * sq_norm(b)).sqrt();
        if denom == 0.0 {
            continue;
        }
        let cos = (dot(a, b) / denom).clamp(-1.0, 1.0);
        cos_sum += cos;
        angle_sum += cos.acos().to_degrees();
        used += 1;
    }
    if used == 0 {
        return Err(Error::invalid("every row pair contains a zero vector"));
    }
    Ok(SimilarityMetrics {
        rms_distance: (dist2 / n as f64).sqrt(),
        mean_cosine: cos_sum / used as f64,
        mean_angle_deg: angle_sum / used as f64,
        zero_rows: n - used,
    })
}
