use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::batch::{sq_dist, PointBatch};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnnResult {
    pub predictions: Vec<u32>,
    /// Fraction misclassified, when ground truth was supplied.
    pub error_rate: Option<f64>,
}

/// Brute-force Euclidean k-nearest-neighbour majority vote.
///
/// Neighbours at equal distance are taken in training order. A tied vote
/// goes to the label whose neighbours have the smallest summed distance,
/// then to the lowest label.
pub fn knn_classify(
    train: &PointBatch,
    labels: &[u32],
    test: &PointBatch,
    k: usize,
    truth: Option<&[u32]>,
) -> Result<KnnResult> {
    if train.count() == 0 {
        return Err(Error::TooFewPoints { needed: 1, found: 0 });
    }
    if labels.len() != train.count() {
        return Err(Error::invalid(format!(
            "{} labels for {} training items",
            labels.len(),
            train.count()
        )));
    }
    if k == 0 || k > train.count() {
        return Err(Error::invalid(format!(
            "k must lie in [1, {}], got {k}",
            train.count()
        )));
    }
    test.check_dim(train.dim())?;
    if let Some(t) = truth {
        if t.len() != test.count() {
            return Err(Error::invalid(format!(
                "{} truth labels for {} test items",
                t.len(),
                test.count()
            )));
        }
    }

    let predictions: Vec<u32> = (0..test.count())
        .into_par_iter()
        .map(|q| {
            let query = test.row(q);
            let mut dists: Vec<(f64, usize)> = train
                .rows()
                .enumerate()
                .map(|(i, r)| (sq_dist(query, r), i))
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut votes: BTreeMap<u32, (usize, f64)> = BTreeMap::new();
            for &(d2, i) in &dists[..k] {
                let entry = votes.entry(labels[i]).or_insert((0, 0.0));
                entry.0 += 1;
                entry.1 += d2.sqrt();
            }
            let mut best: Option<(u32, usize, f64)> = None;
            for (&label, &(count, dist)) in &votes {
                let better = match best {
                    None => true,
                    Some((_, bc, bd)) => count > bc || (count == bc && dist < bd),
                };
                if better {
                    best = Some((label, count, dist));
                }
            }
            best.expect("k >= 1 gives at least one vote").0
        })
        .collect();

    let error_rate = truth.map(|t| {
        let wrong = predictions.iter().zip(t).filter(|(p, t)| p != t).count();
        if t.is_empty() {
            0.0
        } else {
            wrong as f64 / t.len() as f64
        }
    });
    Ok(KnnResult {
        predictions,
        error_rate,
    })
}
