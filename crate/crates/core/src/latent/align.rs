//! Signed-permutation alignment of two principal-component embeddings of
//! the same items.
//!
//! Columns are compared through their inner products over items. A repeat
//! loop walks the slots in order and, at slot `i`, cyclically rotates into
//! place whichever remaining column of either embedding matches the other's
//! column `i` best in absolute inner product, negating it when the match is
//! anti-correlated. Once a full pass makes no move, both embeddings are
//! reordered together by the summed column energy `<p,p> + <q,q>`.

use serde::Serialize;

use super::metrics::{check_embedding_pair, cross_correlation, CorrelationMatrix};
use super::spectrum::Embedding;
use crate::batch::dot;
use crate::error::Result;
use crate::PointBatch;

/// Sweeps allowed per dimension before giving up.
pub const SWEEPS_PER_DIM: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentResult {
    /// Slot `i` of the aligned first embedding holds original column `permutation_p[i]`.
    pub permutation_p: Vec<usize>,
    pub permutation_q: Vec<usize>,
    pub signs_p: Vec<i8>,
    pub signs_q: Vec<i8>,
    pub iterations: usize,
    /// False when the sweep cap was reached; the transforms are still usable.
    pub converged: bool,
    pub corr_before: CorrelationMatrix,
    pub corr_after: CorrelationMatrix,
}

fn apply(e: &Embedding, perm: &[usize], signs: &[i8]) -> Result<Embedding> {
    let d = e.dim();
    let mut data = Vec::with_capacity(e.items() * d);
    for row in e.coords.rows() {
        for (&src, &s) in perm.iter().zip(signs) {
            data.push(f64::from(s) * row[src]);
        }
    }
    Ok(Embedding::new(PointBatch::new(e.items(), d, data)?))
}

impl AlignmentResult {
    pub fn apply_p(&self, e: &Embedding) -> Result<Embedding> {
        apply(e, &self.permutation_p, &self.signs_p)
    }

    pub fn apply_q(&self, e: &Embedding) -> Result<Embedding> {
        apply(e, &self.permutation_q, &self.signs_q)
    }
}

/// Working state: `inner[a][b] = <p_a, q_b>` in current slot order.
struct State {
    inner: Vec<Vec<f64>>,
    p_energy: Vec<f64>,
    q_energy: Vec<f64>,
    perm_p: Vec<usize>,
    perm_q: Vec<usize>,
    sign_p: Vec<i8>,
    sign_q: Vec<i8>,
}

impl State {
    /// Moves slot `j` of `p` to slot `i`, shifting `i..j` up by one.
    fn rotate_p(&mut self, i: usize, j: usize) {
        self.inner[i..=j].rotate_right(1);
        self.p_energy[i..=j].rotate_right(1);
        self.perm_p[i..=j].rotate_right(1);
        self.sign_p[i..=j].rotate_right(1);
    }

    fn rotate_q(&mut self, i: usize, k: usize) {
        for row in &mut self.inner {
            row[i..=k].rotate_right(1);
        }
        self.q_energy[i..=k].rotate_right(1);
        self.perm_q[i..=k].rotate_right(1);
        self.sign_q[i..=k].rotate_right(1);
    }

    fn negate_p(&mut self, i: usize) {
        self.inner[i].iter_mut().for_each(|v| *v = -*v);
        self.sign_p[i] = -self.sign_p[i];
    }

    fn negate_q(&mut self, i: usize) {
        for row in &mut self.inner {
            row[i] = -row[i];
        }
        self.sign_q[i] = -self.sign_q[i];
    }
}

/// Argmax over `i..d` of `score`, lowest index on ties.
fn argmax_from(i: usize, d: usize, score: impl Fn(usize) -> f64) -> usize {
    let mut best = i;
    let mut best_score = score(i);
    for c in i + 1..d {
        let s = score(c);
        if s > best_score {
            best = c;
            best_score = s;
        }
    }
    best
}

pub fn align(e1: &Embedding, e2: &Embedding) -> Result<AlignmentResult> {
    check_embedding_pair(e1, e2)?;
    let d = e1.dim();
    let p_cols: Vec<Vec<f64>> = (0..d).map(|k| e1.column(k)).collect();
    let q_cols: Vec<Vec<f64>> = (0..d).map(|k| e2.column(k)).collect();
    let mut st = State {
        inner: p_cols
            .iter()
            .map(|p| q_cols.iter().map(|q| dot(p, q)).collect())
            .collect(),
        p_energy: p_cols.iter().map(|p| dot(p, p)).collect(),
        q_energy: q_cols.iter().map(|q| dot(q, q)).collect(),
        perm_p: (0..d).collect(),
        perm_q: (0..d).collect(),
        sign_p: vec![1; d],
        sign_q: vec![1; d],
    };

    let cap = SWEEPS_PER_DIM * d.max(1);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cap {
        iterations += 1;
        let mut sorted = true;
        for i in 0..d {
            let j = argmax_from(i, d, |c| st.inner[c][i].abs());
            let k = argmax_from(i, d, |c| st.inner[i][c].abs());
            if j > i && st.inner[j][i].abs() > st.inner[i][k].abs() {
                sorted = false;
                st.rotate_p(i, j);
                if st.inner[i][i] < 0.0 {
                    st.negate_p(i);
                }
            } else if k > i {
                sorted = false;
                st.rotate_q(i, k);
                if st.inner[i][i] < 0.0 {
                    st.negate_q(i);
                }
            }
        }
        if sorted {
            converged = true;
            break;
        }
    }

    // Slots already matched in place never pass through a flip above.
    for i in 0..d {
        if st.inner[i][i] < 0.0 {
            st.negate_q(i);
        }
    }

    for i in 0..d {
        let k = argmax_from(i, d, |c| st.p_energy[c] + st.q_energy[c]);
        if k > i {
            st.rotate_q(i, k);
            st.rotate_p(i, k);
        }
    }

    let mut result = AlignmentResult {
        permutation_p: st.perm_p,
        permutation_q: st.perm_q,
        signs_p: st.sign_p,
        signs_q: st.sign_q,
        iterations,
        converged,
        corr_before: cross_correlation(e1, e2)?,
        corr_after: cross_correlation(e1, e2)?,
    };
    result.corr_after = cross_correlation(&result.apply_p(e1)?, &result.apply_q(e2)?)?;
    Ok(result)
}

/// `sum_i <p_i, q_i>` over items.
pub fn diagonal_inner_sum(e1: &Embedding, e2: &Embedding) -> Result<f64> {
    check_embedding_pair(e1, e2)?;
    Ok((0..e1.dim()).map(|k| dot(&e1.column(k), &e2.column(k))).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_embedding(n: usize, scales: &[f64], seed: u64) -> Embedding {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = scales.len();
        let data = (0..n * d)
            .map(|i| scales[i % d] * (rng.random::<f64>() - 0.5))
            .collect();
        Embedding::new(PointBatch::new(n, d, data).unwrap())
    }

    #[test]
    fn identical_embeddings() {
        let e = random_embedding(200, &[4.0, 2.0, 1.0], 1);
        let r = align(&e, &e).unwrap();
        assert_eq!(r.permutation_p, vec![0, 1, 2]);
        assert_eq!(r.permutation_q, vec![0, 1, 2]);
        assert_eq!(r.signs_p, vec![1; 3]);
        assert_eq!(r.signs_q, vec![1; 3]);
        assert!(r.converged);
        assert_eq!(r.corr_before, r.corr_after);
        assert!(r.corr_after.diagonal().iter().all(|&c| c > 0.999));
    }

    #[test]
    fn negated_embedding() {
        let e = random_embedding(200, &[4.0, 2.0, 1.0], 2);
        let neg = Embedding::new(
            PointBatch::new(200, 3, e.coords.as_slice().iter().map(|v| -v).collect()).unwrap(),
        );
        let r = align(&e, &neg).unwrap();
        assert_eq!(r.permutation_p, vec![0, 1, 2]);
        assert_eq!(r.permutation_q, vec![0, 1, 2]);
        assert_eq!(r.signs_p, vec![1; 3]);
        assert_eq!(r.signs_q, vec![-1; 3]);
        assert!(r.corr_after.diagonal().iter().all(|&c| c > 0.999));
    }

    #[test]
    fn apply_preserves_row_distances() {
        let e = random_embedding(20, &[3.0, 2.0, 1.0, 0.5], 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let other = random_embedding(20, &[1.0, 1.0, 1.0, 1.0], rng.random());
        let r = align(&e, &other).unwrap();
        let a = r.apply_p(&e).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let before = crate::batch::sq_dist(e.coords.row(i), e.coords.row(j));
                let after = crate::batch::sq_dist(a.coords.row(i), a.coords.row(j));
                assert!((before - after).abs() <= 1e-14 * before.max(1.0));
            }
        }
    }

    #[test]
    fn mismatched_inputs() {
        let e1 = random_embedding(10, &[1.0, 1.0], 4);
        let e2 = random_embedding(11, &[1.0, 1.0], 4);
        assert!(align(&e1, &e2).is_err());
    }
}
