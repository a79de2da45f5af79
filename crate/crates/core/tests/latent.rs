use eccentric::latent::eigen::symmetric_eigen;
use eccentric::latent::{
    align, cross_correlation, decode_eigen_components, knn_classify, sample_latents,
    similarity_metrics, spectrum, Embedding, IdentityDecoder, SampleMode,
};
use eccentric::latent::align::diagonal_inner_sum;
use eccentric::PointBatch;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(n: usize, d: usize, scales: &[f64], seed: u64) -> PointBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * d);
    for _ in 0..n {
        for &s in scales.iter().take(d) {
            data.push(s * rng.sample::<f64, _>(StandardNormal));
        }
    }
    PointBatch::new(n, d, data).unwrap()
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                c[i * n + j] += a[i * n + k] * b[k * n + j];
            }
        }
    }
    c
}

/// Modified Gram-Schmidt QR of a square row-major matrix.
fn qr(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut q = vec![0.0; n * n];
    let mut r = vec![0.0; n * n];
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| a[i * n + j]).collect()).collect();
    for j in 0..n {
        for k in 0..j {
            let qk: Vec<f64> = (0..n).map(|i| q[i * n + k]).collect();
            let p: f64 = qk.iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
            r[k * n + j] = p;
            for i in 0..n {
                cols[j][i] -= p * qk[i];
            }
        }
        let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        r[j * n + j] = norm;
        for i in 0..n {
            q[i * n + j] = cols[j][i] / norm;
        }
    }
    (q, r)
}

/// Unshifted QR iteration: `A_{k+1} = R_k Q_k`, accumulating `V = Q_0 Q_1 ...`.
fn qr_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut ak = a.to_vec();
    let mut v: Vec<f64> = (0..n * n).map(|i| if i % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
    for _ in 0..3000 {
        let (q, r) = qr(&ak, n);
        ak = matmul(&r, &q, n);
        v = matmul(&v, &q, n);
    }
    ((0..n).map(|i| ak[i * n + i]).collect(), v)
}

#[test]
fn jacobi_matches_qr_iteration() {
    let x = gaussian(50, 6, &[3.0, 2.2, 1.6, 1.1, 0.7, 0.4], 17);
    let rep = spectrum(&x).unwrap();
    let cov: Vec<f64> = {
        let (_, c) = eccentric::latent::covariance(&x).unwrap();
        c
    };
    let (values, vectors) = qr_eigen(&cov, 6);
    for k in 0..6 {
        assert!((rep.eigenvalues[k] - values[k]).abs() < 1e-9, "{k}");
        let ours = rep.eigenvector(k);
        let theirs: Vec<f64> = (0..6).map(|i| vectors[i * 6 + k]).collect();
        let sign = ours.iter().zip(&theirs).map(|(a, b)| a * b).sum::<f64>().signum();
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - sign * b).abs() < 1e-9);
        }
    }
}

#[test]
fn eigen_reproduces_matrix() {
    let x = gaussian(40, 9, &[1.0; 9], 2);
    let (_, cov) = eccentric::latent::covariance(&x).unwrap();
    let eig = symmetric_eigen(&cov, 9).unwrap();
    for i in 0..9 {
        for j in 0..9 {
            let v: f64 = (0..9)
                .map(|k| eig.vectors[i * 9 + k] * eig.values[k] * eig.vectors[j * 9 + k])
                .sum();
            assert!((v - cov[i * 9 + j]).abs() < 1e-12);
        }
    }
}

fn rotation(dim: usize, seed: u64) -> Vec<f64> {
    let g = gaussian(dim, dim, &vec![1.0; dim], seed);
    let (q, _) = qr(g.as_slice(), dim);
    q
}

#[test]
fn spectrum_is_rotation_invariant() {
    let x = gaussian(200, 7, &[2.0, 1.5, 1.2, 1.0, 0.8, 0.5, 0.3], 8);
    let xr = x.transform(&rotation(7, 4), 7).unwrap();
    let a = spectrum(&x).unwrap();
    let b = spectrum(&xr).unwrap();
    for (u, v) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((u - v).abs() < 1e-9);
    }
}

#[test]
fn projection_round_trip() {
    let x = gaussian(120, 5, &[1.0, 2.0, 0.5, 1.5, 0.8], 6);
    let rep = spectrum(&x).unwrap();
    let back = rep.reconstruct(&rep.project(&x).unwrap()).unwrap();
    for (a, b) in x.as_slice().iter().zip(back.as_slice()) {
        assert!((a - b).abs() < 1e-9);
    }
}

fn signed_permute(e: &PointBatch, perm: &[usize], signs: &[f64]) -> PointBatch {
    let d = e.dim();
    let mut data = Vec::with_capacity(e.count() * d);
    for row in e.rows() {
        for c in 0..d {
            data.push(signs[c] * row[perm[c]]);
        }
    }
    PointBatch::new(e.count(), d, data).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Exhaustive search for the signed permutation `(perm, signs)` mapping column
/// `c` of `e1` to `signs[c] * e2[:, perm[c]]` with the largest summed inner product.
fn brute_force_match(e1: &PointBatch, e2: &PointBatch) -> (Vec<usize>, Vec<f64>) {
    let d = e1.dim();
    let inner = |a: usize, b: usize| -> f64 {
        e1.column(a).iter().zip(e2.column(b)).map(|(x, y)| x * y).sum()
    };
    let mut best = (f64::NEG_INFINITY, vec![], vec![]);
    for perm in permutations(d) {
        for mask in 0..(1u32 << d) {
            let signs: Vec<f64> = (0..d).map(|c| if mask >> c & 1 == 1 { -1.0 } else { 1.0 }).collect();
            let score: f64 = (0..d).map(|c| signs[c] * inner(c, perm[c])).sum();
            if score > best.0 {
                best = (score, perm.clone(), signs);
            }
        }
    }
    (best.1, best.2)
}

#[test]
fn alignment_recovers_signed_permutations_like_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for d in 1..=5 {
        for trial in 0..6 {
            let scales: Vec<f64> = (0..d).map(|k| 1.6f64.powi((d - k) as i32)).collect();
            let x = gaussian(300, d, &scales, 1000 + trial * 10 + d as u64);
            let mut perm: Vec<usize> = (0..d).collect();
            perm.shuffle(&mut rng);
            let signs: Vec<f64> = (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let y = signed_permute(&x, &perm, &signs);

            let (bf_perm, bf_signs) = brute_force_match(&x, &y);
            let e1 = Embedding::new(x.clone());
            let e2 = Embedding::new(y.clone());
            let res = align(&e1, &e2).unwrap();
            let p = res.apply_p(&e1).unwrap();
            let q = res.apply_q(&e2).unwrap();
            assert_eq!(p.coords, q.coords, "d={d} trial={trial}");

            // The implied column map e1 -> e2 must equal the exhaustive optimum.
            for i in 0..d {
                let c1 = res.permutation_p[i];
                let c2 = res.permutation_q[i];
                let s = f64::from(res.signs_p[i] * res.signs_q[i]);
                assert_eq!(bf_perm[c1], c2);
                assert_eq!(bf_signs[c1], s);
            }
        }
    }
}

#[test]
fn alignment_improves_large_noisy_case() {
    let d = 64;
    let n = 500;
    let scales: Vec<f64> = (0..d).map(|k| 3.0 * 0.97f64.powi(k as i32)).collect();
    let x = gaussian(n, d, &scales, 3);
    let noise = gaussian(n, d, &vec![0.6; d], 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let signs: Vec<f64> = (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut y = signed_permute(&x, &perm, &signs);
    for (v, e) in y.as_mut_slice().iter_mut().zip(noise.as_slice()) {
        *v += e;
    }
    let e1 = Embedding::new(x);
    let e2 = Embedding::new(y);
    let res = align(&e1, &e2).unwrap();
    assert!(res.corr_after.diagonal().iter().all(|&c| c >= 0.0));
    assert!(res.corr_after.diagonal_mass() > res.corr_before.diagonal_mass());
    let p = res.apply_p(&e1).unwrap();
    let q = res.apply_q(&e2).unwrap();
    assert!(diagonal_inner_sum(&p, &q).unwrap() >= diagonal_inner_sum(&e1, &e2).unwrap());
}

fn pairwise(b: &PointBatch) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..b.count() {
        for j in 0..i {
            out.push(b.row(i).iter().zip(b.row(j)).map(|(x, y)| (x - y).powi(2)).sum::<f64>());
        }
    }
    out
}

/// Each row's coordinates by magnitude; signed permutations keep these exactly.
fn abs_sorted_rows(b: &PointBatch) -> Vec<Vec<f64>> {
    b.rows()
        .map(|r| {
            let mut v: Vec<f64> = r.iter().map(|x| x.abs()).collect();
            v.sort_by(f64::total_cmp);
            v
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alignment_invariants(seed in 0u64..10_000, d in 2usize..7) {
        let e1 = Embedding::new(gaussian(40, d, &vec![1.0; d], seed));
        let e2 = Embedding::new(gaussian(40, d, &vec![1.0; d], seed + 1));
        let res = align(&e1, &e2).unwrap();
        let p = res.apply_p(&e1).unwrap();
        let q = res.apply_q(&e2).unwrap();
        prop_assert_eq!(abs_sorted_rows(&p.coords), abs_sorted_rows(&e1.coords));
        prop_assert_eq!(abs_sorted_rows(&q.coords), abs_sorted_rows(&e2.coords));
        for (a, b) in pairwise(&p.coords).iter().zip(pairwise(&e1.coords)) {
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
        for (a, b) in pairwise(&q.coords).iter().zip(pairwise(&e2.coords)) {
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
        for k in 0..d {
            let ip: f64 = p.column(k).iter().zip(q.column(k)).map(|(a, b)| a * b).sum();
            prop_assert!(ip >= 0.0);
        }
        prop_assert!(diagonal_inner_sum(&p, &q).unwrap() >= diagonal_inner_sum(&e1, &e2).unwrap() - 1e-9);
    }

    #[test]
    fn metric_bounds(seed in 0u64..10_000) {
        let e1 = Embedding::new(gaussian(30, 4, &[1.0; 4], seed));
        let e2 = Embedding::new(gaussian(30, 4, &[1.0; 4], seed + 7));
        let m = similarity_metrics(&e1, &e2).unwrap();
        prop_assert!((-1.0..=1.0).contains(&m.mean_cosine));
        prop_assert!((0.0..=180.0).contains(&m.mean_angle_deg));
        prop_assert!(m.rms_distance > 0.0);
        prop_assert_eq!(similarity_metrics(&e1, &e1).unwrap().rms_distance, 0.0);
    }
}

#[test]
fn similarity_matches_per_row_oracle() {
    let e1 = Embedding::new(gaussian(1000, 64, &[1.0; 64], 30));
    let e2 = Embedding::new(gaussian(1000, 64, &[1.0; 64], 31));
    let m = similarity_metrics(&e1, &e2).unwrap();
    let (mut d2, mut cs, mut ang) = (0.0, 0.0, 0.0);
    for i in 0..1000 {
        let (a, b) = (e1.coords.row(i), e2.coords.row(i));
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        d2 += a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        cs += dot / (na * nb);
        ang += (dot / (na * nb)).acos() * 180.0 / std::f64::consts::PI;
    }
    assert!((m.rms_distance - (d2 / 1000.0).sqrt()).abs() < 1e-12);
    assert!((m.mean_cosine - cs / 1000.0).abs() < 1e-12);
    assert!((m.mean_angle_deg - ang / 1000.0).abs() < 1e-12);
}

#[test]
fn independent_columns_are_nearly_uncorrelated() {
    let n = 10_000;
    let e1 = Embedding::new(gaussian(n, 5, &[1.0; 5], 40));
    let e2 = Embedding::new(gaussian(n, 5, &[1.0; 5], 41));
    let c = cross_correlation(&e1, &e2).unwrap();
    assert!(c.values.iter().all(|v| v.abs() < 5.0 / (n as f64).sqrt()));
    let own = cross_correlation(&e1, &e1).unwrap();
    assert!(own.diagonal().iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn matched_sampling_reproduces_reference_covariance() {
    let reference = gaussian(20_000, 2, &[3f64.sqrt(), 1.0], 50);
    let s = sample_latents(SampleMode::Matched, Some(&reference), 100_000, 2, 51).unwrap();
    let (_, target) = eccentric::latent::covariance(&reference).unwrap();
    let (_, got) = eccentric::latent::covariance(&s.batch).unwrap();
    assert!((got[0] / target[0] - 1.0).abs() < 0.02);
    assert!((got[3] / target[3] - 1.0).abs() < 0.02);
    assert!(got[1].abs() < 0.02 * target[0]);
    assert!((target[0] - 3.0).abs() < 0.15 && (target[3] - 1.0).abs() < 0.05);
}

#[test]
fn identity_decoder_components() {
    let x = gaussian(300, 3, &[2.0, 1.0, 0.5], 60);
    let rep = spectrum(&x).unwrap();
    let pairs = decode_eigen_components(&IdentityDecoder(3), &rep, 1.5).unwrap();
    assert_eq!(pairs.len(), 3);
    for pair in &pairs {
        let v = rep.eigenvector(pair.component);
        let s = 1.5 * rep.eigenvalues[pair.component].sqrt();
        for i in 0..3 {
            assert_eq!(pair.plus[i], rep.mean[i] + s * v[i]);
            assert_eq!(pair.minus[i], rep.mean[i] - s * v[i]);
        }
    }
}

/// Independent majority vote using the same tie rules, with a full sort per query.
fn knn_oracle(train: &PointBatch, labels: &[u32], query: &[f64], k: usize) -> u32 {
    let mut all: Vec<(f64, usize)> = (0..train.count())
        .map(|i| {
            let d: f64 = train.row(i).iter().zip(query).map(|(a, b)| (a - b).powi(2)).sum();
            (d.sqrt(), i)
        })
        .collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = (0u32, 0usize, f64::INFINITY);
    let mut seen: Vec<u32> = all[..k].iter().map(|&(_, i)| labels[i]).collect();
    seen.sort_unstable();
    seen.dedup();
    for label in seen {
        let hits: Vec<f64> = all[..k].iter().filter(|&&(_, i)| labels[i] == label).map(|&(d, _)| d).collect();
        let (count, dist) = (hits.len(), hits.iter().sum::<f64>());
        if count > best.1 || (count == best.1 && dist < best.2) {
            best = (label, count, dist);
        }
    }
    best.0
}

#[test]
fn knn_matches_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let train = gaussian(200, 4, &[1.0; 4], 71);
    let labels: Vec<u32> = (0..200).map(|_| rng.random_range(0..3)).collect();
    let test = gaussian(80, 4, &[1.0; 4], 72);
    let res = knn_classify(&train, &labels, &test, 5, None).unwrap();
    for (q, &p) in res.predictions.iter().enumerate() {
        assert_eq!(p, knn_oracle(&train, &labels, test.row(q), 5), "query {q}");
    }
    let self_check = knn_classify(&train, &labels, &train, 1, Some(&labels)).unwrap();
    assert_eq!(self_check.error_rate, Some(0.0));
}

#[test]
fn knn_identical_across_thread_counts() {
    let train = gaussian(300, 6, &[1.0; 6], 80);
    let labels: Vec<u32> = (0..300).map(|i| (i % 4) as u32).collect();
    let test = gaussian(100, 6, &[1.0; 6], 81);
    let run = |t: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .unwrap()
            .install(|| knn_classify(&train, &labels, &test, 7, None).unwrap().predictions)
    };
    assert_eq!(run(1), run(6));
}
