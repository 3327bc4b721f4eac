#![allow(clippy::needless_range_loop)]

//! Property tests for the kernel and dataset invariants.

use proptest::prelude::*;
use randcca::dense::DenseMatrix;
use randcca::matkernels::{cholesky, orthonormalize, svd_truncated, whiten_cross};
use randcca::rng::SeededRng;
use randcca::twoview::{hash_tokens, SparseVec, TwoViewDataset, View};

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut SeededRng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.next_gaussian())
}

fn dense_rows(m: &DenseMatrix) -> Vec<SparseVec> {
    (0..m.rows())
        .map(|i| SparseVec::from_pairs((0..m.cols()).map(|j| (j as u32, m.at(i, j))).collect()))
        .collect()
}

fn centered_dense(m: &DenseMatrix) -> DenseMatrix {
    let n = m.rows();
    let mut mu = vec![0.0; m.cols()];
    for j in 0..m.cols() {
        mu[j] = m.col(j).iter().sum::<f64>() / n as f64;
    }
    DenseMatrix::from_fn(n, m.cols(), |i, j| m.at(i, j) - mu[j])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn orthonormalize_invariants(seed in 0u64..1000, n in 1usize..30, k in 1usize..10) {
        let mut rng = SeededRng::new(seed);
        let m = gaussian_matrix(n, k, &mut rng);
        let q = orthonormalize(&m).unwrap();
        let r = q.cols();
        prop_assert!(r >= 1 && r <= k.min(n));
        let qtq = q.tr_mul(&q);
        prop_assert!(qtq.max_abs_diff(&DenseMatrix::identity(r)) <= 1e-12);
        let resid = m.sub(&q.mul(&q.tr_mul(&m))).frobenius_norm();
        prop_assert!(resid <= 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn cholesky_reconstructs_spd(seed in 0u64..1000, k in 1usize..10) {
        let mut rng = SeededRng::new(seed);
        let r = gaussian_matrix(k + 2, k, &mut rng);
        let s = r.tr_mul(&r).add(&DenseMatrix::identity(k).scaled(0.1));
        let l = cholesky(&s).unwrap();
        let err = l.mul(&l.transpose()).sub(&s).frobenius_norm();
        prop_assert!(err <= 1e-10 * s.frobenius_norm());
    }

    #[test]
    fn svd_values_invariant_under_orthogonal_factors(
        seed in 0u64..1000, m in 2usize..9, n in 2usize..9,
    ) {
        let mut rng = SeededRng::new(seed);
        let f = gaussian_matrix(m, n, &mut rng);
        let k = m.min(n);
        let (_, s0, _) = svd_truncated(&f, k).unwrap();

        let qm = orthonormalize(&gaussian_matrix(m, m, &mut rng)).unwrap();
        let qn = orthonormalize(&gaussian_matrix(n, n, &mut rng)).unwrap();
        prop_assume!(qm.cols() == m && qn.cols() == n);
        let rotated = qm.mul(&f).mul(&qn.transpose());
        let (_, s1, _) = svd_truncated(&rotated, k).unwrap();
        for (a, b) in s0.iter().zip(&s1) {
            prop_assert!((a - b).abs() <= 1e-10 * s0[0].max(1.0));
        }
    }

    #[test]
    fn whiten_cross_roundtrip(seed in 0u64..1000, ka in 1usize..7, kb in 1usize..7) {
        let mut rng = SeededRng::new(seed);
        let f = gaussian_matrix(ka, kb, &mut rng);
        let spd = |k: usize, rng: &mut SeededRng| {
            let r = gaussian_matrix(k + 1, k, rng);
            r.tr_mul(&r).add(&DenseMatrix::identity(k))
        };
        let la = cholesky(&spd(ka, &mut rng)).unwrap();
        let lb = cholesky(&spd(kb, &mut rng)).unwrap();
        let w = whiten_cross(&f, &la, &lb).unwrap();
        let back = la.transpose().mul(&w).mul(&lb);
        prop_assert!(back.max_abs_diff(&f) <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn split_partitions_with_exact_sizes(
        n in 1usize..60, numer in 1usize..100, seed in 0u64..1000,
    ) {
        let fraction = numer as f64 / 100.0;
        let mut rng = SeededRng::new(seed);
        let a = gaussian_matrix(n, 3, &mut rng);
        let b = gaussian_matrix(n, 2, &mut rng);
        let ds = TwoViewDataset::from_rows(dense_rows(&a), dense_rows(&b), 3, 2).unwrap();
        let want_train = (n as f64 * fraction).round() as usize;
        match ds.split(fraction, seed) {
            Err(_) => prop_assert_eq!(want_train, 0),
            Ok((train, test)) => {
                prop_assert_eq!(train.n(), want_train.min(n));
                prop_assert_eq!(train.n() + test.n(), n);
                // partition: every original row appears exactly once
                let mut seen: Vec<Vec<f64>> = train
                    .rows(View::A)
                    .iter()
                    .chain(test.rows(View::A))
                    .map(|r| r.values().to_vec())
                    .collect();
                let mut orig: Vec<Vec<f64>> = ds
                    .rows(View::A)
                    .iter()
                    .map(|r| r.values().to_vec())
                    .collect();
                let key = |v: &Vec<f64>| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
                seen.sort_by_key(key);
                orig.sort_by_key(key);
                prop_assert_eq!(seen, orig);
            }
        }
    }

    #[test]
    fn centering_equivalence_on_all_pass_ops(
        seed in 0u64..500, n in 2usize..40, d_a in 1usize..10, d_b in 1usize..10, m in 1usize..5,
    ) {
        let mut rng = SeededRng::new(seed);
        let a = gaussian_matrix(n, d_a, &mut rng);
        let b = gaussian_matrix(n, d_b, &mut rng);
        let ds = TwoViewDataset::from_rows(dense_rows(&a), dense_rows(&b), d_a, d_b).unwrap();
        let ds_centered = TwoViewDataset::from_rows(
            dense_rows(&centered_dense(&a)),
            dense_rows(&centered_dense(&b)),
            d_a,
            d_b,
        )
        .unwrap();

        let qa = gaussian_matrix(d_a, m, &mut rng);
        let qb = gaussian_matrix(d_b, m, &mut rng);

        let (ya1, yb1) = ds.pass_crossprod(&qa, &qb, true).unwrap();
        let (ya2, yb2) = ds_centered.pass_crossprod(&qa, &qb, false).unwrap();
        prop_assert!(ya1.max_abs_diff(&ya2) <= 1e-10);
        prop_assert!(yb1.max_abs_diff(&yb2) <= 1e-10);

        let (ca1, cb1, f1) = ds.pass_final(&qa, &qb, true).unwrap();
        let (ca2, cb2, f2) = ds_centered.pass_final(&qa, &qb, false).unwrap();
        prop_assert!(ca1.max_abs_diff(&ca2) <= 1e-10);
        prop_assert!(cb1.max_abs_diff(&cb2) <= 1e-10);
        prop_assert!(f1.max_abs_diff(&f2) <= 1e-10);

        let g1 = ds.pass_gram_apply(View::A, &qa, 0.3, true).unwrap();
        let g2 = ds_centered.pass_gram_apply(View::A, &qa, 0.3, false).unwrap();
        prop_assert!(g1.max_abs_diff(&g2) <= 1e-10);

        let o1 = ds.objective(&qa, &qb, true).unwrap();
        let o2 = ds_centered.objective(&qa, &qb, false).unwrap();
        prop_assert!((o1 - o2).abs() <= 1e-10);
    }

    #[test]
    fn stats_recompute_matches(seed in 0u64..500, n in 0usize..30) {
        let mut rng = SeededRng::new(seed);
        let a = gaussian_matrix(n, 4, &mut rng);
        let b = gaussian_matrix(n, 3, &mut rng);
        let ds = TwoViewDataset::from_rows(dense_rows(&a), dense_rows(&b), 4, 3).unwrap();
        let rebuilt = TwoViewDataset::from_rows(
            ds.rows(View::A).to_vec(),
            ds.rows(View::B).to_vec(),
            4,
            3,
        )
        .unwrap();
        prop_assert_eq!(
            ds.stats().trace(View::A).to_bits(),
            rebuilt.stats().trace(View::A).to_bits()
        );
        for (x, y) in ds.stats().mu(View::B).iter().zip(rebuilt.stats().mu(View::B)) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}

/// Hashing preserves inner products in expectation: the mean over many hash
/// seeds of ⟨hash(u), hash(v)⟩ approaches the exact bag-of-words inner
/// product.
#[test]
fn hashing_preserves_inner_products_in_expectation() {
    let hash_bits = 19;
    let n_seeds = 120;
    let mut rng = SeededRng::new(99);

    let vocab: Vec<String> = (0..60).map(|i| format!("tok{i}")).collect();
    for pair in 0..8 {
        // random multisets with overlap, ≤ 100 tokens
        let draw = |rng: &mut SeededRng| -> Vec<&str> {
            let len = 20 + rng.next_below(70);
            (0..len)
                .map(|_| vocab[rng.next_below(vocab.len())].as_str())
                .collect()
        };
        let u_tokens = draw(&mut rng);
        let v_tokens = draw(&mut rng);

        // exact bag-of-words inner product
        fn counts<'a>(toks: &[&'a str]) -> std::collections::HashMap<&'a str, f64> {
            let mut m = std::collections::HashMap::new();
            for t in toks {
                *m.entry(*t).or_insert(0.0) += 1.0;
            }
            m
        }
        let cu = counts(&u_tokens);
        let cv = counts(&v_tokens);
        let exact: f64 = cu
            .iter()
            .map(|(t, a)| a * cv.get(t).copied().unwrap_or(0.0))
            .sum();
        let norm_u: f64 = cu.values().map(|a| a * a).sum::<f64>().sqrt();
        let norm_v: f64 = cv.values().map(|a| a * a).sum::<f64>().sqrt();

        let mut mean = 0.0;
        for seed in 0..n_seeds {
            let hu = hash_tokens(u_tokens.iter().copied(), hash_bits, seed);
            let hv = hash_tokens(v_tokens.iter().copied(), hash_bits, seed);
            mean += hu.dot(&hv);
        }
        mean /= n_seeds as f64;

        if exact == 0.0 {
            assert!(
                mean.abs() <= 0.05 * norm_u * norm_v,
                "pair {pair}: |mean| {mean} vs bound {}",
                0.05 * norm_u * norm_v
            );
        } else {
            assert!(
                (mean - exact).abs() <= 0.05 * exact.abs(),
                "pair {pair}: mean {mean} vs exact {exact}"
            );
        }
    }
}

/// Repeated sweeps produce bit-identical accumulators.
#[test]
fn passes_are_bit_reproducible() {
    let mut rng = SeededRng::new(5);
    let a = gaussian_matrix(300, 7, &mut rng);
    let b = gaussian_matrix(300, 6, &mut rng);
    let ds = TwoViewDataset::from_rows(dense_rows(&a), dense_rows(&b), 7, 6).unwrap();
    let qa = gaussian_matrix(7, 3, &mut rng);
    let qb = gaussian_matrix(6, 3, &mut rng);
    let (ya1, yb1) = ds.pass_crossprod(&qa, &qb, true).unwrap();
    let (ya2, yb2) = ds.pass_crossprod(&qa, &qb, true).unwrap();
    assert_eq!(
        ya1.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        ya2.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    assert_eq!(
        yb1.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        yb2.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}
