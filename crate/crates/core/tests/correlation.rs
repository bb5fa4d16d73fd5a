mod common;

use indeptest::correlation::{correlation_summary, sample_null_correlations, DataMatrix};
use indeptest::rng::{substream, NormalSampler};
use proptest::prelude::*;

fn gaussian_matrix(n: usize, p: usize, seed: u64) -> DataMatrix<f64> {
    let mut rng = substream(seed, 0);
    let mut v = vec![0.0; n * p];
    NormalSampler::new().fill(&mut rng, &mut v);
    DataMatrix::from_columns(n, p, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn location_scale_invariance(
        seed in any::<u64>(),
        n in 5usize..40,
        p in 2usize..8,
        shifts in prop::collection::vec(-1e3f64..1e3, 8),
        scales in prop::collection::vec(prop_oneof![-50.0f64..-0.01, 0.01f64..50.0], 8),
    ) {
        let x = gaussian_matrix(n, p, seed);
        let base = correlation_summary(&x).unwrap();
        let mut v = x.as_column_major().to_vec();
        for (j, col) in v.chunks_exact_mut(n).enumerate() {
            for e in col.iter_mut() {
                *e = scales[j] * *e + shifts[j];
            }
        }
        let moved = correlation_summary(&DataMatrix::from_columns(n, p, v).unwrap()).unwrap();
        for ((i, j, r), s) in base.pairs().zip(moved.offdiag()) {
            let sign = (scales[i] * scales[j]).signum();
            prop_assert!((sign * r - s).abs() < 1e-9, "pair ({}, {}): {} vs {}", i, j, r, s);
        }
    }

    #[test]
    fn permutation_equivariance(seed in any::<u64>(), n in 4usize..30, perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
        let p = 6;
        let x = gaussian_matrix(n, p, seed);
        let base = correlation_summary(&x).unwrap();
        let mut v = Vec::with_capacity(n * p);
        for &j in &perm {
            v.extend_from_slice(x.column(j));
        }
        let permuted = correlation_summary(&DataMatrix::from_columns(n, p, v).unwrap()).unwrap();
        for i in 0..p {
            for j in 0..p {
                prop_assert!((permuted.get(i, j) - base.get(perm[i], perm[j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn correlations_are_bounded(seed in any::<u64>(), n in 3usize..20, p in 2usize..10) {
        let c = correlation_summary(&gaussian_matrix(n, p, seed)).unwrap();
        prop_assert!(c.offdiag().iter().all(|r| r.abs() <= 1.0));
        let s = sample_null_correlations::<f64, _>(n, p, &mut substream(seed, 1)).unwrap();
        prop_assert!(s.offdiag().iter().all(|r| r.abs() <= 1.0));
    }
}

#[test]
fn sphere_and_data_paths_share_a_null_law() {
    let (n, reps) = (10usize, 10_000u64);
    let sphere: Vec<f64> = (0..reps)
        .map(|i| sample_null_correlations::<f64, _>(n, 2, &mut substream(11, i)).unwrap().offdiag()[0])
        .collect();
    let data: Vec<f64> = (0..reps)
        .map(|i| correlation_summary(&gaussian_matrix(n, 2, 1_000_000 + i)).unwrap().offdiag()[0])
        .collect();
    // two-sample 1% critical value is 1.63 sqrt(2 / reps) = 0.023
    let d = common::ks_two_sample(&sphere, &data);
    assert!(d < 0.023, "KS distance {d}");
}

#[test]
fn squared_correlation_moments_agree_across_paths() {
    for n in [10usize, 30] {
        let reps = 20_000u64;
        let p = 4;
        let sphere: Vec<f64> = (0..reps)
            .map(|i| {
                let c = sample_null_correlations::<f64, _>(n, p, &mut substream(21, i)).unwrap();
                c.offdiag().iter().map(|r| r * r).sum::<f64>()
            })
            .collect();
        let data: Vec<f64> = (0..reps)
            .map(|i| correlation_summary(&gaussian_matrix(n, p, 2_000_000 + i)).unwrap().offdiag().iter().map(|r| r * r).sum())
            .collect();
        let (ms, ses) = common::mean_se(&sphere);
        let (md, sed) = common::mean_se(&data);
        let want = 6.0 / (n as f64 - 1.0);
        assert!((ms - md).abs() < 3.0 * (ses * ses + sed * sed).sqrt(), "n={n}: {ms} vs {md}");
        assert!((ms - want).abs() < 3.0 * ses);
        assert!((md - want).abs() < 3.0 * sed);
    }
}
