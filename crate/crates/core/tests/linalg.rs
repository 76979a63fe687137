mod common;

use common::*;
use kbz_core::linalg::{
    block_sigma_max_sq, compute_spectral_bounds, load_vector, partition_uniform, sample_block,
    save_vector, Partition,
};
use kbz_core::{Axis, DenseMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn block_sigma_max_matches_jacobi_oracle() {
    let mut r = rng(11);
    for _ in 0..10 {
        let a = random_matrix(&mut r, 5, 3);
        let got = block_sigma_max_sq(&a, 0..5, Axis::Rows).unwrap();
        let want = oracle_singular_values(&rows_of(&a))[0].powi(2);
        assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
    }
}

#[test]
fn block_sigma_max_trivial_cases() {
    let a = DenseMatrix::from_rows(&[vec![3.0, 4.0], vec![1.0, 0.0]]).unwrap();
    assert!((block_sigma_max_sq(&a, 0..1, Axis::Rows).unwrap() - 25.0).abs() < 1e-12);
    let i = DenseMatrix::identity(6).unwrap();
    assert!((block_sigma_max_sq(&i, 2..5, Axis::Rows).unwrap() - 1.0).abs() < 1e-12);
    let z = DenseMatrix::new(3, 2, vec![0.0; 6]).unwrap();
    assert_eq!(block_sigma_max_sq(&z, 0..2, Axis::Columns).unwrap(), 0.0);
    assert!(block_sigma_max_sq(&a, 1..1, Axis::Rows).is_err());
}

#[test]
fn spectral_bounds_match_per_block_oracle() {
    let mut r = rng(20);
    let a = random_matrix(&mut r, 20, 10);
    let rows = Partition::for_matrix(&a, 5, Axis::Rows).unwrap();
    let cols = Partition::for_matrix(&a, 5, Axis::Columns).unwrap();
    let bounds = compute_spectral_bounds(&a, &rows, &cols).unwrap();
    let full = rows_of(&a);

    let mut beta_rows = 0.0_f64;
    let mut beta_min = f64::INFINITY;
    for blk in rows.blocks() {
        let sub = full[blk.clone()].to_vec();
        beta_rows = beta_rows.max(oracle_beta(&sub));
        let frob: f64 = sub.iter().flatten().map(|v| v * v).sum();
        beta_min = beta_min.min(oracle_sigma_min_nonzero(&sub).unwrap().powi(2) / frob);
    }
    let mut beta_cols = 0.0_f64;
    for blk in cols.blocks() {
        beta_cols = beta_cols.max(oracle_beta(&column_block(&full, blk.clone())));
    }
    assert!((bounds.beta_max_rows - beta_rows).abs() <= 1e-8 * beta_rows);
    assert!((bounds.beta_max_cols - beta_cols).abs() <= 1e-8 * beta_cols);
    assert!((bounds.beta_min_rows - beta_min).abs() <= 1e-8 * beta_min);
}

#[test]
fn spectral_bounds_trivial_cases() {
    let i = DenseMatrix::identity(6).unwrap();
    let rows = Partition::for_matrix(&i, 2, Axis::Rows).unwrap();
    let cols = Partition::for_matrix(&i, 2, Axis::Columns).unwrap();
    let b = compute_spectral_bounds(&i, &rows, &cols).unwrap();
    assert!((b.beta_max_rows - 0.5).abs() < 1e-12);

    let mut r = rng(3);
    let a = random_matrix(&mut r, 7, 4);
    let rows = Partition::for_matrix(&a, 1, Axis::Rows).unwrap();
    let cols = Partition::for_matrix(&a, 1, Axis::Columns).unwrap();
    let b = compute_spectral_bounds(&a, &rows, &cols).unwrap();
    assert!((b.beta_max_rows - 1.0).abs() < 1e-12);
    assert!((b.beta_max_cols - 1.0).abs() < 1e-12);
    // A column partition passed as the row partition is rejected.
    assert!(compute_spectral_bounds(&a, &cols, &rows).is_err());
}

#[test]
fn partition_examples() {
    let p = partition_uniform(10, 3, Axis::Rows).unwrap();
    assert_eq!(p.blocks(), &[0..3, 3..6, 6..9, 9..10]);
    assert_eq!(
        partition_uniform(5, 5, Axis::Rows).unwrap().blocks(),
        &[0..5]
    );
    assert_eq!(partition_uniform(7, 1, Axis::Columns).unwrap().len(), 7);
    assert!(partition_uniform(5, 0, Axis::Rows).is_err());
    assert!(partition_uniform(5, 6, Axis::Rows).is_err());
    assert!(partition_uniform(0, 1, Axis::Rows).is_err());
}

fn weighted_rows(weights: &[f64]) -> Partition {
    let rows: Vec<Vec<f64>> = weights.iter().map(|w| vec![w.sqrt()]).collect();
    let a = DenseMatrix::from_rows(&rows).unwrap();
    Partition::for_matrix(&a, 1, Axis::Rows).unwrap()
}

fn counts(p: &Partition, draws: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![0; p.len()];
    for _ in 0..draws {
        c[sample_block(p, &mut rng).unwrap()] += 1;
    }
    c
}

fn chi_square(counts: &[usize], probs: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    counts
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn sampling_single_block_and_equal_weights() {
    let p = weighted_rows(&[2.0]);
    assert!(counts(&p, 100, 1).iter().all(|&c| c == 100));
    let p = weighted_rows(&[1.0, 1.0]);
    let c = counts(&p, 10_000, 2);
    for k in c {
        let f = k as f64 / 1e4;
        assert!((0.47..=0.53).contains(&f), "{f}");
    }
}

#[test]
fn sampling_one_to_three_weights() {
    let p = weighted_rows(&[1.0, 3.0]);
    let c = counts(&p, 10_000, 3);
    assert!((c[0] as f64 / 1e4 - 0.25).abs() <= 0.02);
    assert!((c[1] as f64 / 1e4 - 0.75).abs() <= 0.02);
    assert!(chi_square(&c, &[0.25, 0.75]) < chi2_critical_001(1));
}

#[test]
fn sampling_follows_frobenius_weights() {
    let mut r = rng(4);
    let a = random_matrix(&mut r, 23, 6);
    let p = Partition::for_matrix(&a, 4, Axis::Rows).unwrap();
    let probs: Vec<f64> = (0..p.len()).map(|i| p.probability(i)).collect();
    let c = counts(&p, 100_000, 5);
    assert!(chi_square(&c, &probs) < chi2_critical_001(p.len() - 1));
}

#[test]
fn sampling_is_deterministic_and_rejects_zero_matrix() {
    let p = weighted_rows(&[1.0, 2.0, 3.0]);
    assert_eq!(counts(&p, 500, 9), counts(&p, 500, 9));
    let z = DenseMatrix::new(2, 2, vec![0.0; 4]).unwrap();
    let p = Partition::for_matrix(&z, 1, Axis::Rows).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(sample_block(&p, &mut rng).is_err());
}

#[test]
fn negligible_blocks_are_never_drawn() {
    let a = DenseMatrix::from_rows(&[vec![1.0], vec![1e-200], vec![1.0]]).unwrap();
    let p = Partition::for_matrix(&a, 1, Axis::Rows).unwrap();
    assert_eq!(p.weight(1), 0.0);
    assert_eq!(counts(&p, 5000, 1)[1], 0);
}

#[test]
fn matrix_and_vector_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(8);
    let a = random_matrix(&mut r, 4, 3);
    let path = dir.path().join("a.txt");
    a.save(&path).unwrap();
    assert_eq!(DenseMatrix::load(&path).unwrap(), a);
    let v = random_vec(&mut r, 5);
    let vp = dir.path().join("v.txt");
    save_vector(&vp, &v).unwrap();
    assert_eq!(load_vector(&vp).unwrap(), v);
    assert!(load_vector(&path).is_err());
    std::fs::write(&path, "2 2\n1 2\n3\n").unwrap();
    assert!(matches!(
        DenseMatrix::load(&path),
        Err(kbz_core::Error::Parse { line: 3, .. })
    ));
}

fn matrix_strategy() -> impl Strategy<Value = DenseMatrix> {
    (1usize..9, 1usize..9).prop_flat_map(|(m, n)| {
        prop::collection::vec(-3.0f64..3.0, m * n)
            .prop_map(move |data| DenseMatrix::new(m, n, data).unwrap())
    })
}

proptest! {
    #[test]
    fn partition_covers_disjointly(extent in 1usize..60, tau_seed in 0usize..1000) {
        let tau = 1 + tau_seed % extent;
        let p = partition_uniform(extent, tau, Axis::Rows).unwrap();
        let mut next = 0;
        for (i, b) in p.blocks().iter().enumerate() {
            prop_assert_eq!(b.start, next);
            prop_assert!(!b.is_empty());
            if i + 1 < p.len() {
                prop_assert_eq!(b.len(), tau);
            } else {
                prop_assert!(b.len() <= tau);
            }
            next = b.end;
        }
        prop_assert_eq!(next, extent);
    }

    #[test]
    fn block_weights_sum_to_frobenius(a in matrix_strategy(), tau_seed in 0usize..100) {
        for axis in [Axis::Rows, Axis::Columns] {
            let tau = 1 + tau_seed % a.extent(axis);
            let p = Partition::for_matrix(&a, tau, axis).unwrap();
            let total: f64 = p.weights().iter().sum();
            prop_assert!((total - a.frob_sq()).abs() <= 1e-12 * a.frob_sq().max(1e-300));
        }
    }

    #[test]
    fn sigma_max_between_frobenius_bounds(a in matrix_strategy(), tau_seed in 0usize..100) {
        for axis in [Axis::Rows, Axis::Columns] {
            let tau = 1 + tau_seed % a.extent(axis);
            let p = Partition::for_matrix(&a, tau, axis).unwrap();
            for (i, blk) in p.blocks().iter().enumerate() {
                let s = block_sigma_max_sq(&a, blk.clone(), axis).unwrap();
                let f = p.weight(i);
                prop_assert!(s <= f * (1.0 + 1e-10) + 1e-300);
                prop_assert!(f <= blk.len() as f64 * s * (1.0 + 1e-10) + 1e-300);
            }
        }
    }
}
