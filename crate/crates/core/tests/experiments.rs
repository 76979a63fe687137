mod common;

use std::io::Write as _;

use common::*;
use kbz_core::experiments::{
    generate_gaussian, generate_structured, generate_structured_with_spectrum, load_mnist_image,
    nullspace_noise, plant_sparse_solution, pseudo_inverse_solution, psnr, relative_error,
    run_benchmark, InstanceSpec, MatrixSource, SuiteConfig,
};
use kbz_core::linalg::vector::norm;
use kbz_core::{run, DenseMatrix, Error, Method, ProblemKind, SolverConfig};

#[test]
fn gaussian_entry_statistics() {
    let a = generate_gaussian(200, 200, 1).unwrap();
    let n = a.data().len() as f64;
    let mean = a.data().iter().sum::<f64>() / n;
    let var = a.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() <= 0.02, "{mean}");
    assert!((0.95..=1.05).contains(&var), "{var}");
    assert_eq!(a, generate_gaussian(200, 200, 1).unwrap());
}

#[test]
fn structured_spectrum_is_the_drawn_diagonal() {
    let (a, mut d) = generate_structured_with_spectrum(30, 20, 15, 10.0, 5).unwrap();
    d.sort_by(|x, y| y.total_cmp(x));
    let sv = oracle_singular_values(&rows_of(&a));
    for (k, want) in d.iter().enumerate() {
        assert!(
            (sv[k] - want).abs() <= 1e-8,
            "sigma_{k}: {} vs {want}",
            sv[k]
        );
        assert!((1.0..10.0).contains(want));
    }
    for s in &sv[15..] {
        assert!(*s <= 1e-10 * sv[0]);
    }
    assert_eq!(a, generate_structured(30, 20, 15, 10.0, 5).unwrap());
}

#[test]
fn planted_supports_vary_with_seed() {
    let supports: Vec<Vec<usize>> = (0..20)
        .map(|s| {
            let x = plant_sparse_solution(1000, 0.01, s).unwrap();
            (0..1000).filter(|&j| x[j] != 0.0).collect()
        })
        .collect();
    assert!(supports.iter().all(|s| s.len() == 10));
    let distinct = supports
        .iter()
        .enumerate()
        .filter(|(i, s)| supports[..*i].iter().all(|t| t != *s))
        .count();
    assert_eq!(distinct, 20);
    assert_eq!(
        plant_sparse_solution(50, 0.01, 3)
            .unwrap()
            .iter()
            .filter(|v| **v != 0.0)
            .count(),
        1
    );
}

#[test]
fn noise_lies_in_the_left_null_space() {
    let a = generate_gaussian(20, 8, 2).unwrap();
    let rows = rows_of(&a);
    let y = a.mul_vec(&[0.5; 8]);
    let e = nullspace_noise(&a, &y, 5.0, 2).unwrap();
    // Independent check: e must be orthogonal to every column.
    for j in 0..8 {
        let c: f64 = (0..20).map(|i| rows[i][j] * e[i]).sum();
        assert!(c.abs() <= 1e-8 * a.frob_sq().sqrt() * norm(&e));
    }
    assert!((norm(&e) - 5.0 * norm(&y)).abs() <= 1e-10 * 5.0 * norm(&y));
    // Projecting b = y + e with the oracle pseudo-inverse recovers y.
    let b: Vec<f64> = y.iter().zip(&e).map(|(u, v)| u + v).collect();
    let x = oracle_pinv_solve(&rows, &b, 1e-12);
    assert!(max_abs_diff(&a.mul_vec(&x), &y) <= 1e-9 * norm(&y));
    assert!(matches!(
        nullspace_noise(&generate_gaussian(4, 6, 1).unwrap(), &[1.0; 4], 1.0, 1),
        Err(Error::NoNoisePossible { .. })
    ));
}

#[test]
fn pseudo_inverse_matches_svd_oracle() {
    let mut r = rng(12);
    for (m, n) in [(10, 6), (6, 10), (8, 8)] {
        let a = random_matrix(&mut r, m, n);
        let b = random_vec(&mut r, m);
        let got = pseudo_inverse_solution(&a, &b).unwrap();
        let want = oracle_pinv_solve(&rows_of(&a), &b, 1e-12);
        assert!(rel_err(&got, &want) <= 1e-8, "{m}x{n}");
    }
    // Rank-deficient: duplicated column; the minimum-norm solution splits evenly.
    let a = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0], vec![0.0, 0.0]]).unwrap();
    let x = pseudo_inverse_solution(&a, &[1.0, 2.0, 5.0]).unwrap();
    assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);
    assert!(
        pseudo_inverse_solution(&DenseMatrix::new(2, 2, vec![0.0; 4]).unwrap(), &[1.0, 1.0])
            .is_err()
    );
}

#[test]
fn pseudo_inverse_is_least_squares_with_minimal_norm() {
    let mut r = rng(13);
    let base = random_matrix(&mut r, 10, 4);
    // 10 x 6 with rank 4: the last two columns repeat earlier ones.
    let rows: Vec<Vec<f64>> = rows_of(&base)
        .into_iter()
        .map(|row| {
            let mut v = row.clone();
            v.push(row[0] - row[1]);
            v.push(2.0 * row[3]);
            v
        })
        .collect();
    let a = DenseMatrix::from_rows(&rows).unwrap();
    let b = random_vec(&mut r, 10);
    let x = pseudo_inverse_solution(&a, &b).unwrap();
    let res = |x: &[f64]| {
        norm(
            &a.mul_vec(x)
                .iter()
                .zip(&b)
                .map(|(u, v)| u - v)
                .collect::<Vec<_>>(),
        )
    };
    let base_res = res(&x);
    // Null-space directions keep the residual and strictly increase the norm.
    let null_dirs = [
        vec![1.0, -1.0, 0.0, 0.0, -1.0, 0.0],
        vec![0.0, 0.0, 0.0, 2.0, 0.0, -1.0],
    ];
    for d in &null_dirs {
        for t in [-0.3, -0.01, 0.01, 0.3] {
            let y: Vec<f64> = x.iter().zip(d).map(|(u, v)| u + t * v).collect();
            assert!((res(&y) - base_res).abs() <= 1e-10);
            assert!(norm(&y) > norm(&x));
        }
    }
    // Generic perturbations do not reduce the residual.
    for k in 0..6 {
        for t in [-1e-3, 1e-3] {
            let mut y = x.clone();
            y[k] += t;
            assert!(res(&y) >= base_res - 1e-12);
        }
    }
}

#[test]
fn metrics_examples() {
    assert_eq!(relative_error(&[3.0, 4.0], &[3.0, 4.0]), 0.0);
    assert_eq!(relative_error(&[0.0, 0.0], &[3.0, 4.0]), 1.0);
    assert!((relative_error(&[3.0, 0.0], &[3.0, 4.0]) - 0.8).abs() < 1e-15);
    assert_eq!(relative_error(&[3.0, 4.0], &[0.0, 0.0]), 5.0);
    assert_eq!(psnr(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), f64::INFINITY);
    assert!(psnr(&[0.0, 0.0], &[1.0, 0.0]).unwrap().abs() < 1e-12);
    assert!((psnr(&[0.9, 0.0], &[1.0, 0.0]).unwrap() - 20.0).abs() < 1e-9);
    assert!(psnr(&[1.0], &[0.0]).is_err());
}

fn idx3(magic: u32, dims: [u32; 3], data: &[u8]) -> Vec<u8> {
    let mut v = magic.to_be_bytes().to_vec();
    for d in dims {
        v.extend_from_slice(&d.to_be_bytes());
    }
    v.extend_from_slice(data);
    v
}

#[test]
fn mnist_files_load_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let data: Vec<u8> = (0..2 * 784).map(|k| (k % 256) as u8).collect();
    let path = dir.path().join("images.idx3-ubyte");
    std::fs::File::create(&path)
        .unwrap()
        .write_all(&idx3(2051, [2, 28, 28], &data))
        .unwrap();
    for index in 0..2 {
        let img = load_mnist_image(&path, index).unwrap();
        assert_eq!(img.len(), 784);
        assert!(img.iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(img[1], data[index * 784 + 1] as f64 / 255.0);
    }
    assert!(matches!(
        load_mnist_image(&path, 2),
        Err(Error::InvalidArgument(_))
    ));

    std::fs::write(&path, idx3(2049, [2, 28, 28], &data)).unwrap();
    assert!(matches!(
        load_mnist_image(&path, 0),
        Err(Error::Format { offset: 0, .. })
    ));
    std::fs::write(&path, idx3(2051, [2, 28, 28], &data[..900])).unwrap();
    assert!(matches!(
        load_mnist_image(&path, 1),
        Err(Error::Format { .. })
    ));
    std::fs::write(&path, idx3(2051, [1, 8, 8], &[0; 64])).unwrap();
    assert!(load_mnist_image(&path, 0).is_err());
}

#[test]
fn instances_honor_the_noise_contract() {
    for (source, kind) in [
        (
            MatrixSource::Gaussian,
            ProblemKind::SparseLeastSquares { lambda: 5.0 },
        ),
        (
            MatrixSource::Structured {
                rank: 12,
                kappa: 10.0,
            },
            ProblemKind::MinNormLeastSquares,
        ),
    ] {
        let spec = InstanceSpec::new(source, 30, 20, kind);
        let p = spec.build(3).unwrap();
        assert!(p.noise_applied);
        let y = p.y_hat.clone().unwrap();
        let e: Vec<f64> = p.b.iter().zip(&y).map(|(b, y)| b - y).collect();
        assert!(norm(&p.matrix.tr_mul_vec(&e)) <= 1e-8 * p.matrix.frob_sq().sqrt() * norm(&e));
        assert!((norm(&e) - 5.0 * norm(&y)).abs() <= 1e-10 * 5.0 * norm(&y));
    }
    // Wide matrices have no left null space: the data stay consistent.
    let spec = InstanceSpec::new(
        MatrixSource::Gaussian,
        10,
        20,
        ProblemKind::MinNormLeastSquares,
    );
    let p = spec.build(1).unwrap();
    assert!(!p.noise_applied);
    assert!(max_abs_diff(&p.b, p.y_hat.as_ref().unwrap()) <= 1e-12 * norm(&p.b));
}

#[test]
fn sparse_runs_recover_the_planted_support() {
    let spec = InstanceSpec::new(
        MatrixSource::Gaussian,
        60,
        100,
        ProblemKind::SparseLeastSquares { lambda: 5.0 },
    )
    .with_q(5.0);
    let f = ProblemKind::SparseLeastSquares { lambda: 5.0 }
        .objective()
        .unwrap();
    for seed in 1..=3 {
        let p = spec.build(seed).unwrap();
        let x_hat = p.x_hat.clone().unwrap();
        for method in [Method::Arabebk, Method::Rebk] {
            let out = run(&SolverConfig::new(method, f).tol(Some(1e-8)).seed(seed), &p).unwrap();
            assert!(out.converged());
            let got: Vec<usize> = (0..100)
                .filter(|&j| out.state.x_primal[j].abs() > 1e-6)
                .collect();
            let want: Vec<usize> = (0..100).filter(|&j| x_hat[j] != 0.0).collect();
            assert_eq!(got, want, "{method:?} seed {seed}");
        }
    }
}

#[test]
fn min_norm_limits_match_the_pseudo_inverse() {
    for source in [
        MatrixSource::Gaussian,
        MatrixSource::Structured {
            rank: 10,
            kappa: 10.0,
        },
    ] {
        let spec = InstanceSpec::new(source, 40, 15, ProblemKind::MinNormLeastSquares);
        let p = spec.build(2).unwrap();
        let want = oracle_pinv_solve(&rows_of(&p.matrix), &p.b, 1e-10);
        for method in [Method::Arabebk, Method::Reabk] {
            let tol = 1e-6;
            let out = run(
                &SolverConfig::new(method, kbz_core::ObjectiveSpec::Quadratic).tol(Some(tol)),
                &p,
            )
            .unwrap();
            assert!(out.converged());
            assert!(
                rel_err(&out.state.x_primal, &want) <= 10.0 * tol,
                "{method:?} {source}"
            );
        }
    }
}

#[test]
fn single_entry_suite_converges_for_every_method() {
    let spec = InstanceSpec::new(
        MatrixSource::Gaussian,
        1,
        1,
        ProblemKind::MinNormLeastSquares,
    );
    let suite = SuiteConfig::new(vec![spec], Method::ALL.to_vec(), vec![1]);
    let report = run_benchmark(&suite).unwrap();
    assert_eq!(report.rows.len(), Method::ALL.len());
    assert!(report
        .rows
        .iter()
        .all(|r| r.converged && r.iters <= suite.max_iters));
}

fn strip_timing(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            [&f[..4], &f[6..]].concat().join(",")
        })
        .collect()
}

#[test]
fn benchmarks_are_reproducible_and_keyed_uniquely() {
    let inst = vec![
        InstanceSpec::new(
            MatrixSource::Gaussian,
            30,
            15,
            ProblemKind::SparseLeastSquares { lambda: 5.0 },
        ),
        InstanceSpec::new(
            MatrixSource::Gaussian,
            15,
            30,
            ProblemKind::SparseLeastSquares { lambda: 5.0 },
        ),
    ];
    let mut suite = SuiteConfig::new(
        inst,
        vec![Method::Rebk, Method::Crabebk, Method::Arabebk],
        vec![1, 2, 3],
    );
    suite.tau = 5;
    suite.jobs = 2;
    let a = run_benchmark(&suite).unwrap();
    suite.jobs = 1;
    let b = run_benchmark(&suite).unwrap();
    assert_eq!(strip_timing(&a.to_csv()), strip_timing(&b.to_csv()));
    assert_eq!(a.rows.len(), 18);
    let mut keys: Vec<_> = a
        .rows
        .iter()
        .map(|r| (r.method, r.instance.clone(), r.seed))
        .collect();
    keys.sort();
    keys.dedup();
    assert_eq!(keys.len(), 18);
    assert!(a
        .limit_disagreements(Method::Rebk, Method::Arabebk, 10.0 * suite.tol)
        .is_empty());
    let table = a.table();
    assert!(table.contains("IT") && table.contains("CPU"));
}
