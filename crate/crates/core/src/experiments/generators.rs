use faer::Mat;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};

use crate::error::{invalid_arg, Error, Result};
use crate::linalg::vector::{dot, norm};
use crate::linalg::{thin_svd, DenseMatrix};
use crate::rng::{stream_rng, STREAM_INSTANCE, STREAM_NOISE, STREAM_PLANT};

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(invalid_arg(format!(
            "matrix dimensions must be >= 1, got {m}x{n}"
        )));
    }
    Ok(())
}

/// Orthonormal `rows x cols` factor from the QR of a Gaussian draw (drawn row by row).
fn orthonormal_factor<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat<f64> {
    let draws: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Mat::from_fn(rows, cols, |i, j| draws[i * cols + j])
        .qr()
        .compute_thin_Q()
}

/// `m x n` matrix with i.i.d. standard-normal entries.
pub fn generate_gaussian(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    check_dims(m, n)?;
    let mut rng = stream_rng(seed, STREAM_INSTANCE);
    let data = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::new(m, n, data)
}

/// `A = U D V^T` with orthonormal `U` (m x r), `V` (n x r) from QR of Gaussian
/// draws and `D = diag(d)`, `d_i ~ U(1, kappa)`.
pub fn generate_structured(
    m: usize,
    n: usize,
    r: usize,
    kappa: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    generate_structured_with_spectrum(m, n, r, kappa, seed).map(|(a, _)| a)
}

/// [`generate_structured`] together with the diagonal of `D`, in draw order.
pub fn generate_structured_with_spectrum(
    m: usize,
    n: usize,
    r: usize,
    kappa: f64,
    seed: u64,
) -> Result<(DenseMatrix, Vec<f64>)> {
    check_dims(m, n)?;
    if r == 0 || r > m.min(n) {
        return Err(invalid_arg(format!(
            "rank must lie in 1..={}, got {r}",
            m.min(n)
        )));
    }
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(invalid_arg(format!("kappa must be > 1, got {kappa}")));
    }
    let mut rng = stream_rng(seed, STREAM_INSTANCE);
    let u = orthonormal_factor(&mut rng, m, r);
    let v = orthonormal_factor(&mut rng, n, r);
    let dist = Uniform::new(1.0, kappa).map_err(|e| invalid_arg(e.to_string()))?;
    let d: Vec<f64> = (0..r).map(|_| rng.sample(dist)).collect();
    let data = (0..m)
        .flat_map(|i| {
            let (u, v, d) = (&u, &v, &d);
            (0..n).map(move |j| (0..r).map(|k| u[(i, k)] * d[k] * v[(j, k)]).sum())
        })
        .collect();
    Ok((DenseMatrix::new(m, n, data)?, d))
}

/// Vector with `ceil(fraction * n)` standard-normal entries at uniformly random
/// positions; all other entries are exactly zero.
pub fn plant_sparse_solution(n: usize, sparsity_fraction: f64, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid_arg("length must be >= 1"));
    }
    if !(sparsity_fraction > 0.0 && sparsity_fraction <= 1.0) {
        return Err(invalid_arg(format!(
            "sparsity fraction must lie in (0, 1], got {sparsity_fraction}"
        )));
    }
    let s = ((sparsity_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut rng = stream_rng(seed, STREAM_PLANT);
    let mut x = vec![0.0; n];
    for j in sample(&mut rng, n, s) {
        // A zero draw would shrink the support; it has probability zero but is cheap to exclude.
        x[j] = loop {
            let v: f64 = rng.sample(StandardNormal);
            if v != 0.0 {
                break v;
            }
        };
    }
    Ok(x)
}

/// Orthonormal basis of `range(A)` (numerically), one vector per entry.
fn range_basis(matrix: &DenseMatrix) -> Result<Vec<Vec<f64>>> {
    let svd = thin_svd(matrix)?;
    Ok(svd
        .numerical_support()
        .into_iter()
        .map(|k| (0..matrix.rows()).map(|i| svd.u[(i, k)]).collect())
        .collect())
}

/// Noise in `null(A^T)` with `||e|| = q ||y_hat||`, uniformly distributed on
/// that sphere.
///
/// A Gaussian vector is projected onto the orthogonal complement of the range
/// of `A` (twice, for numerical orthogonality), normalized and scaled; the
/// projection of an isotropic Gaussian is isotropic in the subspace.
pub fn nullspace_noise(matrix: &DenseMatrix, y_hat: &[f64], q: f64, seed: u64) -> Result<Vec<f64>> {
    let m = matrix.rows();
    if y_hat.len() != m {
        return Err(invalid_arg(format!(
            "y_hat has length {}, matrix has {m} rows",
            y_hat.len()
        )));
    }
    if !(q >= 0.0 && q.is_finite()) {
        return Err(invalid_arg(format!("noise level q must be >= 0, got {q}")));
    }
    if q == 0.0 {
        return Ok(vec![0.0; m]);
    }
    let basis = range_basis(matrix)?;
    let rank = basis.len();
    if rank >= m {
        return Err(Error::NoNoisePossible { rows: m, rank });
    }
    let radius = q * norm(y_hat);
    if radius == 0.0 {
        return Ok(vec![0.0; m]);
    }
    let mut rng = stream_rng(seed, STREAM_NOISE);
    let mut e: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    for _ in 0..2 {
        for q in &basis {
            let c = dot(q, &e);
            e.iter_mut().zip(q).for_each(|(ei, qi)| *ei -= c * qi);
        }
    }
    let len = norm(&e);
    if len == 0.0 {
        return Err(Error::InvalidState(
            "projected noise direction vanished".into(),
        ));
    }
    e.iter_mut().for_each(|ei| *ei *= radius / len);
    Ok(e)
}

/// Minimum-norm least-squares solution `A^+ b` by SVD, with singular values
/// below `1e-12 sigma_max` treated as zero.
pub fn pseudo_inverse_solution(matrix: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != matrix.rows() {
        return Err(invalid_arg(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            matrix.rows()
        )));
    }
    if matrix.frob_sq() == 0.0 {
        return Err(invalid_arg(
            "pseudo-inverse of the zero matrix is zero; refusing",
        ));
    }
    let svd = thin_svd(matrix)?;
    let mut x = vec![0.0; matrix.cols()];
    for k in svd.numerical_support() {
        let c = (0..matrix.rows())
            .map(|i| svd.u[(i, k)] * b[i])
            .sum::<f64>()
            / svd.s[k];
        x.iter_mut()
            .enumerate()
            .for_each(|(j, xj)| *xj += c * svd.v[(j, k)]);
    }
    Ok(x)
}
