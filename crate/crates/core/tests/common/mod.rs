//! Independent reference computations for the integration tests.
//!
//! Nothing here calls into the library's linear algebra: singular values and
//! pseudo-inverses come from a one-sided Jacobi SVD, symmetric eigenproblems
//! from cyclic Jacobi rotations, and the reference iterations are spelled out
//! row by row.
#![allow(dead_code)]

use kbz_core::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_7e57)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    DenseMatrix::new(rows, cols, data).unwrap()
}

pub fn random_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Plain nested-vector copy of a matrix.
pub fn rows_of(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

/// One-sided (Hestenes) Jacobi SVD: rotates column pairs of `A` until they are
/// mutually orthogonal. Returns the final columns `A V` (which equal
/// `u_k sigma_k`) and `V`, both as lists of columns.
pub fn one_sided_jacobi(a: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w[p].iter().map(|x| x * x).sum();
                let beta: f64 = w[q].iter().map(|x| x * x).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut w, &mut v] {
                    for k in 0..cols[p].len() {
                        let xp = cols[p][k];
                        let xq = cols[q][k];
                        cols[p][k] = c * xp - s * xq;
                        cols[q][k] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Singular values (descending), padded with zeros to `min(m, n)` entries.
pub fn oracle_singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let (w, _) = one_sided_jacobi(a);
    let mut sv: Vec<f64> = w
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.truncate(m.min(n));
    sv
}

/// Smallest singular value above `1e-12 sigma_max`.
pub fn oracle_sigma_min_nonzero(a: &[Vec<f64>]) -> Option<f64> {
    let sv = oracle_singular_values(a);
    let top = *sv.first()?;
    sv.into_iter()
        .filter(|&s| s > 1e-12 * top && s > 0.0)
        .last()
}

/// `A^+ b` from the one-sided Jacobi SVD; singular values below
/// `cutoff * sigma_max` are dropped.
pub fn oracle_pinv_solve(a: &[Vec<f64>], b: &[f64], cutoff: f64) -> Vec<f64> {
    let n = a[0].len();
    let (w, v) = one_sided_jacobi(a);
    let sq: Vec<f64> = w.iter().map(|c| c.iter().map(|x| x * x).sum()).collect();
    let smax_sq = sq.iter().cloned().fold(0.0, f64::max);
    let mut x = vec![0.0; n];
    for k in 0..n {
        if sq[k] > cutoff * cutoff * smax_sq && sq[k] > 0.0 {
            let coef = w[k].iter().zip(b).map(|(u, bi)| u * bi).sum::<f64>() / sq[k];
            for j in 0..n {
                x[j] += coef * v[k][j];
            }
        }
    }
    x
}

/// Largest eigenvalue of a block Gram matrix divided by its trace.
pub fn oracle_beta(block_rows: &[Vec<f64>]) -> f64 {
    let sv = oracle_singular_values(block_rows);
    let frob: f64 = block_rows.iter().flatten().map(|v| v * v).sum();
    if frob == 0.0 {
        0.0
    } else {
        sv[0] * sv[0] / frob
    }
}

pub fn column_block(a: &[Vec<f64>], cols: std::ops::Range<usize>) -> Vec<Vec<f64>> {
    a.iter().map(|r| r[cols.clone()].to_vec()).collect()
}

pub fn soft(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}

/// Randomized extended Kaczmarz, one column then one row per step.
pub struct RekOracle {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl RekOracle {
    pub fn new(a: &[Vec<f64>], b: &[f64]) -> Self {
        Self {
            x: vec![0.0; a[0].len()],
            z: b.to_vec(),
        }
    }

    pub fn step(&mut self, a: &[Vec<f64>], b: &[f64], col: usize, row: usize) {
        let col_vec: Vec<f64> = a.iter().map(|r| r[col]).collect();
        let cn: f64 = col_vec.iter().map(|v| v * v).sum();
        let cz: f64 = col_vec.iter().zip(&self.z).map(|(c, z)| c * z).sum();
        for (zi, ci) in self.z.iter_mut().zip(&col_vec) {
            *zi -= cz / cn * ci;
        }
        let ai = &a[row];
        let rn: f64 = ai.iter().map(|v| v * v).sum();
        let ax: f64 = ai.iter().zip(&self.x).map(|(a, x)| a * x).sum();
        let coef = (b[row] - self.z[row] - ax) / rn;
        for (xj, aj) in self.x.iter_mut().zip(ai) {
            *xj += coef * aj;
        }
    }
}

/// Randomized extended averaging block Kaczmarz with constant relaxation,
/// written as sums of per-row and per-column projections.
pub struct ReabkOracle {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub alpha: f64,
}

impl ReabkOracle {
    pub fn new(b: &[f64], n: usize, alpha: f64) -> Self {
        Self {
            x: vec![0.0; n],
            z: b.to_vec(),
            alpha,
        }
    }

    pub fn step(
        &mut self,
        a: &[Vec<f64>],
        b: &[f64],
        cols: std::ops::Range<usize>,
        rows: std::ops::Range<usize>,
    ) {
        let m = a.len();
        let fro_c: f64 = a
            .iter()
            .map(|r| r[cols.clone()].iter().map(|v| v * v).sum::<f64>())
            .sum();
        let mut dz = vec![0.0; m];
        for j in cols.clone() {
            let cz: f64 = (0..m).map(|i| a[i][j] * self.z[i]).sum();
            for i in 0..m {
                dz[i] += cz * a[i][j];
            }
        }
        for i in 0..m {
            self.z[i] -= self.alpha / fro_c * dz[i];
        }
        let fro_r: f64 = rows
            .clone()
            .map(|i| a[i].iter().map(|v| v * v).sum::<f64>())
            .sum();
        let n = self.x.len();
        let mut dx = vec![0.0; n];
        for i in rows {
            let ax: f64 = a[i].iter().zip(&self.x).map(|(a, x)| a * x).sum();
            let r = b[i] - self.z[i] - ax;
            for j in 0..n {
                dx[j] += r * a[i][j];
            }
        }
        for j in 0..n {
            self.x[j] += self.alpha / fro_r * dx[j];
        }
    }
}

/// Minimizer of a unimodal function on `[lo, hi]` by repeated grid refinement
/// down to cells of width `resolution`.
pub fn grid_minimize(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, resolution: f64) -> f64 {
    const CELLS: usize = 200;
    loop {
        let h = (hi - lo) / CELLS as f64;
        let (mut best, mut best_v) = (lo, f(lo));
        for k in 1..=CELLS {
            let t = lo + h * k as f64;
            let v = f(t);
            if v < best_v {
                best = t;
                best_v = v;
            }
        }
        if h <= resolution {
            return best;
        }
        lo = (best - 2.0 * h).max(lo);
        hi = (best + 2.0 * h).min(hi);
    }
}

/// `sup_y <d, y> - f(y)` for the 1-D elastic net, by grid search on `[-r, r]`.
pub fn conjugate_grid_1d(d: f64, lambda: f64, r: f64, points: usize) -> f64 {
    (0..=points)
        .map(|k| -r + 2.0 * r * k as f64 / points as f64)
        .map(|y| d * y - (lambda * y.abs() + 0.5 * y * y))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Exhaustive `min over nonzero column subsets of sigma_min` via Jacobi.
pub fn oracle_sigma_tilde(a: &[Vec<f64>]) -> f64 {
    let n = a[0].len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let sub: Vec<Vec<f64>> = a
            .iter()
            .map(|r| cols.iter().map(|&j| r[j]).collect())
            .collect();
        if sub.iter().flatten().all(|&v| v == 0.0) {
            continue;
        }
        if let Some(s) = oracle_sigma_min_nonzero(&sub) {
            best = best.min(s);
        }
    }
    best
}

/// Critical values of the chi-square distribution at significance 0.01.
pub fn chi2_critical_001(df: usize) -> f64 {
    const TABLE: [f64; 10] = [
        6.635, 9.210, 11.345, 13.277, 15.086, 16.812, 18.475, 20.090, 21.666, 23.209,
    ];
    TABLE[df - 1]
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn rel_err(x: &[f64], reference: &[f64]) -> f64 {
    let num: f64 = x
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}
