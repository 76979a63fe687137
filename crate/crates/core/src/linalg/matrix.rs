use std::fmt::Write as _;
use std::fs;
use std::ops::Range;
use std::path::Path;

use crate::error::{invalid_arg, Error, Result};

use super::vector::{dot, norm_sq};

/// Which index set of a matrix a block ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Rows,
    Columns,
}

/// Row-major dense matrix with cached row, column and Frobenius norms.
///
/// The matrix is immutable once built, so the caches never go stale and the
/// value can be shared freely between concurrent solver runs.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    row_sq_norms: Vec<f64>,
    col_sq_norms: Vec<f64>,
    frob_sq: f64,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid_arg(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(invalid_arg(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(invalid_arg(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }

        let row_sq_norms: Vec<f64> = data.chunks_exact(cols).map(norm_sq).collect();
        let mut col_sq_norms = vec![0.0; cols];
        for row in data.chunks_exact(cols) {
            for (acc, v) in col_sq_norms.iter_mut().zip(row) {
                *acc += v * v;
            }
        }
        let frob_sq = row_sq_norms.iter().sum();

        Ok(Self {
            rows,
            cols,
            data,
            row_sq_norms,
            col_sq_norms,
            frob_sq,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid_arg("rows have differing lengths"));
        }
        Self::new(m, n, rows.concat())
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::new(n, n, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row_sq_norms(&self) -> &[f64] {
        &self.row_sq_norms
    }

    pub fn col_sq_norms(&self) -> &[f64] {
        &self.col_sq_norms
    }

    pub fn frob_sq(&self) -> f64 {
        self.frob_sq
    }

    pub fn extent(&self, axis: Axis) -> usize {
        match axis {
            Axis::Rows => self.rows,
            Axis::Columns => self.cols,
        }
    }

    pub fn sq_norms(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::Rows => &self.row_sq_norms,
            Axis::Columns => &self.col_sq_norms,
        }
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec: length mismatch");
        self.data
            .chunks_exact(self.cols)
            .map(|row| dot(row, x))
            .collect()
    }

    /// `A^T y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "tr_mul_vec: length mismatch");
        let mut out = vec![0.0; self.cols];
        for (row, &yi) in self.data.chunks_exact(self.cols).zip(y) {
            if yi != 0.0 {
                for (o, a) in out.iter_mut().zip(row) {
                    *o += a * yi;
                }
            }
        }
        out
    }

    /// `out = A[rows, :] x`, with `out.len() == rows.len()`.
    pub fn row_block_mul(&self, rows: Range<usize>, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), rows.len());
        for (o, i) in out.iter_mut().zip(rows) {
            *o = dot(self.row(i), x);
        }
    }

    /// `out = A[rows, :]^T r`, with `out.len() == cols`.
    pub fn row_block_tr_mul(&self, rows: Range<usize>, r: &[f64], out: &mut [f64]) {
        debug_assert_eq!(r.len(), rows.len());
        out.fill(0.0);
        for (i, &ri) in rows.zip(r) {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * ri;
            }
        }
    }

    /// `out = A[:, cols]^T z`, with `out.len() == cols.len()`.
    pub fn col_block_tr_mul(&self, cols: Range<usize>, z: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), cols.len());
        out.fill(0.0);
        for (i, &zi) in z.iter().enumerate() {
            let seg = &self.row(i)[cols.clone()];
            for (o, a) in out.iter_mut().zip(seg) {
                *o += a * zi;
            }
        }
    }

    /// `out = A[:, cols] r`, with `out.len() == rows`.
    pub fn col_block_mul(&self, cols: Range<usize>, r: &[f64], out: &mut [f64]) {
        debug_assert_eq!(r.len(), cols.len());
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.row(i)[cols.clone()], r);
        }
    }

    /// Copy of the rows (or columns) in `block` as a standalone matrix.
    pub fn block(&self, block: Range<usize>, axis: Axis) -> DenseMatrix {
        let data = match axis {
            Axis::Rows => self.data[block.start * self.cols..block.end * self.cols].to_vec(),
            Axis::Columns => (0..self.rows)
                .flat_map(|i| self.row(i)[block.clone()].iter().copied())
                .collect(),
        };
        let (r, c) = match axis {
            Axis::Rows => (block.len(), self.cols),
            Axis::Columns => (self.rows, block.len()),
        };
        DenseMatrix::new(r, c, data).expect("block of a valid matrix is valid")
    }

    pub fn select_columns(&self, cols: &[usize]) -> DenseMatrix {
        let data = (0..self.rows)
            .flat_map(|i| cols.iter().map(move |&j| self.get(i, j)))
            .collect();
        DenseMatrix::new(self.rows, cols.len(), data).expect("column selection is valid")
    }

    pub fn to_faer(&self) -> faer::Mat<f64> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    pub fn from_faer(m: faer::MatRef<'_, f64>) -> Result<Self> {
        let (r, c) = (m.nrows(), m.ncols());
        let data = (0..r)
            .flat_map(|i| (0..c).map(move |j| m[(i, j)]))
            .collect();
        Self::new(r, c, data)
    }

    /// Plain-text serialization: `rows cols` on the first line, then one
    /// space-separated row per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.data.len() * 24);
        let _ = writeln!(s, "{} {}", self.rows, self.cols);
        for row in self.data.chunks_exact(self.cols) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty matrix file".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: hline + 1,
                message: format!("bad header: {e}"),
            })?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse {
                line: hline + 1,
                message: "header must be `rows cols`".into(),
            });
        };

        let mut data = Vec::with_capacity(rows * cols);
        let mut seen_rows = 0;
        for (lno, line) in lines {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: lno + 1,
                    message: e.to_string(),
                })?;
            if vals.len() != cols {
                return Err(Error::Parse {
                    line: lno + 1,
                    message: format!("expected {cols} values, found {}", vals.len()),
                });
            }
            data.extend(vals);
            seen_rows += 1;
        }
        if seen_rows != rows {
            return Err(Error::Parse {
                line: hline + 1,
                message: format!("header declares {rows} rows, found {seen_rows}"),
            });
        }
        Self::new(rows, cols, data)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Vectors share the matrix text format as a single column (`len 1` header).
pub fn load_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let m = DenseMatrix::load(path)?;
    if m.cols() != 1 {
        return Err(invalid_arg(format!(
            "vector file must have one column, found {}",
            m.cols()
        )));
    }
    Ok(m.data().to_vec())
}

pub fn save_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    DenseMatrix::new(v.len(), 1, v.to_vec())?.save(path)
}
