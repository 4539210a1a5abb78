//! Minimal dense linear-algebra kernel: row-major matrices, vector norms,
//! and a Cholesky factorization for symmetric positive definite systems.
//!
//! Everything is `f64`; the shape-control pipeline multiplies its data by a
//! large scaling constant precisely to stay well inside double precision, so
//! no other float width is supported. All types are immutable after
//! construction and safe to share across threads.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Which vector norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
    LInf,
}

/// Dense row-major matrix: `data[i * cols + j]` is the `(i, j)` entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes,
    /// length mismatches, and non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "matrix entry {i} is not finite: {}",
                data[i]
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Matrix::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Matrix::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("matrix needs at least one row"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = Matrix::zeros(n, n)?;
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::invalid(format!(
                "matvec: matrix has {} cols, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.rows];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// `A x` into a caller-owned buffer; used by solver hot loops.
    pub(crate) fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *o = acc;
        }
    }

    /// `A' x`.
    pub fn matvec_t(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::invalid(format!(
                "matvec_t: matrix has {} rows, vector has {} entries",
                self.rows,
                x.len()
            )));
        }
        let mut out = vec![0.0; self.cols];
        self.matvec_t_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn matvec_t_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * xi;
            }
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Matrix> {
        if cols.is_empty() {
            return Err(Error::invalid("select_columns: empty selection"));
        }
        if let Some(&j) = cols.iter().find(|&&j| j >= self.cols) {
            return Err(Error::invalid(format!(
                "select_columns: column {j} out of range (matrix has {})",
                self.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let row = self.row(i);
            for &j in cols {
                data.push(row[j]);
            }
        }
        Matrix::new(self.rows, cols.len(), data)
    }

    /// Entrywise max norm `max_ij |A_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum `max_j sum_i |A_ij|`.
    pub fn max_col_l1(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (s, a) in sums.iter_mut().zip(self.row(i)) {
                *s += a.abs();
            }
        }
        sums.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// `A A'` (symmetric, rows x rows).
    pub fn aat(&self) -> Matrix {
        let n = self.rows;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for (a, b) in self.row(i).iter().zip(self.row(j)) {
                    acc += a * b;
                }
                data[i * n + j] = acc;
                data[j * n + i] = acc;
            }
        }
        Matrix {
            rows: n,
            cols: n,
            data,
        }
    }

    /// `A' A` (symmetric, cols x cols).
    pub fn ata(&self) -> Matrix {
        let p = self.cols;
        let mut data = vec![0.0; p * p];
        for row in 0..self.rows {
            let r = self.row(row);
            for i in 0..p {
                let ri = r[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..p {
                    data[i * p + j] += ri * r[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                data[i * p + j] = data[j * p + i];
            }
        }
        Matrix {
            rows: p,
            cols: p,
            data,
        }
    }

    /// Writes the CSV form: a `rows,cols` header line, then one row per line.
    /// Values use the shortest representation that round-trips exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{},{}\n", self.rows, self.cols));
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn read_csv(path: &Path) -> Result<Matrix> {
        let text = std::fs::read_to_string(path)?;
        Matrix::from_csv_string(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn from_csv_string(text: &str) -> Result<Matrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let mut parts = header.split(',');
        let rows: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse("bad CSV header".into()))?;
        let cols: usize = parts
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse("bad CSV header".into()))?;
        let mut data = Vec::with_capacity(rows * cols);
        for line in lines {
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad float {field:?}")))?;
                data.push(v);
            }
        }
        Matrix::new(rows, cols, data)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} matrix", self.rows, self.cols)
    }
}

/// Vector norm of the requested kind; empty input is rejected.
pub fn norm(x: &[f64], kind: NormKind) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid("norm of empty vector"));
    }
    Ok(match kind {
        NormKind::L1 => x.iter().map(|v| v.abs()).sum(),
        NormKind::L2 => norm2(x),
        NormKind::LInf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
    })
}

/// Euclidean norm without the empty-input check; for internal hot paths.
pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn norm1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cholesky factorization `M = L L'` of a symmetric positive definite matrix.
///
/// The original matrix is kept alongside the factor so that `solve` can run
/// one step of iterative refinement; that keeps the round-trip residual near
/// machine precision even when the pipeline scales its data by 1e7.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    dim: usize,
    lower: Vec<f64>,
    matrix: Matrix,
}

impl SpdFactorization {
    /// Factors `m`, rejecting non-square or asymmetric input (1e-12 relative)
    /// and reporting the pivot index on a nonpositive pivot.
    pub fn new(m: &Matrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::invalid(format!(
                "SPD factorization needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let scale = m.max_abs().max(1e-300);
        for i in 0..n {
            for j in (i + 1)..n {
                if (m.get(i, j) - m.get(j, i)).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let mut lower = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = m.get(i, j);
                for k in 0..j {
                    acc -= lower[i * n + k] * lower[j * n + k];
                }
                if i == j {
                    if acc <= 0.0 {
                        return Err(Error::NotPositiveDefinite {
                            pivot: i,
                            value: acc,
                        });
                    }
                    lower[i * n + i] = acc.sqrt();
                } else {
                    lower[i * n + j] = acc / lower[j * n + j];
                }
            }
        }
        Ok(SpdFactorization {
            dim: n,
            lower,
            matrix: m.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solves `M x = rhs` with one iterative-refinement pass.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.dim {
            return Err(Error::invalid(format!(
                "solve: factor dimension {} vs rhs length {}",
                self.dim,
                rhs.len()
            )));
        }
        let mut x = vec![0.0; self.dim];
        let mut work = vec![0.0; self.dim];
        self.solve_into(rhs, &mut x, &mut work);
        Ok(x)
    }

    pub(crate) fn solve_into(&self, rhs: &[f64], x: &mut [f64], work: &mut [f64]) {
        self.solve_raw(rhs, x);
        // one refinement step: x += M \ (rhs - M x)
        self.matrix.matvec_into(x, work);
        for (w, r) in work.iter_mut().zip(rhs) {
            *w = r - *w;
        }
        let mut corr = vec![0.0; self.dim];
        self.solve_raw(work, &mut corr);
        for (xi, c) in x.iter_mut().zip(&corr) {
            *xi += c;
        }
    }

    fn solve_raw(&self, rhs: &[f64], x: &mut [f64]) {
        let n = self.dim;
        // forward: L w = rhs
        for i in 0..n {
            let mut acc = rhs[i];
            for k in 0..i {
                acc -= self.lower[i * n + k] * x[k];
            }
            x[i] = acc / self.lower[i * n + i];
        }
        // backward: L' x = w
        for i in (0..n).rev() {
            let mut acc = x[i];
            for k in (i + 1)..n {
                acc -= self.lower[k * n + i] * x[k];
            }
            x[i] = acc / self.lower[i * n + i];
        }
    }
}
