//! Column-major dense matrix value type.
//!
//! This is the container for the "small" factors of the randomized solver
//! (Q, Y, C, F, L, U, V, and the projections X). It is a plain value: cheap
//! to clone at solver scale, trivially `Send`, no views or lifetimes.

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    /// Wraps a column-major buffer. Rejects length mismatches and non-finite
    /// entries, so every matrix in the system is finite by construction.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "buffer of length {} cannot hold a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let m = Self { rows, cols, data };
        m.check_finite()?;
        Ok(m)
    }

    /// Row-by-row constructor, mainly for tests and file I/O.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = vec![0.0; nrows * ncols];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    r.len()
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                data[i + j * nrows] = v;
            }
        }
        Self::from_column_major(nrows, ncols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[i + j * rows] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.rows] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.data[j + i * self.cols] = self.data[i + j * self.rows];
            }
        }
        t
    }

    /// `self * rhs`
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dims {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for k in 0..self.cols {
                let w = rhs.data[k + j * rhs.rows];
                if w == 0.0 {
                    continue;
                }
                let lhs_col = &self.data[k * self.rows..(k + 1) * self.rows];
                for i in 0..self.rows {
                    out_col[i] += w * lhs_col[i];
                }
            }
        }
        out
    }

    /// `selfᵀ * rhs`
    pub fn tr_mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.rows, rhs.rows,
            "tr_mul dims {}x{} ᵀ* {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.cols, rhs.cols);
        for j in 0..rhs.cols {
            for i in 0..self.cols {
                let mut acc = 0.0;
                let a = self.col(i);
                let b = rhs.col(j);
                for r in 0..self.rows {
                    acc += a[r] * b[r];
                }
                out.data[i + j * self.cols] = acc;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, &v) in out.data.iter_mut().zip(&other.data) {
            *o += v;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, &v) in out.data.iter_mut().zip(&other.data) {
            *o -= v;
        }
        out
    }

    /// `self += scale * other`
    pub fn add_assign_scaled(&mut self, other: &Self, scale: f64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (o, &v) in self.data.iter_mut().zip(&other.data) {
            *o += scale * v;
        }
    }

    pub fn scaled(&self, scale: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= scale;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest |entry| off the main diagonal.
    pub fn max_abs_offdiag(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.cols {
            for i in 0..self.rows {
                if i != j {
                    m = m.max(self.at(i, j).abs());
                }
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::Numeric(format!(
                "{}x{} matrix contains a non-finite entry",
                self.rows, self.cols
            )))
        }
    }
}

impl std::fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        let shown = self.rows.min(8);
        for i in 0..shown {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                write!(f, "{:>12.5e} ", self.at(i, j))?;
            }
            writeln!(f, "{}", if self.cols > 8 { "..." } else { "" })?;
        }
        if self.rows > shown {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}
