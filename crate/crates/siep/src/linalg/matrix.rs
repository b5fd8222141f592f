use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix order must be at least 1")]
    ZeroOrder,
    #[error("entry ({0},{1}) is not finite")]
    NonFinite(usize, usize),
    #[error("rows do not form a square matrix")]
    NotSquare,
    #[error("entries ({0},{1}) and ({1},{0}) differ")]
    NotSymmetric(usize, usize),
    #[error("operand orders {0} and {1} differ")]
    OrderMismatch(usize, usize),
    #[error("set is empty")]
    EmptySet,
}

/// Dense real symmetric matrix. Both triangles are stored and kept equal
/// bit-for-bit; `set` writes `-0.0` as `+0.0` so entries that are zero are
/// zero on the bit level (pattern checks and file round-trips rely on this).
/// All entries are finite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of order `n`. Panics if `n == 0`.
    pub fn zeros(n: usize) -> SymMatrix {
        assert!(n >= 1, "matrix order must be at least 1");
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn diag(values: &[f64]) -> Result<SymMatrix, MatrixError> {
        if values.is_empty() {
            return Err(MatrixError::ZeroOrder);
        }
        let mut m = SymMatrix::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(MatrixError::NonFinite(i, i));
            }
            m.set(i, i, v);
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<SymMatrix, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::ZeroOrder);
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(MatrixError::NotSquare);
        }
        for i in 0..n {
            for j in 0..n {
                if !rows[i][j].is_finite() {
                    return Err(MatrixError::NonFinite(i, j));
                }
                if i < j && rows[i][j] != rows[j][i] {
                    return Err(MatrixError::NotSymmetric(i, j));
                }
            }
        }
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, rows[i][j]);
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets entries (i,j) and (j,i). Panics on non-finite values: symmetric
    /// matrices never hold NaN/inf by construction.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(value.is_finite(), "entry ({i},{j}) must be finite");
        let v = if value == 0.0 { 0.0 } else { value };
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Direct sum with the 1x1 block `[value]`: order grows by one.
    pub fn oplus(&self, value: f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.n + 1);
        for i in 0..self.n {
            for j in i..self.n {
                m.set(i, j, self.get(i, j));
            }
        }
        m.set(self.n, self.n, value);
        m
    }

    /// Entrywise difference; orders must match.
    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::OrderMismatch(self.n, other.n));
        }
        let mut m = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                m.set(i, j, self.get(i, j) - other.get(i, j));
            }
        }
        Ok(m)
    }

    /// Affine rescale `(self - shift*I) / scale`, used to move a spectrum
    /// into [-1, 1] before power sums are taken.
    pub fn affine(&self, shift: f64, scale: f64) -> SymMatrix {
        assert!(scale != 0.0 && scale.is_finite() && shift.is_finite());
        let mut m = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                m.set(i, j, if i == j { (v - shift) / scale } else { v / scale });
            }
        }
        m
    }

    /// Inverse of [`affine`](Self::affine): `self * scale + shift*I`.
    pub fn affine_back(&self, shift: f64, scale: f64) -> SymMatrix {
        assert!(scale != 0.0 && scale.is_finite() && shift.is_finite());
        let mut m = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                m.set(i, j, if i == j { v * scale + shift } else { v * scale });
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix { rows: self.n, cols: self.n, data: self.data.clone() }
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            data: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.n == 0 || raw.data.len() != raw.n * raw.n {
            return Err(serde::de::Error::custom("bad symmetric matrix shape"));
        }
        let mut m = SymMatrix::zeros(raw.n);
        for i in 0..raw.n {
            for j in i..raw.n {
                let v = raw.data[i * raw.n + j];
                if !v.is_finite() {
                    return Err(serde::de::Error::custom("non-finite matrix entry"));
                }
                if v != raw.data[j * raw.n + i] {
                    return Err(serde::de::Error::custom("matrix is not symmetric"));
                }
                m.set(i, j, v);
            }
        }
        Ok(m)
    }
}

/// Dense rectangular matrix; general results (commutators, constraint
/// matrices, eigenvector columns) that need not be symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * out.cols + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = Matrix::zeros(self.rows, self.cols);
        for k in 0..self.data.len() {
            out.data[k] = self.data[k] - other.data[k];
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }
}
