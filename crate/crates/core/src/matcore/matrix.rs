use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Scale};

use crate::error::{shape_str, Error, Result};

/// Dense real matrix with finite `f64` entries.
///
/// Column vectors are `n x 1` matrices. Shapes are fixed at construction.
/// The arithmetic operators panic on incompatible shapes; the fallible
/// `try_*` variants return [`Error::ShapeMismatch`] instead.
#[derive(Clone)]
pub struct Matrix {
    inner: Mat<f64>,
}

impl Matrix {
    /// Builds a matrix from a row-major slice of entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "from_row_major",
                expected: format!("{} entries", rows * cols),
                found: format!("{} entries", entries.len()),
            });
        }
        Self::from_faer(Mat::from_fn(rows, cols, |i, j| entries[i * cols + j]))
    }

    /// Builds a matrix from a list of rows, e.g. `Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]])`.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::ShapeMismatch {
                    op: "from_rows",
                    expected: format!("{ncols} entries in row {i}"),
                    found: format!("{}", row.len()),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_row_major(nrows, ncols, &entries)
    }

    /// Column vector from its entries.
    pub fn column(entries: &[f64]) -> Result<Self> {
        Self::from_row_major(entries.len(), 1, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix {rows}x{cols}");
        Matrix {
            inner: Mat::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "empty identity");
        Matrix {
            inner: Mat::identity(n, n),
        }
    }

    /// Matrix with every entry equal to `value`.
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix {rows}x{cols}");
        assert!(value.is_finite());
        Matrix {
            inner: Mat::full(rows, cols, value),
        }
    }

    pub(crate) fn from_faer(inner: Mat<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::EmptyMatrix {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        for j in 0..inner.ncols() {
            for i in 0..inner.nrows() {
                let value = inner[(i, j)];
                if !value.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j, value });
                }
            }
        }
        Ok(Matrix { inner })
    }

    // Shape-preserving results of finite inputs; only overflow can break finiteness,
    // which callers that iterate guard against explicitly.
    fn wrap(inner: Mat<f64>) -> Self {
        Matrix { inner }
    }

    pub(crate) fn as_faer(&self) -> &Mat<f64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.inner.nrows(), self.inner.ncols())
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    /// Entries in column-major order.
    pub fn to_col_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Self::wrap(self.inner.transpose().to_owned())
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Self::wrap(&self.inner * Scale(factor))
    }

    pub fn try_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols() != rhs.rows() {
            return Err(Error::ShapeMismatch {
                op: "mul",
                expected: format!("{} rows on the right", self.cols()),
                found: shape_str(rhs.rows(), rhs.cols()),
            });
        }
        Ok(Self::wrap(&self.inner * &rhs.inner))
    }

    pub fn try_add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.require_same_shape("add", rhs)?;
        Ok(Self::wrap(&self.inner + &rhs.inner))
    }

    pub fn try_sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.require_same_shape("sub", rhs)?;
        Ok(Self::wrap(&self.inner - &rhs.inner))
    }

    pub(crate) fn require_same_shape(&self, op: &'static str, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                expected: shape_str(self.rows(), self.cols()),
                found: shape_str(other.rows(), other.cols()),
            });
        }
        Ok(())
    }

    pub(crate) fn require_square(&self, op: &'static str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op,
                rows: self.rows(),
                cols: self.cols(),
            });
        }
        Ok(())
    }

    /// Max-entry norm `max |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.inner.norm_max()
    }

    /// Frobenius norm; the Euclidean norm for column vectors.
    pub fn frobenius(&self) -> f64 {
        self.inner.norm_l2()
    }

    /// `max |a_ij - b_ij|`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        (&self.inner - &other.inner).norm_max()
    }

    pub fn min_entry(&self) -> f64 {
        self.to_col_major().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows().min(self.cols())).map(|i| self.inner[(i, i)]).sum()
    }

    /// Ordinary inverse through LU; fails when the matrix is numerically
    /// singular, i.e. `sigma_min <= n * sigma_max * eps`.
    pub fn inverse(&self) -> Result<Matrix> {
        self.require_square("inverse")?;
        let sv = self.singular_values()?;
        let (max, min) = (sv[0], sv[sv.len() - 1]);
        if min <= self.rows() as f64 * max * f64::EPSILON {
            return Err(Error::NumericalFailure("matrix is singular".into()));
        }
        Matrix::from_faer(self.inner.partial_piv_lu().inverse())
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let mut sv = self
            .inner
            .singular_values()
            .map_err(|_| Error::NumericalFailure("SVD did not converge".into()))?;
        sv.sort_by(|a, b| b.total_cmp(a));
        Ok(sv)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Self::wrap(Mat::from_fn(self.rows(), self.cols(), |i, j| f(self.inner[(i, j)])))
    }

    pub fn is_finite(&self) -> bool {
        self.inner.is_all_finite()
    }

    /// Columns `start..start+count` as a new matrix.
    pub fn columns(&self, start: usize, count: usize) -> Matrix {
        Self::wrap(self.inner.subcols(start, count).to_owned())
    }
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Matrix) -> bool {
        self.shape() == other.shape() && self.to_col_major() == other.to_col_major()
    }
}

/// Serializes as a list of rows.
impl serde::Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{:?}", self.to_rows())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows() {
            let row: Vec<String> = (0..self.cols())
                .map(|j| format!("{:>12.6}", self.inner[(i, j)]))
                .collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &'a Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix product")
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &'a Matrix) -> Matrix {
        self.try_add(rhs).expect("matrix sum")
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &'a Matrix) -> Matrix {
        self.try_sub(rhs).expect("matrix difference")
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: f64) -> Matrix {
        self.scale(rhs)
    }
}
