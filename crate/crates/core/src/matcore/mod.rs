//! Dense-matrix foundation: the Moore-Penrose inverse, orthogonal projectors,
//! subspace comparison, entrywise order predicates and the minimum-norm
//! least-squares solve.
//!
//! Every predicate here is tolerance-controlled through [`Tolerances`], so the
//! exact inequalities of nonnegative matrix theory survive floating point.

mod matrix;

pub use matrix::Matrix;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{shape_str, Error, Result};

/// Numerical thresholds shared by all predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Multiplier on `max(rows, cols) * sigma_max * eps` below which singular
    /// values count as zero.
    pub rank_tol_factor: f64,
    /// Max-entry distance between projectors for two subspaces to count as equal.
    pub subspace_tol: f64,
    /// Negative slack admitted by `>= 0`, and the strict margin for `> 0`.
    pub order_tol: f64,
    /// Max-entry tolerance for matrix identities.
    pub eq_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol_factor: 1.0,
            subspace_tol: 1e-10,
            order_tol: 1e-12,
            eq_tol: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("rank_tol_factor", self.rank_tol_factor),
            ("subspace_tol", self.subspace_tol),
            ("order_tol", self.order_tol),
            ("eq_tol", self.eq_tol),
        ];
        for (name, value) in fields {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "tolerance {name} must be finite and nonnegative, got {value}"
                )));
            }
        }
        Ok(())
    }

    fn rank_threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_tol_factor * rows.max(cols) as f64 * sigma_max * f64::EPSILON
    }
}

/// Moore-Penrose inverse through a full SVD, truncating singular values at
/// or below `max(rows, cols) * sigma_max * eps` (scaled by `rank_tol_factor`).
pub fn pinv(a: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    let (rows, cols) = a.shape();
    let svd = a
        .as_faer()
        .thin_svd()
        .map_err(|_| Error::NumericalFailure("SVD did not converge".into()))?;
    let (u, v) = (svd.U(), svd.V());
    let sigma = svd.S().column_vector();

    let sigma_max = (0..sigma.nrows()).fold(0.0_f64, |m, k| m.max(sigma[k]));
    let threshold = tol.rank_threshold(rows, cols, sigma_max);
    let kept: Vec<usize> = (0..sigma.nrows())
        .filter(|&k| sigma[k] > threshold && sigma[k] > 0.0)
        .collect();
    // G = sum_k v_k u_k^T / sigma_k
    let g = Mat::from_fn(cols, rows, |i, j| {
        kept.iter().map(|&k| v[(i, k)] * u[(j, k)] / sigma[k]).sum()
    });
    Matrix::from_faer(g)
}

/// Numerical rank under the same truncation rule as [`pinv`].
pub fn rank(a: &Matrix, tol: &Tolerances) -> Result<usize> {
    let sv = a.singular_values()?;
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = tol.rank_threshold(a.rows(), a.cols(), sigma_max);
    Ok(sv.iter().filter(|&&s| s > threshold && s > 0.0).count())
}

/// Orthogonal projectors `(A A^+, A^+ A)` onto `R(A)` and `R(A^T)`.
pub fn orth_projectors(a: &Matrix, tol: &Tolerances) -> Result<(Matrix, Matrix)> {
    let g = pinv(a, tol)?;
    Ok((a * &g, &g * a))
}

/// Outcome of comparing the range and null space of two matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubspaceComparison {
    pub range_equal: bool,
    pub nullspace_equal: bool,
}

impl SubspaceComparison {
    pub fn both(&self) -> bool {
        self.range_equal && self.nullspace_equal
    }
}

/// Compares `R(A)` with `R(B)` and `N(A)` with `N(B)` through the distance of
/// their orthogonal projectors.
pub fn subspace_equal(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<SubspaceComparison> {
    a.require_same_shape("subspace_equal", b)?;
    let (ra, na) = orth_projectors(a, tol)?;
    let (rb, nb) = orth_projectors(b, tol)?;
    Ok(SubspaceComparison {
        range_equal: ra.max_abs_diff(&rb) <= tol.subspace_tol,
        nullspace_equal: na.max_abs_diff(&nb) <= tol.subspace_tol,
    })
}

/// Which entrywise relation [`entrywise_cmp`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderMode {
    /// `A >= 0`.
    Nonneg,
    /// `A >= B`.
    Dominates,
    /// Every row sum of `A` is positive.
    PositiveRowSums,
}

pub fn entrywise_cmp(a: &Matrix, b: Option<&Matrix>, mode: OrderMode, tol: &Tolerances) -> Result<bool> {
    match mode {
        OrderMode::Nonneg => Ok(is_nonneg(a, tol)),
        OrderMode::Dominates => {
            let b = b.ok_or_else(|| Error::InvalidParameter("dominates mode needs a second matrix".into()))?;
            dominates(a, b, tol)
        }
        OrderMode::PositiveRowSums => Ok(has_positive_row_sums(a, tol)),
    }
}

/// `A >= 0` with `order_tol` negative slack.
pub fn is_nonneg(a: &Matrix, tol: &Tolerances) -> bool {
    a.min_entry() >= -tol.order_tol
}

/// `A >= B` entrywise.
pub fn dominates(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<bool> {
    a.require_same_shape("dominates", b)?;
    Ok(is_nonneg(&(a - b), tol))
}

/// Every row sum strictly above `order_tol`.
pub fn has_positive_row_sums(a: &Matrix, tol: &Tolerances) -> bool {
    a.row_sums().iter().all(|&s| s > tol.order_tol)
}

/// Minimum-norm least-squares solution `A^+ b`.
pub fn min_norm_lsq(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    require_rhs(a, b, "min_norm_lsq")?;
    Ok(&pinv(a, tol)? * b)
}

pub(crate) fn require_rhs(a: &Matrix, b: &Matrix, op: &'static str) -> Result<()> {
    if b.shape() != (a.rows(), 1) {
        return Err(Error::ShapeMismatch {
            op,
            expected: shape_str(a.rows(), 1),
            found: shape_str(b.rows(), b.cols()),
        });
    }
    Ok(())
}

pub(crate) fn require_start(a: &Matrix, x0: &Matrix, op: &'static str) -> Result<()> {
    if x0.shape() != (a.cols(), 1) {
        return Err(Error::ShapeMismatch {
            op,
            expected: shape_str(a.cols(), 1),
            found: shape_str(x0.rows(), x0.cols()),
        });
    }
    Ok(())
}

/// Max-entry residuals of the four Penrose equations for a candidate `G`.
pub fn penrose_residuals(a: &Matrix, g: &Matrix) -> [f64; 4] {
    let ag = a * g;
    let ga = g * a;
    [
        (&ag * a).max_abs_diff(a),
        (&ga * g).max_abs_diff(g),
        ag.transpose().max_abs_diff(&ag),
        ga.transpose().max_abs_diff(&ga),
    ]
}
