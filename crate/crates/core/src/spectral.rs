//! Spectral radius, eigenvalues and Perron pairs.
//!
//! The full spectrum comes from Hessenberg reduction followed by shifted QR
//! (a real Schur form). Gelfand repeated squaring gives a second,
//! method-independent estimate of the spectral radius and takes over beyond
//! the eigenvalue size cap.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{is_nonneg, Matrix, Tolerances};

/// Largest dimension for which the full spectrum is computed.
pub const EIGEN_SIZE_CAP: usize = 64;

const GELFAND_MIN_SQUARINGS: usize = 12;
const GELFAND_MAX_SQUARINGS: usize = 62;
const POWER_MAX_ITERS: usize = 20_000;
const PERRON_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    QrIteration,
    GelfandSquaring,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub radius: f64,
    /// `(re, im)` pairs sorted by descending modulus, ties by descending real part.
    pub eigenvalues: Option<Vec<(f64, f64)>>,
    pub method: SpectralMethod,
}

/// Spectral radius `max |lambda_i|`.
///
/// Uses the QR spectrum up to [`EIGEN_SIZE_CAP`], Gelfand squaring above it.
pub fn spectral_radius(h: &Matrix, tol: &Tolerances) -> Result<f64> {
    h.require_square("spectral_radius")?;
    Ok(spectrum(h, tol)?.radius)
}

/// Spectrum report for any square size: the QR spectrum up to the cap, and
/// only the Gelfand radius beyond it.
pub fn spectrum(h: &Matrix, tol: &Tolerances) -> Result<SpectrumReport> {
    h.require_square("spectrum")?;
    if h.rows() <= EIGEN_SIZE_CAP {
        eigenvalues(h, tol)
    } else {
        Ok(SpectrumReport {
            radius: spectral_radius_gelfand(h)?,
            eigenvalues: None,
            method: SpectralMethod::GelfandSquaring,
        })
    }
}

/// Full spectrum with multiplicities for square matrices up to the size cap.
pub fn eigenvalues(h: &Matrix, _tol: &Tolerances) -> Result<SpectrumReport> {
    h.require_square("eigenvalues")?;
    let n = h.rows();
    if n > EIGEN_SIZE_CAP {
        return Err(Error::SizeCap {
            op: "eigenvalues",
            n,
            cap: EIGEN_SIZE_CAP,
        });
    }
    let mut values: Vec<(f64, f64)> = h
        .as_faer()
        .eigenvalues()
        .map_err(|_| Error::NumericalFailure("QR iteration did not converge".into()))?
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    sort_spectrum(&mut values);
    let radius = values
        .iter()
        .map(|&(re, im)| re.hypot(im))
        .fold(0.0, f64::max);
    Ok(SpectrumReport {
        radius,
        eigenvalues: Some(values),
        method: SpectralMethod::QrIteration,
    })
}

// Quantized keys give a total order that is stable under last-bit noise
// between conjugate partners.
fn sort_spectrum(values: &mut [(f64, f64)]) {
    let scale = values
        .iter()
        .map(|&(re, im)| re.hypot(im))
        .fold(1.0, f64::max);
    let quantum = 1e-12 * scale;
    let key = |&(re, im): &(f64, f64)| {
        let q = |v: f64| (v / quantum).round() as i64;
        (q(re.hypot(im)), q(re), q(im))
    };
    values.sort_by_key(|v| std::cmp::Reverse(key(v)));
}

/// Spectral radius by Gelfand's formula `rho = lim ||H^p||^(1/p)` with
/// `p = 2^k`, renormalizing by the max-entry norm after each squaring.
pub fn spectral_radius_gelfand(h: &Matrix) -> Result<f64> {
    h.require_square("spectral_radius_gelfand")?;
    let norm = h.max_abs();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let mut b = h.scale(1.0 / norm);
    // H^(2^k) = exp(log_scale) * b with ||b||_max = 1
    let mut log_scale = norm.ln();
    let mut power = 1.0_f64;
    let mut estimate = norm;
    let mut stable_steps = 0;
    for k in 1..=GELFAND_MAX_SQUARINGS {
        b = &b * &b;
        let s = b.max_abs();
        if s == 0.0 {
            return Ok(0.0);
        }
        b = b.scale(1.0 / s);
        log_scale = 2.0 * log_scale + s.ln();
        power *= 2.0;
        let next = (log_scale / power).exp();
        if (next - estimate).abs() <= 1e-14 * next.max(f64::MIN_POSITIVE) {
            stable_steps += 1;
        } else {
            stable_steps = 0;
        }
        estimate = next;
        if k >= GELFAND_MIN_SQUARINGS && stable_steps >= 3 {
            return Ok(estimate);
        }
    }
    Err(Error::NumericalFailure(format!(
        "Gelfand squaring did not stabilize after {GELFAND_MAX_SQUARINGS} squarings"
    )))
}

/// Perron root and a nonnegative unit-l1 eigenvector of a nonnegative matrix.
pub fn perron_pair(h: &Matrix, tol: &Tolerances) -> Result<(f64, Matrix)> {
    h.require_square("perron_pair")?;
    require_nonneg(h, "perron_pair", tol)?;
    let n = h.rows();
    let eps_shift = 1e-8 * (1.0 + h.max_abs());
    // On a defective root the eigen-residual decays like 1/k^2 while the
    // estimate error decays like 1/k, so candidates must match the radius.
    let rho = spectral_radius(h, tol)?;
    let agrees = |pair: &(f64, Matrix)| (pair.0 - rho).abs() <= PERRON_RESIDUAL * (1.0 + rho);

    // Shifting by the Perron root itself separates it from every other
    // eigenvalue of the same modulus (cyclic matrices).
    for shift in [0.0, eps_shift, rho] {
        if let Some(pair) = power_attempt(h, shift).filter(agrees) {
            return Ok(pair);
        }
    }
    null_vector_fallback(h, rho).ok_or_else(|| {
        Error::NumericalFailure(format!(
            "power iteration stagnated on a {n}x{n} nonnegative matrix"
        ))
    })
}

fn power_attempt(h: &Matrix, shift: f64) -> Option<(f64, Matrix)> {
    let n = h.rows();
    let mut x = Matrix::filled(n, 1, 1.0 / n as f64);
    let mut last_estimate = f64::NAN;
    let mut flat_steps = 0;
    for _ in 0..POWER_MAX_ITERS {
        let hx = h * &x;
        let l1: f64 = hx.to_col_major().iter().sum();
        let estimate = l1;
        if (&hx - &x.scale(estimate)).max_abs() <= PERRON_RESIDUAL {
            return Some((estimate.max(0.0), x));
        }
        let kx = &hx + &x.scale(shift);
        let norm: f64 = kx.to_col_major().iter().sum();
        if norm <= 0.0 {
            // K x = 0 with x >= 0 only happens at shift 0, where Hx = 0 was
            // already accepted above.
            return None;
        }
        x = kx.scale(1.0 / norm);
        if last_estimate.is_finite() && (estimate - last_estimate).abs() <= 1e-14 * estimate.abs().max(1e-300) {
            flat_steps += 1;
            if flat_steps >= 10 {
                return None;
            }
        } else {
            flat_steps = 0;
        }
        last_estimate = estimate;
    }
    None
}

fn null_vector_fallback(h: &Matrix, rho: f64) -> Option<(f64, Matrix)> {
    let n = h.rows();
    let shifted = h - &Matrix::identity(n).scale(rho);
    let svd = shifted.as_faer().svd().ok()?;
    let sigma = svd.S().column_vector();
    let k = (0..sigma.nrows()).min_by(|&i, &j| sigma[i].total_cmp(&sigma[j]))?;
    let mut v: Vec<f64> = (0..n).map(|i| svd.V()[(i, k)]).collect();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|e| *e = -*e);
    }
    if v.iter().any(|&e| e < -1e-9) {
        return None;
    }
    v.iter_mut().for_each(|e| *e = e.max(0.0));
    let total: f64 = v.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let x = Matrix::column(&v.iter().map(|e| e / total).collect::<Vec<_>>()).ok()?;
    let residual = (&(h * &x) - &x.scale(rho)).max_abs();
    (residual <= PERRON_RESIDUAL).then_some((rho, x))
}

/// `Bx <= alpha x` entrywise for a strictly positive `x`; when it holds,
/// `rho(B) <= alpha`.
pub fn subinvariance_bound(b: &Matrix, x: &Matrix, alpha: f64, tol: &Tolerances) -> Result<bool> {
    b.require_square("subinvariance_bound")?;
    require_nonneg(b, "subinvariance_bound", tol)?;
    if x.shape() != (b.rows(), 1) {
        return Err(Error::ShapeMismatch {
            op: "subinvariance_bound",
            expected: format!("{}x1", b.rows()),
            found: format!("{}x{}", x.rows(), x.cols()),
        });
    }
    for (index, value) in x.to_col_major().into_iter().enumerate() {
        if value <= 0.0 {
            return Err(Error::NotStrictlyPositive {
                op: "subinvariance_bound",
                index,
                value,
            });
        }
    }
    let gap = &(b * x) - &x.scale(alpha);
    Ok(gap.to_col_major().iter().all(|&g| g <= tol.order_tol))
}

/// Partial Neumann sum `I + X + ... + X^terms`.
pub fn neumann_partial_sum(x: &Matrix, terms: usize) -> Result<Matrix> {
    x.require_square("neumann_partial_sum")?;
    let n = x.rows();
    let mut sum = Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for _ in 0..terms {
        power = &power * x;
        sum = &sum + &power;
    }
    Ok(sum)
}

fn require_nonneg(h: &Matrix, op: &'static str, tol: &Tolerances) -> Result<()> {
    if is_nonneg(h, tol) {
        return Ok(());
    }
    for i in 0..h.rows() {
        for j in 0..h.cols() {
            let value = h.get(i, j);
            if value < -tol.order_tol {
                return Err(Error::NegativeEntry { op, row: i, col: j, value });
            }
        }
    }
    unreachable!("is_nonneg failed without a negative entry")
}
