//! Stationary iteration `x <- Hx + c` and least-squares solution checks.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{pinv, require_rhs, require_start, Matrix, Tolerances};
use crate::splitting::Splitting;

/// Residual history keeps at most this many of the latest entries.
pub const HISTORY_CAP: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub max_iters: usize,
    /// Stop once `|x_{k+1} - x_k| <= rel_tol (1 + |x_{k+1}|)`.
    pub rel_tol: f64,
    /// Declare divergence once `|x| > overflow_guard (1 + |b|)`.
    pub overflow_guard: f64,
    /// Relative normal-equation residual an iterate must reach before a
    /// small step counts as convergence.
    pub residual_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            max_iters: 10_000,
            rel_tol: 1e-10,
            overflow_guard: 1e12,
            residual_tol: 1e-6,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        for (name, value) in [
            ("rel_tol", self.rel_tol),
            ("overflow_guard", self.overflow_guard),
            ("residual_tol", self.residual_tol),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ToleranceMet,
    MaxIters,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub final_iterate: Matrix,
    /// Successive step sizes `|x_{k+1} - x_k|`, last [`HISTORY_CAP`] entries.
    pub residual_history: Vec<f64>,
}

/// The least-squares problem `min |A X - R|` an iteration is meant to solve;
/// accepted limits satisfy the normal equations `A^T (A X - R) = 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LeastSquaresTarget<'a> {
    pub a: &'a Matrix,
    pub rhs: &'a Matrix,
}

impl LeastSquaresTarget<'_> {
    fn accepts(&self, x: &Matrix, residual_tol: f64) -> bool {
        let normal = &self.a.transpose() * &(&(self.a * x) - self.rhs);
        let na = self.a.frobenius();
        let scale = 1.0 + na * (na * x.frobenius() + self.rhs.frobenius());
        normal.frobenius() <= residual_tol * scale
    }
}

/// Runs `x <- h x + shift` from `x0`.
///
/// A small step is only accepted as convergence when the iterate also
/// satisfies the normal equations of `target`; an iteration with
/// `rho(h) = 1` can stall at a fixed point that is not a least-squares
/// solution, and that must not be reported as converged.
pub(crate) fn run_affine(
    h: &Matrix,
    shift: &Matrix,
    x0: &Matrix,
    stop: &StopRule,
    target: LeastSquaresTarget<'_>,
) -> IterationReport {
    let guard = stop.overflow_guard * (1.0 + target.rhs.frobenius());
    let mut history = VecDeque::with_capacity(HISTORY_CAP.min(stop.max_iters));
    let mut x = x0.clone();
    for k in 1..=stop.max_iters {
        let next = &(h * &x) + shift;
        let next_norm = next.frobenius();
        if !next.is_finite() || next_norm > guard {
            if next.is_finite() {
                x = next;
            }
            return finish(k, StopReason::Diverged, x, history);
        }
        let step = (&next - &x).frobenius();
        if history.len() == HISTORY_CAP {
            history.pop_front();
        }
        history.push_back(step);
        x = next;
        if step <= stop.rel_tol * (1.0 + next_norm) && target.accepts(&x, stop.residual_tol) {
            return finish(k, StopReason::ToleranceMet, x, history);
        }
    }
    finish(stop.max_iters, StopReason::MaxIters, x, history)
}

fn finish(iterations: usize, stop_reason: StopReason, x: Matrix, history: VecDeque<f64>) -> IterationReport {
    IterationReport {
        iterations,
        converged: stop_reason == StopReason::ToleranceMet,
        stop_reason,
        final_iterate: x,
        residual_history: history.into(),
    }
}

/// Iterates `x <- U^+V x + U^+ b` for a proper splitting. Starts from zero
/// when `x0` is `None`.
pub fn stationary_solve(
    s: &Splitting,
    b: &Matrix,
    x0: Option<&Matrix>,
    stop: &StopRule,
) -> Result<IterationReport> {
    s.require_proper("stationary_solve")?;
    stop.validate()?;
    require_rhs(s.a(), b, "stationary_solve")?;
    let zero = Matrix::zeros(s.a().cols(), 1);
    let x0 = x0.unwrap_or(&zero);
    require_start(s.a(), x0, "stationary_solve")?;
    let shift = s.u_pinv() * b;
    Ok(run_affine(
        s.iteration_matrix(),
        &shift,
        x0,
        stop,
        LeastSquaresTarget { a: s.a(), rhs: b },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionCheck {
    /// `|A^T (A x - b)|_2`.
    pub normal_residual: f64,
    /// `x` lies in `R(A^T)`.
    pub in_rowspace: bool,
    /// `x` equals `A^+ b`.
    pub matches_pinv_solution: bool,
}

pub fn verify_solution(a: &Matrix, b: &Matrix, x: &Matrix, tol: &Tolerances) -> Result<SolutionCheck> {
    require_rhs(a, b, "verify_solution")?;
    require_start(a, x, "verify_solution")?;
    let g = pinv(a, tol)?;
    let normal_residual = (&a.transpose() * &(&(a * x) - b)).frobenius();
    let projected = &(&g * a) * x;
    let reference = &g * b;
    Ok(SolutionCheck {
        normal_residual,
        in_rowspace: (&projected - x).frobenius() <= tol.eq_tol * (1.0 + x.frobenius()),
        matches_pinv_solution: (x - &reference).frobenius() <= tol.eq_tol * (1.0 + reference.frobenius()),
    })
}
