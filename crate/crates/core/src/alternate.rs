//! Alternating iteration over two proper splittings `A = M - N = U - V`.
//!
//! One cycle applies the `M` splitting and then the `U` splitting:
//!
//! ```text
//! x_half = M^+ N x + M^+ b
//! x_next = U^+ V x_half + U^+ b
//! ```
//!
//! which collapses to the single stationary step
//! `x_next = H x + c b` with `H = U^+ V M^+ N` and `c = U^+ (V M^+ + I)`.
//! The induced splitting `A = B - C` with `B = M (M + U - A)^+ U` has `H` as
//! its iteration matrix when the range and null space of `M + U - A` match
//! those of `A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    has_positive_row_sums, is_nonneg, pinv, require_rhs, require_start, subspace_equal, Matrix, Tolerances,
};
use crate::solver::{run_affine, IterationReport, LeastSquaresTarget, StopRule};
use crate::spectral::spectral_radius;
use crate::splitting::{build_splitting, is_semimonotone, SplitClass, Splitting, RADIUS_ORDER_TOL};

#[derive(Debug, Clone)]
pub struct AlternatingScheme {
    a: Matrix,
    first: Splitting,
    second: Splitting,
    h: Matrix,
    c: Matrix,
}

impl AlternatingScheme {
    pub fn a(&self) -> &Matrix {
        &self.a
    }

    /// The splitting `A = M - N` applied first in each cycle.
    pub fn first(&self) -> &Splitting {
        &self.first
    }

    /// The splitting `A = U - V` applied second.
    pub fn second(&self) -> &Splitting {
        &self.second
    }

    /// `H = U^+ V M^+ N`, `n x n`.
    pub fn iteration_matrix(&self) -> &Matrix {
        &self.h
    }

    /// `c = U^+ (V M^+ + I)`, `n x m`.
    pub fn rhs_operator(&self) -> &Matrix {
        &self.c
    }

    /// One cycle written as its two half steps.
    pub fn half_steps(&self, x: &Matrix, b: &Matrix) -> Result<Matrix> {
        require_rhs(&self.a, b, "half_steps")?;
        require_start(&self.a, x, "half_steps")?;
        let m = &self.first;
        let u = &self.second;
        let half = &(m.iteration_matrix() * x) + &(m.u_pinv() * b);
        Ok(&(u.iteration_matrix() * &half) + &(u.u_pinv() * b))
    }

    /// One cycle in collapsed form `H x + c b`.
    pub fn step(&self, x: &Matrix, b: &Matrix) -> Result<Matrix> {
        require_rhs(&self.a, b, "step")?;
        require_start(&self.a, x, "step")?;
        Ok(&(&self.h * x) + &(&self.c * b))
    }
}

/// Builds the scheme for `A = M - N` (first) and `A = U - V` (second).
pub fn build_alternating(a: &Matrix, m: &Matrix, u: &Matrix, tol: &Tolerances) -> Result<AlternatingScheme> {
    let first = build_splitting(a, m, tol)?;
    let second = build_splitting(a, u, tol)?;
    first.require_proper("build_alternating (M splitting)")?;
    second.require_proper("build_alternating (U splitting)")?;
    Ok(from_splittings(first, second))
}

/// Scheme from two already validated proper splittings of the same matrix.
pub fn scheme_from_splittings(first: Splitting, second: Splitting, tol: &Tolerances) -> Result<AlternatingScheme> {
    first.require_proper("scheme_from_splittings")?;
    second.require_proper("scheme_from_splittings")?;
    first.a().require_same_shape("scheme_from_splittings", second.a())?;
    if first.a().max_abs_diff(second.a()) > tol.eq_tol {
        return Err(Error::MismatchedSystem("scheme_from_splittings"));
    }
    Ok(from_splittings(first, second))
}

fn from_splittings(first: Splitting, second: Splitting) -> AlternatingScheme {
    let a = first.a().clone();
    let h = second.iteration_matrix() * first.iteration_matrix();
    let m = a.rows();
    let c = second.u_pinv() * &(&(second.v() * first.u_pinv()) + &Matrix::identity(m));
    AlternatingScheme { a, first, second, h, c }
}

/// Iterates the collapsed cycle from `x0` (zero when `None`).
pub fn alternating_solve(
    sch: &AlternatingScheme,
    b: &Matrix,
    x0: Option<&Matrix>,
    stop: &StopRule,
) -> Result<IterationReport> {
    stop.validate()?;
    require_rhs(&sch.a, b, "alternating_solve")?;
    let zero = Matrix::zeros(sch.a.cols(), 1);
    let x0 = x0.unwrap_or(&zero);
    require_start(&sch.a, x0, "alternating_solve")?;
    let shift = &sch.c * b;
    Ok(run_affine(&sch.h, &shift, x0, stop, LeastSquaresTarget { a: &sch.a, rhs: b }))
}

/// Iterates `X <- H X + c` from `X = 0`; the limit is `A^+` when `rho(H) < 1`.
pub fn pinv_iteration(sch: &AlternatingScheme, stop: &StopRule) -> Result<IterationReport> {
    stop.validate()?;
    let (m, n) = sch.a.shape();
    let identity = Matrix::identity(m);
    Ok(run_affine(
        &sch.h,
        &sch.c,
        &Matrix::zeros(n, m),
        stop,
        LeastSquaresTarget {
            a: &sch.a,
            rhs: &identity,
        },
    ))
}

/// Hypotheses and outcome of the convergence theorem for the scheme:
/// two weak regular splittings of a semi-monotone matrix give `rho(H) < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceCheck {
    pub both_weak_regular: bool,
    pub semimonotone: bool,
    pub rho_h: f64,
    pub theorem_applies: bool,
}

impl ConvergenceCheck {
    pub fn sound(&self) -> bool {
        !self.theorem_applies || self.rho_h < 1.0
    }
}

pub fn convergence_check(sch: &AlternatingScheme, tol: &Tolerances) -> Result<ConvergenceCheck> {
    let both_weak_regular = sch.first.class().is_at_least(SplitClass::ProperWeakRegular)
        && sch.second.class().is_at_least(SplitClass::ProperWeakRegular);
    let semimonotone = is_semimonotone(&sch.a, tol)?;
    let rho_h = spectral_radius(&sch.h, tol)?;
    Ok(ConvergenceCheck {
        both_weak_regular,
        semimonotone,
        rho_h,
        theorem_applies: both_weak_regular && semimonotone,
    })
}

/// Max-entry residuals of the identities satisfied by the induced splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InducedIdentities {
    /// `|B^+ - U^+ (V M^+ + I)|`.
    pub pinv_vs_rhs_operator: f64,
    /// `|B^+ - (I - H) A^+|`.
    pub pinv_vs_projected: f64,
    /// `|B - A (I - H)^-1|`.
    pub b_vs_inverse_formula: f64,
    /// `|B^+ C - H|`.
    pub iteration_matrix: f64,
}

impl InducedIdentities {
    pub fn max(&self) -> f64 {
        [
            self.pinv_vs_rhs_operator,
            self.pinv_vs_projected,
            self.b_vs_inverse_formula,
            self.iteration_matrix,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn all_within(&self, eq_tol: f64) -> bool {
        self.max() <= eq_tol
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InducedSplitting {
    /// `B = M (M + U - A)^+ U`.
    pub b: Matrix,
    /// `C = B - A`.
    pub c: Matrix,
    pub h: Matrix,
    /// `R(M + U - A) = R(A)` and `N(M + U - A) = N(A)`.
    pub hypotheses_ok: bool,
    pub class: SplitClass,
    /// `B` computed the other way, as `A (I - H)^-1`.
    pub b_from_inverse: Matrix,
    pub identities: InducedIdentities,
}

pub fn induced_splitting(sch: &AlternatingScheme, tol: &Tolerances) -> Result<InducedSplitting> {
    const OP: &str = "induced_splitting";
    let rho = spectral_radius(&sch.h, tol)?;
    // a radius within rounding of 1 leaves I - H numerically singular
    if rho >= 1.0 - RADIUS_ORDER_TOL {
        return Err(Error::NotContractive { op: OP, rho });
    }
    let a = &sch.a;
    let m = sch.first.u();
    let u = sch.second.u();
    let n = a.cols();

    let sum = &(m + u) - a;
    let hypotheses_ok = subspace_equal(&sum, a, tol)?.both();
    let b = &(m * &pinv(&sum, tol)?) * u;
    let c = &b - a;

    let i_minus_h = &Matrix::identity(n) - &sch.h;
    let b_from_inverse = a * &i_minus_h.inverse()?;
    let b_pinv = pinv(&b, tol)?;
    let a_pinv = pinv(a, tol)?;
    let identities = InducedIdentities {
        pinv_vs_rhs_operator: b_pinv.max_abs_diff(&sch.c),
        pinv_vs_projected: b_pinv.max_abs_diff(&(&i_minus_h * &a_pinv)),
        b_vs_inverse_formula: b.max_abs_diff(&b_from_inverse),
        iteration_matrix: (&b_pinv * &c).max_abs_diff(&sch.h),
    };
    let class = build_splitting(a, &b, tol)?.class();
    Ok(InducedSplitting {
        b,
        c,
        h: sch.h.clone(),
        hypotheses_ok,
        class,
        b_from_inverse,
        identities,
    })
}

/// Which hypothesis set the composite comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompositeMode {
    /// `A >= 0`, both splittings regular, `A` semi-monotone, subspace condition.
    #[serde(rename = "main33")]
    NonnegativeMatrix,
    /// `A >= 0` replaced by positive row sums of `U^+` and `M^+`.
    #[serde(rename = "main333")]
    PositiveRowSums,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositeComparison {
    pub hypotheses_ok: bool,
    pub rho_h: f64,
    pub rho_uv: f64,
    pub rho_mn: f64,
    /// `rho_h <= min(rho_uv, rho_mn) < 1`.
    pub conclusion_ok: bool,
}

impl CompositeComparison {
    pub fn sound(&self) -> bool {
        !self.hypotheses_ok || self.conclusion_ok
    }
}

/// Compares `rho(H)` with the spectral radii of the two factors.
pub fn compare_composite(sch: &AlternatingScheme, mode: CompositeMode, tol: &Tolerances) -> Result<CompositeComparison> {
    let a = &sch.a;
    let rho_h = spectral_radius(&sch.h, tol)?;
    let rho_uv = spectral_radius(sch.second.iteration_matrix(), tol)?;
    let rho_mn = spectral_radius(sch.first.iteration_matrix(), tol)?;

    let both_regular = sch.first.class() == SplitClass::ProperRegular && sch.second.class() == SplitClass::ProperRegular;
    let common = both_regular
        && is_semimonotone(a, tol)?
        && subspace_equal(&(&(sch.first.u() + sch.second.u()) - a), a, tol)?.both();
    let hypotheses_ok = common
        && match mode {
            CompositeMode::NonnegativeMatrix => is_nonneg(a, tol),
            CompositeMode::PositiveRowSums => {
                has_positive_row_sums(sch.second.u_pinv(), tol) && has_positive_row_sums(sch.first.u_pinv(), tol)
            }
        };
    let min = rho_uv.min(rho_mn);
    Ok(CompositeComparison {
        hypotheses_ok,
        rho_h,
        rho_uv,
        rho_mn,
        conclusion_ok: rho_h <= min + RADIUS_ORDER_TOL && min < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::StopReason;
    use proptest::prelude::*;

    fn m<const C: usize>(rows: &[[f64; C]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn col(v: &[f64]) -> Matrix {
        Matrix::column(v).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn regular_pair() -> AlternatingScheme {
        build_alternating(
            &m(&[[2., -1., 0.], [-1., 2., 0.]]),
            &m(&[[2., -1., 0.], [-1., 3., 0.]]),
            &m(&[[3., -1., 0.], [-1., 3., 0.]]),
            &tol(),
        )
        .unwrap()
    }

    fn non_composing_pair() -> AlternatingScheme {
        build_alternating(
            &m(&[[2., -1.], [-1., 2.]]),
            &m(&[[2., 1.], [-1., 1.]]),
            &m(&[[1., -1.], [1., 2.]]),
            &tol(),
        )
        .unwrap()
    }

    fn not_regular_pair() -> AlternatingScheme {
        let a = m(&[[1., 0., 0.], [0., 0., 0.]]);
        build_alternating(&a, &a.scale(2.0), &a.scale(-1.0), &tol()).unwrap()
    }

    // A^+ = A^T (A A^T)^-1 for the full-row-rank matrix of the regular pair
    fn regular_pair_pinv() -> Matrix {
        m(&[[2. / 3., 1. / 3.], [1. / 3., 2. / 3.], [0., 0.]])
    }

    #[test]
    fn full_row_rank_oracle() {
        let a = m(&[[2., -1., 0.], [-1., 2., 0.]]);
        let oracle = &a.transpose() * &(&a * &a.transpose()).inverse().unwrap();
        assert!(oracle.max_abs_diff(&regular_pair_pinv()) < 1e-15);
    }

    #[test]
    fn composite_matrices() {
        let sch = regular_pair();
        let h = m(&[[0., 1. / 8., 0.], [0., 7. / 40., 0.], [0., 0., 0.]]);
        assert!(sch.iteration_matrix().max_abs_diff(&h) < 1e-14);
        assert!((spectral_radius(sch.iteration_matrix(), &tol()).unwrap() - 7. / 40.).abs() < 1e-12);

        let rho = spectral_radius(non_composing_pair().iteration_matrix(), &tol()).unwrap();
        assert!((rho - 1.0).abs() < 1e-9);

        let a = m(&[[2., -1., 0.], [-1., 2., 0.]]);
        let trivial = build_alternating(&a, &a, &a, &tol()).unwrap();
        assert_eq!(trivial.iteration_matrix().max_abs(), 0.0);
    }

    #[test]
    fn rejects_improper_splittings() {
        let a = Matrix::identity(2);
        let bad = m(&[[1., 0.], [0., 0.]]);
        assert!(matches!(build_alternating(&a, &bad, &a, &tol()), Err(Error::NotProper(_))));
        assert!(matches!(build_alternating(&a, &a, &bad, &tol()), Err(Error::NotProper(_))));
    }

    #[test]
    fn half_steps_match_collapsed_step() {
        let sch = regular_pair();
        let x = col(&[0.3, -1.2, 4.0]);
        let b = col(&[1.5, -0.5]);
        let two = sch.half_steps(&x, &b).unwrap();
        let one = sch.step(&x, &b).unwrap();
        assert!(two.max_abs_diff(&one) < 1e-13);
    }

    #[test]
    fn solve_regular_pair() {
        let r = alternating_solve(&regular_pair(), &col(&[1., 1.]), None, &StopRule::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 200);
        assert!(r.final_iterate.max_abs_diff(&col(&[1., 1., 0.])) < 1e-8);
    }

    #[test]
    fn solve_zero_rhs() {
        let r = alternating_solve(&regular_pair(), &col(&[0., 0.]), None, &StopRule::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.final_iterate.max_abs(), 0.0);
    }

    #[test]
    fn solve_non_composing_pair_does_not_converge() {
        let r = alternating_solve(&non_composing_pair(), &col(&[1., 2.]), None, &StopRule::default()).unwrap();
        assert_eq!(r.stop_reason, StopReason::MaxIters);
        assert!(!r.converged);
    }

    #[test]
    fn convergence_check_examples() {
        let c = convergence_check(&regular_pair(), &tol()).unwrap();
        assert!(c.theorem_applies && c.rho_h < 1.0);
        assert!((c.rho_h - 0.175).abs() < 1e-12);

        let sch = build_alternating(
            &m(&[[1., 0., 1.], [0., 1., 1.]]),
            &m(&[[4., 0., 4.], [2., 2., 4.]]),
            &m(&[[2., 0., 2.], [1., 2., 3.]]),
            &tol(),
        )
        .unwrap();
        let c = convergence_check(&sch, &tol()).unwrap();
        assert!(!c.theorem_applies);
        assert!((c.rho_h - 3. / 8.).abs() < 1e-9);
        assert!(!is_nonneg(sch.first().u_pinv(), &tol()));
        assert!(!is_nonneg(sch.second().u_pinv(), &tol()));

        let c = convergence_check(&not_regular_pair(), &tol()).unwrap();
        assert!(!c.theorem_applies);
        assert!((c.rho_h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn induced_splitting_of_regular_pair() {
        let ind = induced_splitting(&regular_pair(), &tol()).unwrap();
        let expected_b = m(&[[2., -10. / 11., 0.], [-1., 25. / 11., 0.]]);
        assert!(ind.b.max_abs_diff(&expected_b) < 1e-12);
        assert!(ind.b_from_inverse.max_abs_diff(&expected_b) < 1e-12);
        let expected_b_pinv = m(&[[5. / 8., 1. / 4.], [11. / 40., 11. / 20.], [0., 0.]]);
        assert!(pinv(&ind.b, &tol()).unwrap().max_abs_diff(&expected_b_pinv) < 1e-12);
        assert!(ind.hypotheses_ok);
        // C = [[0, 1/11, 0], [0, 3/11, 0]] >= 0, so B is regular and hence weak regular
        assert!(ind.c.max_abs_diff(&m(&[[0., 1. / 11., 0.], [0., 3. / 11., 0.]])) < 1e-12);
        assert_eq!(ind.class, SplitClass::ProperRegular);
        assert!(ind.class.is_at_least(SplitClass::ProperWeakRegular));
        assert!(ind.identities.all_within(1e-10), "{:?}", ind.identities);
    }

    #[test]
    fn induced_splitting_trivial_and_uniqueness() {
        let a = m(&[[2., -1., 0.], [-1., 2., 0.]]);
        let sch = build_alternating(&a, &a, &a, &tol()).unwrap();
        let ind = induced_splitting(&sch, &tol()).unwrap();
        assert!(ind.b.max_abs_diff(&a) < 1e-13);
        assert!(ind.c.max_abs() < 1e-13);
        assert_eq!(ind.h.max_abs(), 0.0);

        // B (I - H) = A pins B down: a perturbation with dB (I - H) != 0 breaks it
        let ind = induced_splitting(&regular_pair(), &tol()).unwrap();
        let i_minus_h = &Matrix::identity(3) - &ind.h;
        assert!((&ind.b * &i_minus_h).max_abs_diff(&a) < 1e-12);
        let db = m(&[[0., 1e-3, 0.], [0., 0., 0.]]);
        let perturbed = &ind.b + &db;
        assert!((&db * &i_minus_h).max_abs() > 1e-4);
        assert!((&perturbed * &i_minus_h).max_abs_diff(&a) > 1e-4);
    }

    #[test]
    fn induced_splitting_requires_contraction() {
        assert!(matches!(
            induced_splitting(&non_composing_pair(), &tol()),
            Err(Error::NotContractive { .. })
        ));
    }

    #[test]
    fn composite_comparison_examples() {
        let c = compare_composite(&regular_pair(), CompositeMode::NonnegativeMatrix, &tol()).unwrap();
        assert!(!c.hypotheses_ok);
        assert!(c.conclusion_ok);
        assert!((c.rho_h - 7. / 40.).abs() < 1e-12);
        assert!((c.rho_uv - 0.5).abs() < 1e-12);
        assert!((c.rho_mn - 0.4).abs() < 1e-12);

        let sch = build_alternating(
            &m(&[[1., -2., 3.], [2., 3., 4.]]),
            &m(&[[1., -2., 3.], [-4., -6., -8.]]),
            &m(&[[3., -6., 9.], [5., 7.5, 10.]]),
            &tol(),
        )
        .unwrap();
        let c = compare_composite(&sch, CompositeMode::NonnegativeMatrix, &tol()).unwrap();
        assert!(!c.hypotheses_ok);
        assert!((c.rho_h - 0.9).abs() < 1e-9);

        let c = compare_composite(&not_regular_pair(), CompositeMode::NonnegativeMatrix, &tol()).unwrap();
        assert!(!c.hypotheses_ok && !c.conclusion_ok);
        assert!((c.rho_h - 1.0).abs() < 1e-12);
        assert!((c.rho_uv - 2.0).abs() < 1e-12);
        assert!((c.rho_mn - 0.5).abs() < 1e-12);
        assert!(c.sound());
    }

    #[test]
    fn composite_comparison_with_row_sums() {
        // nonnegative rank-one A: both scaling splittings regular
        let a = m(&[[1., 1.], [1., 1.]]);
        let sch = build_alternating(&a, &a.scale(2.0), &a.scale(4.0), &tol()).unwrap();
        for mode in [CompositeMode::NonnegativeMatrix, CompositeMode::PositiveRowSums] {
            let c = compare_composite(&sch, mode, &tol()).unwrap();
            assert!(c.hypotheses_ok && c.conclusion_ok, "{mode:?} {c:?}");
            // (1 - 1/2)(1 - 1/4)
            assert!((c.rho_h - 0.375).abs() < 1e-12);
        }
    }

    #[test]
    fn pinv_iteration_examples() {
        let r = pinv_iteration(&regular_pair(), &StopRule::default()).unwrap();
        assert!(r.converged);
        assert!((&r.final_iterate - &regular_pair_pinv()).frobenius() < 1e-8);

        let a = m(&[[2., -1., 0.], [-1., 2., 0.]]);
        let sch = build_alternating(&a, &a, &a, &tol()).unwrap();
        let one = StopRule {
            max_iters: 1,
            ..StopRule::default()
        };
        let r = pinv_iteration(&sch, &one).unwrap();
        assert!(r.final_iterate.max_abs_diff(&regular_pair_pinv()) < 1e-14);
        let r = pinv_iteration(&sch, &StopRule::default()).unwrap();
        assert!(r.converged && r.iterations == 2);

        let r = pinv_iteration(&non_composing_pair(), &StopRule::default()).unwrap();
        assert_eq!(r.stop_reason, StopReason::MaxIters);
    }

    fn dense(rows: usize, cols: usize, vals: &[f64]) -> Matrix {
        Matrix::from_row_major(rows, cols, vals).unwrap()
    }

    prop_compose! {
        // A well-conditioned A with two range- and kernel-preserving perturbations of it
        fn proper_pair()(rows in 1usize..=4, cols in 1usize..=4)
            (a in prop::collection::vec(-3.0f64..3.0, rows * cols),
             e in prop::collection::vec(0.0f64..1.0, 2 * rows * cols),
             t in prop::collection::vec(-0.4f64..0.4, 2),
             rows in Just(rows), cols in Just(cols))
            -> (Matrix, Matrix, Matrix)
        {
            let a = dense(rows, cols, &a);
            let ap = pinv(&a, &tol()).unwrap();
            let p = &a * &ap;
            let q = &ap * &a;
            let perturb = |k: usize| {
                let e = dense(rows, cols, &e[k * rows * cols..(k + 1) * rows * cols]);
                &a + &(&(&p * &e) * &q).scale(t[k] * a.max_abs())
            };
            (perturb(0), perturb(1), a)
        }
    }

    fn well_conditioned(x: &Matrix) -> bool {
        let s = x.singular_values().unwrap();
        let k = x.rows().min(x.cols());
        s[0] > 1e-2 && s[k - 1] >= 1e-2 * s[0]
    }

    proptest! {
        #[test]
        fn pinv_solution_is_a_fixed_point((m, u, a) in proper_pair(), b in prop::collection::vec(-2.0f64..2.0, 4)) {
            prop_assume!(well_conditioned(&a) && well_conditioned(&m) && well_conditioned(&u));
            let Ok(sch) = build_alternating(&a, &m, &u, &tol()) else { return Ok(()) };
            let ap = pinv(&a, &tol()).unwrap();
            let projected = &(&Matrix::identity(a.cols()) - sch.iteration_matrix()) * &ap;
            let scale = 1.0 + sch.rhs_operator().max_abs() + sch.iteration_matrix().max_abs() * ap.max_abs();
            prop_assert!(projected.max_abs_diff(sch.rhs_operator()) <= 1e-9 * scale);

            let b = Matrix::column(&b[..a.rows()]).unwrap();
            let x = &ap * &b;
            let next = sch.step(&x, &b).unwrap();
            prop_assert!(next.max_abs_diff(&x) <= 1e-9 * scale * (1.0 + b.max_abs()));
        }

        #[test]
        fn half_steps_agree_with_step((m, u, a) in proper_pair(), v in prop::collection::vec(-2.0f64..2.0, 8)) {
            prop_assume!(well_conditioned(&a) && well_conditioned(&m) && well_conditioned(&u));
            let Ok(sch) = build_alternating(&a, &m, &u, &tol()) else { return Ok(()) };
            let x = Matrix::column(&v[..a.cols()]).unwrap();
            let b = Matrix::column(&v[4..4 + a.rows()]).unwrap();
            let two = sch.half_steps(&x, &b).unwrap();
            let one = sch.step(&x, &b).unwrap();
            let scale = 1.0 + sch.iteration_matrix().max_abs() + sch.rhs_operator().max_abs();
            prop_assert!(two.max_abs_diff(&one) <= 1e-10 * scale * 4.0);
        }
    }
}
