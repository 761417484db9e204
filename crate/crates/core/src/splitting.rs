//! Proper splittings `A = U - V` of rectangular matrices.
//!
//! A splitting is proper when `R(U) = R(A)` and `N(U) = N(A)`. Its iteration
//! matrix is `U^+ V`. The classes form a chain of predicates:
//! regular (`U^+ >= 0`, `V >= 0`) implies weak regular (`U^+ >= 0`,
//! `U^+ V >= 0`) implies nonnegative (`U^+ V >= 0`).

use faer::c64 as Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{dominates, has_positive_row_sums, is_nonneg, pinv, subspace_equal, Matrix, Tolerances};
use crate::spectral::{eigenvalues, spectral_radius};

/// Absolute tolerance for the spectral-radius formulas of the chain.
pub const RADIUS_FORMULA_TOL: f64 = 1e-8;
/// Slack in `rho_1 <= rho_2` comparisons.
pub const RADIUS_ORDER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SplitClass {
    NotProper,
    Proper,
    ProperNonnegative,
    ProperWeakRegular,
    ProperRegular,
}

impl SplitClass {
    pub fn name(self) -> &'static str {
        match self {
            SplitClass::NotProper => "NotProper",
            SplitClass::Proper => "Proper",
            SplitClass::ProperNonnegative => "ProperNonnegative",
            SplitClass::ProperWeakRegular => "ProperWeakRegular",
            SplitClass::ProperRegular => "ProperRegular",
        }
    }

    pub fn is_at_least(self, other: SplitClass) -> bool {
        self >= other
    }
}

impl std::fmt::Display for SplitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SplitClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            SplitClass::NotProper,
            SplitClass::Proper,
            SplitClass::ProperNonnegative,
            SplitClass::ProperWeakRegular,
            SplitClass::ProperRegular,
        ]
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown splitting class {s:?}")))
    }
}

/// A validated splitting `A = U - V`; `V` is always derived as `U - A`.
#[derive(Debug, Clone)]
pub struct Splitting {
    a: Matrix,
    u: Matrix,
    v: Matrix,
    u_pinv: Matrix,
    h: Matrix,
    proper: bool,
    class: SplitClass,
}

impl Splitting {
    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// `U^+`.
    pub fn u_pinv(&self) -> &Matrix {
        &self.u_pinv
    }

    /// Iteration matrix `U^+ V`.
    pub fn iteration_matrix(&self) -> &Matrix {
        &self.h
    }

    pub fn is_proper(&self) -> bool {
        self.proper
    }

    pub fn class(&self) -> SplitClass {
        self.class
    }

    pub(crate) fn require_proper(&self, op: &'static str) -> Result<()> {
        if self.proper {
            Ok(())
        } else {
            Err(Error::NotProper(op))
        }
    }

    fn require_class(&self, op: &'static str, required: SplitClass) -> Result<()> {
        if self.class >= required {
            Ok(())
        } else {
            Err(Error::ClassTooWeak {
                op,
                required,
                found: self.class,
            })
        }
    }
}

pub fn build_splitting(a: &Matrix, u: &Matrix, tol: &Tolerances) -> Result<Splitting> {
    a.require_same_shape("build_splitting", u)?;
    let v = u - a;
    let proper = subspace_equal(a, u, tol)?.both();
    let u_pinv = pinv(u, tol)?;
    let h = &u_pinv * &v;
    let mut s = Splitting {
        a: a.clone(),
        u: u.clone(),
        v,
        u_pinv,
        h,
        proper,
        class: SplitClass::NotProper,
    };
    s.class = classify(&s, tol);
    Ok(s)
}

/// Strongest class whose defining predicate holds.
pub fn classify(s: &Splitting, tol: &Tolerances) -> SplitClass {
    if !s.proper {
        return SplitClass::NotProper;
    }
    let u_pinv_nonneg = is_nonneg(&s.u_pinv, tol);
    let h_nonneg = is_nonneg(&s.h, tol);
    if u_pinv_nonneg && is_nonneg(&s.v, tol) {
        SplitClass::ProperRegular
    } else if u_pinv_nonneg && h_nonneg {
        SplitClass::ProperWeakRegular
    } else if h_nonneg {
        SplitClass::ProperNonnegative
    } else {
        SplitClass::Proper
    }
}

/// The three proper-splitting identities, evaluated numerically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityChecks {
    /// `A = U (I - U^+ V)`.
    pub factorization: bool,
    /// `I - U^+ V` is invertible.
    pub invertible: bool,
    /// `A^+ = (I - U^+ V)^-1 U^+`.
    pub pinv_formula: bool,
    pub factorization_residual: f64,
    pub pinv_residual: f64,
    pub min_singular_value: f64,
}

impl IdentityChecks {
    pub fn all(&self) -> bool {
        self.factorization && self.invertible && self.pinv_formula
    }
}

pub fn iteration_identities(s: &Splitting, tol: &Tolerances) -> Result<(Matrix, IdentityChecks)> {
    s.require_proper("iteration_identities")?;
    let n = s.a.cols();
    let h = s.h.clone();
    let i_minus_h = &Matrix::identity(n) - &h;

    let factorization_residual = (&s.u * &i_minus_h).max_abs_diff(&s.a);
    let min_singular_value = i_minus_h.singular_values()?.last().copied().unwrap_or(0.0);
    let invertible = min_singular_value > tol.subspace_tol;
    let pinv_residual = match i_minus_h.inverse() {
        Ok(inv) => (&inv * &s.u_pinv).max_abs_diff(&pinv(&s.a, tol)?),
        Err(_) => f64::INFINITY,
    };
    let checks = IdentityChecks {
        factorization: factorization_residual <= tol.eq_tol,
        invertible,
        pinv_formula: pinv_residual <= tol.eq_tol,
        factorization_residual,
        pinv_residual,
        min_singular_value,
    };
    Ok((h, checks))
}

/// `A^+ >= 0`.
pub fn is_semimonotone(a: &Matrix, tol: &Tolerances) -> Result<bool> {
    Ok(is_nonneg(&pinv(a, tol)?, tol))
}

/// Both sides of "`A^+ >= 0` iff `rho(U^+ V) < 1`" for a (weak) regular splitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Characterization {
    pub semimonotone: bool,
    pub rho_lt_1: bool,
    pub agrees: bool,
    pub rho: f64,
}

pub fn convergence_characterization(s: &Splitting, tol: &Tolerances) -> Result<Characterization> {
    s.require_class("convergence_characterization", SplitClass::ProperWeakRegular)?;
    let semimonotone = is_semimonotone(&s.a, tol)?;
    let rho = spectral_radius(&s.h, tol)?;
    let rho_lt_1 = rho < 1.0;
    Ok(Characterization {
        semimonotone,
        rho_lt_1,
        agrees: semimonotone == rho_lt_1,
        rho,
    })
}

/// Conditions (a) through (g) of the weak regular implication chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    /// `A^+ U >= 0`.
    pub a: bool,
    /// `rho(U^+V) = (rho(A^+U) - 1) / rho(A^+U)`.
    pub b: bool,
    /// `rho(U^+V) < 1`.
    pub c: bool,
    /// `(I - U^+V)^-1 >= 0`.
    pub d: bool,
    /// `A^+ V >= 0`.
    pub e: bool,
    /// `A^+ V >= U^+ V`.
    pub f: bool,
    /// `rho(U^+V) = rho(A^+V) / (1 + rho(A^+V)) < 1`.
    pub g: bool,
    pub rho_udagv: f64,
    pub rho_adagv: f64,
    pub rho_adagu: f64,
}

impl ChainReport {
    pub fn flags(&self) -> [bool; 7] {
        [self.a, self.b, self.c, self.d, self.e, self.f, self.g]
    }

    /// The implication chain: once a condition holds, every later one does.
    pub fn chain_consistent(&self) -> bool {
        let flags = self.flags();
        flags
            .iter()
            .position(|&f| f)
            .is_none_or(|first| flags[first..].iter().all(|&f| f))
    }
}

pub fn weak_regular_chain(s: &Splitting, tol: &Tolerances) -> Result<ChainReport> {
    s.require_class("weak_regular_chain", SplitClass::ProperWeakRegular)?;
    let n = s.a.cols();
    let a_pinv = pinv(&s.a, tol)?;
    let adag_u = &a_pinv * &s.u;
    let adag_v = &a_pinv * &s.v;

    let rho_udagv = spectral_radius(&s.h, tol)?;
    let rho_adagu = spectral_radius(&adag_u, tol)?;
    let rho_adagv = spectral_radius(&adag_v, tol)?;

    let b = rho_adagu > 0.0 && (rho_udagv - (rho_adagu - 1.0) / rho_adagu).abs() <= RADIUS_FORMULA_TOL;
    let c = rho_udagv < 1.0;
    let d = (&Matrix::identity(n) - &s.h)
        .inverse()
        .map(|inv| is_nonneg(&inv, tol))
        .unwrap_or(false);
    let g = c && (rho_udagv - rho_adagv / (1.0 + rho_adagv)).abs() <= RADIUS_FORMULA_TOL;

    Ok(ChainReport {
        a: is_nonneg(&adag_u, tol),
        b,
        c,
        d,
        e: is_nonneg(&adag_v, tol),
        f: dominates(&adag_v, &s.h, tol)?,
        g,
        rho_udagv,
        rho_adagv,
        rho_adagu,
    })
}

/// Whether each nonzero eigenvalue `mu` of `U^+V` equals `lambda / (1 + lambda)`
/// for some eigenvalue `lambda` of `A^+V`, and conversely
/// `lambda = mu / (1 - mu)`; also that no `lambda` equals `-1`.
pub fn eigenvalue_relation(s: &Splitting, tol: &Tolerances, match_tol: f64) -> Result<bool> {
    s.require_proper("eigenvalue_relation")?;
    let a_pinv = pinv(&s.a, tol)?;
    let to_complex = |m: &Matrix| -> Result<Vec<Complex>> {
        Ok(eigenvalues(m, tol)?
            .eigenvalues
            .unwrap_or_default()
            .into_iter()
            .map(|(re, im)| Complex::new(re, im))
            .collect())
    };
    let mus = to_complex(&s.h)?;
    let lambdas = to_complex(&(&a_pinv * &s.v))?;
    let one = Complex::new(1.0, 0.0);
    if lambdas.iter().any(|l| (l + one).norm() <= match_tol) {
        return Ok(false);
    }
    let nonzero = |z: &&Complex| z.norm() > match_tol;
    let forward = mus
        .iter()
        .filter(nonzero)
        .all(|mu| lambdas.iter().any(|l| (mu - l / (one + l)).norm() <= match_tol * (1.0 + mu.norm())));
    let backward = lambdas.iter().filter(nonzero).all(|l| {
        mus.iter()
            .any(|mu| (mu - one).norm() > match_tol && (l - mu / (one - mu)).norm() <= match_tol * (1.0 + l.norm()))
    });
    Ok(forward && backward)
}

/// Which comparison theorem to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComparisonMode {
    /// Hypotheses `A >= 0` and `B^+ >= U^+`.
    #[serde(rename = "tcomp1")]
    NonnegativeMatrix,
    /// Hypotheses `B^+ >= U^+` and every row sum of `U^+` positive.
    #[serde(rename = "tcomp2")]
    PositiveRowSums,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub hypotheses_ok: bool,
    pub rho_b: f64,
    pub rho_u: f64,
    /// `rho_b <= rho_u < 1`.
    pub conclusion_ok: bool,
}

impl Comparison {
    /// The theorem assertion: hypotheses imply the conclusion.
    pub fn sound(&self) -> bool {
        !self.hypotheses_ok || self.conclusion_ok
    }
}

/// Compares a weak regular splitting `A = B - C` against a regular splitting
/// `A = U - V` of the same semi-monotone `A`.
pub fn compare_splittings(
    sb: &Splitting,
    su: &Splitting,
    mode: ComparisonMode,
    tol: &Tolerances,
) -> Result<Comparison> {
    const OP: &str = "compare_splittings";
    sb.a.require_same_shape(OP, &su.a)?;
    if sb.a.max_abs_diff(&su.a) > tol.eq_tol {
        return Err(Error::MismatchedSystem(OP));
    }
    sb.require_class(OP, SplitClass::ProperWeakRegular)?;
    su.require_class(OP, SplitClass::ProperRegular)?;
    if !is_semimonotone(&su.a, tol)? {
        return Err(Error::NotSemimonotone(OP));
    }

    let b_dominates = dominates(&sb.u_pinv, &su.u_pinv, tol)?;
    let hypotheses_ok = match mode {
        ComparisonMode::NonnegativeMatrix => b_dominates && is_nonneg(&su.a, tol),
        ComparisonMode::PositiveRowSums => b_dominates && has_positive_row_sums(&su.u_pinv, tol),
    };
    let rho_b = spectral_radius(&sb.h, tol)?;
    let rho_u = spectral_radius(&su.h, tol)?;
    Ok(Comparison {
        hypotheses_ok,
        rho_b,
        rho_u,
        conclusion_ok: rho_b <= rho_u + RADIUS_ORDER_TOL && rho_u < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m<const C: usize>(rows: &[[f64; C]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn weak_example() -> Splitting {
        let a = m(&[[9., -8., 15.], [-6., 6., -10.]]);
        let u = m(&[[6., -4., 10.], [-3., 4., -5.]]);
        build_splitting(&a, &u, &tol()).unwrap()
    }

    fn rank_one() -> Matrix {
        m(&[[0., 2., 1.], [0., 4., 2.]])
    }

    fn ones2() -> Matrix {
        m(&[[1., 1.], [1., 1.]])
    }

    #[test]
    fn build_examples() {
        let s = weak_example();
        assert!(s.is_proper());
        assert_eq!(s.v(), &m(&[[-3., 4., -5.], [3., -2., 5.]]));

        let a = m(&[[1., 0., 0.], [0., 0., 0.]]);
        let s = build_splitting(&a, &a.scale(-1.0), &tol()).unwrap();
        assert!(s.is_proper());
        assert_eq!(s.v(), &a.scale(-2.0));

        let s = build_splitting(&Matrix::identity(2), &m(&[[1., 0.], [0., 0.]]), &tol()).unwrap();
        assert!(!s.is_proper());
        assert_eq!(s.class(), SplitClass::NotProper);

        assert!(matches!(
            build_splitting(&Matrix::identity(2), &Matrix::identity(3), &tol()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(weak_example().class(), SplitClass::ProperWeakRegular);

        let a = rank_one();
        let s = build_splitting(&a, &a.scale(2.0), &tol()).unwrap();
        assert_eq!(s.class(), SplitClass::ProperRegular);

        let a = m(&[[1., 0., 0.], [0., 0., 0.]]);
        let s = build_splitting(&a, &a.scale(-1.0), &tol()).unwrap();
        assert_eq!(s.class(), SplitClass::ProperNonnegative);
        assert_eq!(classify(&s, &tol()), s.class());
    }

    #[test]
    fn class_order_and_names() {
        assert!(SplitClass::ProperRegular > SplitClass::ProperWeakRegular);
        assert!(SplitClass::ProperWeakRegular.is_at_least(SplitClass::ProperNonnegative));
        assert!(!SplitClass::Proper.is_at_least(SplitClass::ProperNonnegative));
        assert_eq!("ProperWeakRegular".parse::<SplitClass>().unwrap(), SplitClass::ProperWeakRegular);
        assert!("Regular".parse::<SplitClass>().is_err());
    }

    #[test]
    fn identities_examples() {
        let (h, checks) = iteration_identities(&weak_example(), &tol()).unwrap();
        let expected = m(&[[0., 3. / 17., 0.], [3. / 4., 0., 5. / 4.], [0., 5. / 17., 0.]]);
        assert!(h.max_abs_diff(&expected) < 1e-12, "{h:?}");
        assert!(checks.all(), "{checks:?}");

        let a = rank_one();
        let (h, checks) = iteration_identities(&build_splitting(&a, &a, &tol()).unwrap(), &tol()).unwrap();
        assert_eq!(h.max_abs(), 0.0);
        assert!(checks.all());

        let s = build_splitting(&a, &a.scale(2.0), &tol()).unwrap();
        let (h, checks) = iteration_identities(&s, &tol()).unwrap();
        let half_projector = &pinv(&a, &tol()).unwrap() * &a;
        assert!(h.max_abs_diff(&half_projector.scale(0.5)) < 1e-13);
        assert!(checks.all());

        let np = build_splitting(&Matrix::identity(2), &m(&[[1., 0.], [0., 0.]]), &tol()).unwrap();
        assert!(matches!(iteration_identities(&np, &tol()), Err(Error::NotProper(_))));
    }

    #[test]
    fn semimonotone_examples() {
        assert!(is_semimonotone(&ones2(), &tol()).unwrap());
        assert!(is_semimonotone(&m(&[[9., -8., 15.], [-6., 6., -10.]]), &tol()).unwrap());
        // inverse [[1, -2], [0, 1]]
        assert!(!is_semimonotone(&m(&[[1., 2.], [0., 1.]]), &tol()).unwrap());
        // inverse [[1, 2], [0, 1]]
        assert!(is_semimonotone(&m(&[[1., -2.], [0., 1.]]), &tol()).unwrap());
    }

    #[test]
    fn characterization_examples() {
        let c = convergence_characterization(&weak_example(), &tol()).unwrap();
        assert!(c.semimonotone && c.rho_lt_1 && c.agrees);
        assert!((c.rho - 0.5f64.sqrt()).abs() < 1e-12);

        let a = ones2();
        let c = convergence_characterization(&build_splitting(&a, &a.scale(2.0), &tol()).unwrap(), &tol()).unwrap();
        assert!(c.semimonotone && c.rho_lt_1 && c.agrees);
        assert!((c.rho - 0.5).abs() < 1e-12);

        // V = 0 over a semi-monotone A is regular
        let a = m(&[[1., -2.], [0., 1.]]);
        let c = convergence_characterization(&build_splitting(&a, &a, &tol()).unwrap(), &tol()).unwrap();
        assert!(c.semimonotone && c.rho_lt_1 && c.agrees);

        // V = 0 over a non-semi-monotone A is only nonnegative: rejected
        let a = m(&[[1., 2.], [0., 1.]]);
        let s = build_splitting(&a, &a, &tol()).unwrap();
        assert_eq!(s.class(), SplitClass::ProperNonnegative);
        assert!(matches!(
            convergence_characterization(&s, &tol()),
            Err(Error::ClassTooWeak { .. })
        ));
    }

    #[test]
    fn chain_on_weak_example() {
        let r = weak_regular_chain(&weak_example(), &tol()).unwrap();
        assert!(r.flags().iter().all(|&f| f), "{r:?}");
        assert!((r.rho_adagu - (2.0 + 2f64.sqrt())).abs() < 1e-9);
        assert!((r.rho_udagv - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(r.chain_consistent());
    }

    #[test]
    fn chain_on_scaling_and_trivial_splittings() {
        let a = ones2();
        let r = weak_regular_chain(&build_splitting(&a, &a.scale(2.0), &tol()).unwrap(), &tol()).unwrap();
        assert!(r.flags().iter().all(|&f| f));
        assert!((r.rho_udagv - 0.5).abs() < 1e-12);
        assert!((r.rho_adagv - 1.0).abs() < 1e-12);

        let r = weak_regular_chain(&build_splitting(&a, &a, &tol()).unwrap(), &tol()).unwrap();
        assert!(r.flags().iter().all(|&f| f));
        assert!(r.rho_udagv.abs() < 1e-15 && r.rho_adagv.abs() < 1e-15);
        assert!((r.rho_adagu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chain_consistency_rule() {
        let mut r = weak_regular_chain(&weak_example(), &tol()).unwrap();
        r.e = false;
        assert!(!r.chain_consistent());
        r.a = false;
        r.b = false;
        r.c = false;
        r.d = false;
        assert!(r.chain_consistent());
    }

    #[test]
    fn eigenvalue_relation_on_examples() {
        assert!(eigenvalue_relation(&weak_example(), &tol(), 1e-7).unwrap());
        let a = ones2();
        assert!(eigenvalue_relation(&build_splitting(&a, &a.scale(4.0), &tol()).unwrap(), &tol(), 1e-7).unwrap());
    }

    #[test]
    fn compare_scaling_pair() {
        let a = ones2();
        let sb = build_splitting(&a, &a.scale(4.0 / 3.0), &tol()).unwrap();
        let su = build_splitting(&a, &a.scale(2.0), &tol()).unwrap();
        let c = compare_splittings(&sb, &su, ComparisonMode::NonnegativeMatrix, &tol()).unwrap();
        assert!(c.hypotheses_ok && c.conclusion_ok);
        assert!((c.rho_b - 0.25).abs() < 1e-9 && (c.rho_u - 0.5).abs() < 1e-9);

        let c = compare_splittings(&su, &su, ComparisonMode::NonnegativeMatrix, &tol()).unwrap();
        assert_eq!(c.rho_b, c.rho_u);
        assert!(c.conclusion_ok);
    }

    #[test]
    fn compare_row_sum_hypothesis_fails_on_zero_row() {
        let a = rank_one();
        let sb = build_splitting(&a, &a.scale(4.0 / 3.0), &tol()).unwrap();
        let su = build_splitting(&a, &a.scale(2.0), &tol()).unwrap();
        let c = compare_splittings(&sb, &su, ComparisonMode::PositiveRowSums, &tol()).unwrap();
        assert!(!c.hypotheses_ok);
        assert!(c.sound());
    }

    #[test]
    fn compare_preconditions() {
        let a = ones2();
        let su = build_splitting(&a, &a.scale(2.0), &tol()).unwrap();
        let other = build_splitting(&a.scale(2.0), &a.scale(4.0), &tol()).unwrap();
        assert!(matches!(
            compare_splittings(&other, &su, ComparisonMode::NonnegativeMatrix, &tol()),
            Err(Error::MismatchedSystem(_))
        ));
        // weak regular but not regular cannot play the U role
        let weak = weak_example();
        assert!(matches!(
            compare_splittings(&weak, &weak, ComparisonMode::NonnegativeMatrix, &tol()),
            Err(Error::ClassTooWeak { .. })
        ));
    }
}
