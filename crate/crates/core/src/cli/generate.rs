//! Seeded random semi-monotone matrices and proper splittings of them.
//!
//! Nonnegative semi-monotone matrices are, up to row and column
//! permutations, direct sums of positive rank-one blocks padded with zero
//! rows and columns; [`Generator::nonneg_semimonotone`] draws them in that
//! form. Signed semi-monotone matrices are drawn as `A = G^+` for a positive
//! low-rank `G`, so that `A^+ = G >= 0`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{orth_projectors, pinv, rank, Matrix, Tolerances};
use crate::spectral::EIGEN_SIZE_CAP;
use crate::splitting::{build_splitting, is_semimonotone, SplitClass};

/// Draws per generated instance before the perturbed family gives up.
pub const MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `U = A / alpha` over a nonnegative semi-monotone `A`; always regular.
    Scaling,
    /// `U = A + t (A A^+) E (A^+ A)` over a signed semi-monotone `A`,
    /// kept only when at least weak regular.
    Perturbed,
    /// Each rank-one block of a nonnegative semi-monotone `A` scaled by its
    /// own factor; always regular.
    BlockScaling,
}

impl Family {
    /// Weakest class every accepted instance of the family reaches.
    pub fn guarantee(self) -> SplitClass {
        match self {
            Family::Scaling | Family::BlockScaling => SplitClass::ProperRegular,
            Family::Perturbed => SplitClass::ProperWeakRegular,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneratedSplitting {
    pub seed: u64,
    pub family: Family,
    pub a: Matrix,
    pub u: Matrix,
    pub class: SplitClass,
    pub accepted: bool,
    pub attempts: usize,
}

/// `U = A / alpha`.
pub fn scaling_splitting(a: &Matrix, alpha: f64) -> Result<Matrix> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("scaling factor must be positive, got {alpha}")));
    }
    Ok(a.scale(1.0 / alpha))
}

/// `U = A + t (A A^+) E (A^+ A)`; the projections keep `R(U) = R(A)` and
/// `N(U) = N(A)` whenever the rank does not drop.
pub fn perturbed_splitting(a: &Matrix, e: &Matrix, t: f64, tol: &Tolerances) -> Result<Matrix> {
    a.require_same_shape("perturbed_splitting", e)?;
    let (p, q) = orth_projectors(a, tol)?;
    Ok(a + &(&(&p * e) * &q).scale(t))
}

/// Connected components of the bipartite support graph of `a`, as
/// `(rows, cols)` index lists. Zero rows and columns belong to no block.
pub fn support_blocks(a: &Matrix) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (m, n) = a.shape();
    // union-find over rows 0..m and columns m..m+n
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..m {
        for j in 0..n {
            if a.get(i, j) != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, m + j));
                parent[ri] = rj;
            }
        }
    }
    let mut blocks: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    let touched: Vec<bool> = (0..m)
        .map(|i| (0..n).any(|j| a.get(i, j) != 0.0))
        .chain((0..n).map(|j| (0..m).any(|i| a.get(i, j) != 0.0)))
        .collect();
    for (k, _) in touched.iter().enumerate().filter(|(_, &t)| t) {
        let root = find(&mut parent, k);
        let slot = match blocks.iter().position(|b| b.0 == root) {
            Some(s) => s,
            None => {
                blocks.push((root, Vec::new(), Vec::new()));
                blocks.len() - 1
            }
        };
        if k < m {
            blocks[slot].1.push(k);
        } else {
            blocks[slot].2.push(k - m);
        }
    }
    blocks.into_iter().map(|(_, r, c)| (r, c)).collect()
}

/// `U = sum_k A_k / alpha_k` over the support blocks `A_k` of `a`.
pub fn block_scaling_splitting(a: &Matrix, alphas: &[f64]) -> Result<Matrix> {
    let blocks = support_blocks(a);
    if alphas.len() != blocks.len() {
        return Err(Error::InvalidParameter(format!(
            "{} scaling factors for {} blocks",
            alphas.len(),
            blocks.len()
        )));
    }
    let (m, n) = a.shape();
    let mut entries = a.to_row_major();
    for ((rows, cols), &alpha) in blocks.iter().zip(alphas) {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("scaling factor must be positive, got {alpha}")));
        }
        for &i in rows {
            for &j in cols {
                entries[i * n + j] /= alpha;
            }
        }
    }
    Matrix::from_row_major(m, n, &entries)
}

/// Seeded source of random semi-monotone matrices and their splittings.
pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Shape with both dimensions in `min..=max`.
    pub fn shape(&mut self, min: usize, max: usize) -> (usize, usize) {
        (self.rng.gen_range(min..=max), self.rng.gen_range(min..=max))
    }

    pub fn uniform_matrix(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> Matrix {
        let entries: Vec<f64> = (0..rows * cols).map(|_| self.rng.gen_range(lo..hi)).collect();
        Matrix::from_row_major(rows, cols, &entries).expect("finite entries")
    }

    /// Nonnegative semi-monotone `m x n` matrix: a permuted direct sum of
    /// positive rank-one blocks with occasional zero rows and columns.
    pub fn nonneg_semimonotone(&mut self, m: usize, n: usize) -> Matrix {
        let r = self.rng.gen_range(1..=m.min(n));
        let row_block = self.assign_blocks(m, r);
        let col_block = self.assign_blocks(n, r);
        let x: Vec<f64> = (0..m).map(|_| self.rng.gen_range(0.2..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| self.rng.gen_range(0.2..2.0)).collect();
        let mut entries = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                if row_block[i].is_some() && row_block[i] == col_block[j] {
                    entries[i * n + j] = x[i] * y[j];
                }
            }
        }
        Matrix::from_row_major(m, n, &entries).expect("finite entries")
    }

    // Every block gets at least one index; the rest join a random block or,
    // rarely, no block at all.
    fn assign_blocks(&mut self, len: usize, blocks: usize) -> Vec<Option<usize>> {
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(&mut self.rng);
        let mut out = vec![None; len];
        for (k, &idx) in order.iter().enumerate() {
            out[idx] = if k < blocks {
                Some(k)
            } else if self.rng.gen_bool(0.15) {
                None
            } else {
                Some(self.rng.gen_range(0..blocks))
            };
        }
        out
    }

    /// Signed semi-monotone `m x n` matrix `A = G^+` with `G = F K`,
    /// `F` (`n x r`) and `K` (`r x m`) entrywise positive.
    pub fn signed_semimonotone(&mut self, m: usize, n: usize, tol: &Tolerances) -> Result<Matrix> {
        let r = self.rng.gen_range(1..=m.min(n));
        let f = self.uniform_matrix(n, r, 0.1, 1.0);
        let k = self.uniform_matrix(r, m, 0.1, 1.0);
        pinv(&(&f * &k), tol)
    }

    pub fn scaling(&mut self, a: &Matrix) -> Matrix {
        let alpha = self.rng.gen_range(0.1..0.9);
        scaling_splitting(a, alpha).expect("alpha in (0.1, 0.9)")
    }

    pub fn block_scaling(&mut self, a: &Matrix) -> Matrix {
        let alphas: Vec<f64> = (0..support_blocks(a).len())
            .map(|_| self.rng.gen_range(0.1..0.9))
            .collect();
        block_scaling_splitting(a, &alphas).expect("one factor per block")
    }

    /// One perturbation draw `U = A + t P E Q` with `E >= 0` uniform and
    /// `t` a random fraction of `|A|_max`.
    pub fn perturbation(&mut self, a: &Matrix, tol: &Tolerances) -> Result<Matrix> {
        let e = self.uniform_matrix(a.rows(), a.cols(), 0.0, 1.0);
        let t = self.rng.gen_range(0.01..0.5) * a.max_abs();
        perturbed_splitting(a, &e, t, tol)
    }

    /// Perturbations of a fixed `a` until one is at least weak regular.
    /// `None` once [`MAX_RETRIES`] draws fail.
    pub fn perturbed(&mut self, a: &Matrix, tol: &Tolerances) -> Result<Option<(Matrix, usize)>> {
        for attempt in 1..=MAX_RETRIES {
            let u = self.perturbation(a, tol)?;
            if rank(&u, tol)? == rank(a, tol)?
                && build_splitting(a, &u, tol)?.class().is_at_least(SplitClass::ProperWeakRegular)
            {
                return Ok(Some((u, attempt)));
            }
        }
        Ok(None)
    }
}

/// One random instance of `family`, deterministic in `seed`.
///
/// The perturbed family redraws both `A` and the perturbation until the
/// splitting is at least weak regular; when [`MAX_RETRIES`] draws fail the
/// last draw is returned with `accepted = false`.
pub fn generate_random_splitting(
    seed: u64,
    shape: (usize, usize),
    family: Family,
    tol: &Tolerances,
) -> Result<GeneratedSplitting> {
    let (m, n) = shape;
    if m == 0 || n == 0 || m > EIGEN_SIZE_CAP || n > EIGEN_SIZE_CAP {
        return Err(Error::InvalidParameter(format!(
            "shape {m}x{n} outside 1..={EIGEN_SIZE_CAP}"
        )));
    }
    let mut g = Generator::new(seed);
    let finish = |a: Matrix, u: Matrix, attempts: usize, tol: &Tolerances| -> Result<GeneratedSplitting> {
        let class = build_splitting(&a, &u, tol)?.class();
        let accepted = class.is_at_least(family.guarantee()) && is_semimonotone(&a, tol)?;
        Ok(GeneratedSplitting {
            seed,
            family,
            a,
            u,
            class,
            accepted,
            attempts,
        })
    };
    match family {
        Family::Scaling => {
            let a = g.nonneg_semimonotone(m, n);
            let u = g.scaling(&a);
            finish(a, u, 1, tol)
        }
        Family::BlockScaling => {
            let a = g.nonneg_semimonotone(m, n);
            let u = g.block_scaling(&a);
            finish(a, u, 1, tol)
        }
        Family::Perturbed => {
            let mut last = None;
            for attempt in 1..=MAX_RETRIES {
                let a = g.signed_semimonotone(m, n, tol)?;
                let u = g.perturbation(&a, tol)?;
                let out = finish(a, u, attempt, tol)?;
                if out.accepted {
                    return Ok(out);
                }
                last = Some(out);
            }
            Ok(last.expect("at least one attempt"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::spectral_radius;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn scaling_example() {
        let a = Matrix::from_rows(&[[1., 1.], [1., 1.]]).unwrap();
        let u = scaling_splitting(&a, 0.5).unwrap();
        assert_eq!(u, a.scale(2.0));
        let s = build_splitting(&a, &u, &tol()).unwrap();
        assert_eq!(s.class(), SplitClass::ProperRegular);
        assert!((spectral_radius(s.iteration_matrix(), &tol()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_perturbation_is_trivial() {
        let mut g = Generator::new(7);
        let a = g.signed_semimonotone(3, 4, &tol()).unwrap();
        let e = g.uniform_matrix(3, 4, 0.0, 1.0);
        let u = perturbed_splitting(&a, &e, 0.0, &tol()).unwrap();
        let s = build_splitting(&a, &u, &tol()).unwrap();
        assert!(s.v().max_abs() < 1e-15);
        assert!(spectral_radius(s.iteration_matrix(), &tol()).unwrap() < 1e-12);
    }

    #[test]
    fn support_blocks_of_direct_sum() {
        let a = Matrix::from_rows(&[[1., 0., 2.], [0., 0., 0.], [0., 3., 0.], [4., 0., 8.]]).unwrap();
        let blocks = support_blocks(&a);
        assert_eq!(blocks, vec![(vec![0, 3], vec![0, 2]), (vec![2], vec![1])]);
        let u = block_scaling_splitting(&a, &[0.5, 0.25]).unwrap();
        assert_eq!(u.get(3, 2), 16.0);
        assert_eq!(u.get(2, 1), 12.0);
        assert!(block_scaling_splitting(&a, &[0.5]).is_err());
    }

    #[test]
    fn determinism() {
        for family in [Family::Scaling, Family::Perturbed, Family::BlockScaling] {
            let x = generate_random_splitting(42, (3, 4), family, &tol()).unwrap();
            let y = generate_random_splitting(42, (3, 4), family, &tol()).unwrap();
            assert_eq!(x.a, y.a);
            assert_eq!(x.u, y.u);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(generate_random_splitting(1, (0, 3), Family::Scaling, &tol()).is_err());
        assert!(generate_random_splitting(1, (3, 65), Family::Scaling, &tol()).is_err());
    }

    #[test]
    fn accepted_instances_meet_their_guarantee() {
        for seed in 0..60 {
            for family in [Family::Scaling, Family::Perturbed, Family::BlockScaling] {
                let shape = (2 + (seed as usize % 3), 2 + (seed as usize / 3 % 3));
                let out = generate_random_splitting(seed, shape, family, &tol()).unwrap();
                if family != Family::Perturbed {
                    assert!(out.accepted, "{family:?} seed {seed}");
                }
                if out.accepted {
                    let s = build_splitting(&out.a, &out.u, &tol()).unwrap();
                    assert!(s.class().is_at_least(family.guarantee()));
                    assert!(is_semimonotone(&out.a, &tol()).unwrap());
                }
            }
        }
    }
}
