use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use super::generate::{generate_random_splitting, Family};
use super::mtx::{read_matrix, write_matrix};
use super::report::Report;
use super::suite::run_suite;
use super::{CliError, EQ_TOL_VAR};
use crate::alternate::{
    alternating_solve, build_alternating, compare_composite, convergence_check, induced_splitting, pinv_iteration,
    CompositeMode,
};
use crate::matcore::{penrose_residuals, pinv, rank, Matrix, Tolerances};
use crate::solver::{stationary_solve, verify_solution, IterationReport, StopRule};
use crate::spectral::{spectral_radius, spectral_radius_gelfand, spectrum};
use crate::splitting::{
    build_splitting, compare_splittings, convergence_characterization, iteration_identities, weak_regular_chain,
    ComparisonMode, SplitClass,
};

/// Distance from the minimum-norm solution accepted after convergence,
/// relative to `1 + |A^+ b|`.
const SOLUTION_TOL: f64 = 1e-8;
/// Agreement required between the QR and Gelfand spectral radii, relative to `1 + rho`.
const RADIUS_AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "altsplit", version, about = "Proper splittings, alternating iterations and their checks")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct IterArgs {
    /// Relative successive-change tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
}

impl IterArgs {
    fn stop_rule(&self) -> StopRule {
        let mut stop = StopRule::default();
        if let Some(t) = self.tol {
            stop.rel_tol = t;
        }
        if let Some(k) = self.max_iters {
            stop.max_iters = k;
        }
        stop
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CompareModeArg {
    Tcomp1,
    Tcomp2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CompositeModeArg {
    Main33,
    Main333,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the splitting A = U - V.
    Classify {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "U")]
        u: PathBuf,
    },
    /// Iterate x <- U^+V x + U^+ b.
    Solve {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "U")]
        u: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        x0: Option<PathBuf>,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Iterate the alternating scheme over A = M - N = U - V.
    Alternate {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "M")]
        m: PathBuf,
        #[arg(long = "U")]
        u: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        x0: Option<PathBuf>,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Induced splitting A = B - C of the alternating scheme.
    Induced {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "M")]
        m: PathBuf,
        #[arg(long = "U")]
        u: PathBuf,
    },
    /// Compare a weak regular splitting (U1) with a regular one (U2).
    Compare {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "U1")]
        u1: PathBuf,
        #[arg(long = "U2")]
        u2: PathBuf,
        #[arg(long, value_enum)]
        mode: CompareModeArg,
    },
    /// Compare the alternating composite with its two factors.
    CompareAlt {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "M")]
        m: PathBuf,
        #[arg(long = "U")]
        u: PathBuf,
        #[arg(long, value_enum)]
        mode: CompositeModeArg,
    },
    /// Spectrum and spectral radius of a square matrix.
    Spectrum {
        #[arg(long = "H")]
        h: PathBuf,
    },
    /// Moore-Penrose inverse.
    Pinv {
        #[arg(long = "A")]
        a: PathBuf,
    },
    /// Iterate X <- H X + c towards A^+.
    MpIterate {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "M")]
        m: PathBuf,
        #[arg(long = "U")]
        u: PathBuf,
        #[command(flatten)]
        iter: IterArgs,
    },
    /// Draw a random semi-monotone matrix and a splitting of it.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        #[arg(long, value_enum, default_value = "scaling")]
        family: Family,
        /// Directory receiving A.mtx and U.mtx.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the pinned cases listed in a manifest.
    Suite {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn tolerances() -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    if let Ok(raw) = std::env::var(EQ_TOL_VAR) {
        tol.eq_tol = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{EQ_TOL_VAR}={raw:?} is not a number")))?;
        tol.validate()?;
    }
    Ok(tol)
}

fn load(report: &mut Report, key: &str, path: &Path) -> Result<Matrix, CliError> {
    report.input(key, path.display().to_string());
    Ok(read_matrix(path)?)
}

fn iteration_results(report: &mut Report, r: &IterationReport) {
    report.result("iterations", r.iterations);
    report.result("converged", r.converged);
    report.result("stop_reason", r.stop_reason);
    report.result("final", &r.final_iterate);
    report.result("last_step", r.residual_history.last().copied());
}

fn solution_checks(report: &mut Report, a: &Matrix, b: &Matrix, r: &IterationReport, tol: &Tolerances) -> Result<(), CliError> {
    report.check_bool("converged", true, r.converged);
    if r.converged {
        let reference = &pinv(a, tol)? * b;
        let distance = (&r.final_iterate - &reference).frobenius();
        report.check_at_most("distance_to_pinv_solution", distance, SOLUTION_TOL * (1.0 + reference.frobenius()));
        let v = verify_solution(a, b, &r.final_iterate, tol)?;
        report.result("normal_residual", v.normal_residual);
        report.result("in_rowspace", v.in_rowspace);
    }
    Ok(())
}

impl Cli {
    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Classify { .. } => "classify",
            Command::Solve { .. } => "solve",
            Command::Alternate { .. } => "alternate",
            Command::Induced { .. } => "induced",
            Command::Compare { .. } => "compare",
            Command::CompareAlt { .. } => "compare-alt",
            Command::Spectrum { .. } => "spectrum",
            Command::Pinv { .. } => "pinv",
            Command::MpIterate { .. } => "mp-iterate",
            Command::Generate { .. } => "generate",
            Command::Suite { .. } => "suite",
        }
    }

    pub fn execute(&self) -> Result<Report, CliError> {
        let tol = tolerances()?;
        let mut report = Report::new(self.command_name());
        match &self.command {
            Command::Classify { a, u } => {
                let a = load(&mut report, "A", a)?;
                let u = load(&mut report, "U", u)?;
                let s = build_splitting(&a, &u, &tol)?;
                report.result("class", s.class().name());
                report.result("proper", s.is_proper());
                report.result("u_pinv", s.u_pinv());
                if s.is_proper() {
                    report.result("rho", spectral_radius(s.iteration_matrix(), &tol)?);
                    let (_, ids) = iteration_identities(&s, &tol)?;
                    report.check_at_most("factorization", ids.factorization_residual, tol.eq_tol);
                    report.check_bool("iteration_invertible", true, ids.invertible);
                    report.check_at_most("pinv_formula", ids.pinv_residual, tol.eq_tol);
                }
                if s.class().is_at_least(SplitClass::ProperWeakRegular) {
                    let ch = convergence_characterization(&s, &tol)?;
                    report.result("semimonotone", ch.semimonotone);
                    report.check_bool("characterization_agrees", true, ch.agrees);
                    let chain = weak_regular_chain(&s, &tol)?;
                    report.result("chain", chain);
                    report.check_bool("chain_consistent", true, chain.chain_consistent());
                }
            }
            Command::Solve { a, u, b, x0, iter } => {
                let a = load(&mut report, "A", a)?;
                let u = load(&mut report, "U", u)?;
                let b = load(&mut report, "b", b)?;
                let x0 = x0.as_ref().map(|p| load(&mut report, "x0", p)).transpose()?;
                let s = build_splitting(&a, &u, &tol)?;
                report.result("class", s.class().name());
                report.result("rho", spectral_radius(s.iteration_matrix(), &tol)?);
                let r = stationary_solve(&s, &b, x0.as_ref(), &iter.stop_rule())?;
                iteration_results(&mut report, &r);
                solution_checks(&mut report, &a, &b, &r, &tol)?;
            }
            Command::Alternate { a, m, u, b, x0, iter } => {
                let a = load(&mut report, "A", a)?;
                let mm = load(&mut report, "M", m)?;
                let u = load(&mut report, "U", u)?;
                let b = load(&mut report, "b", b)?;
                let x0 = x0.as_ref().map(|p| load(&mut report, "x0", p)).transpose()?;
                let sch = build_alternating(&a, &mm, &u, &tol)?;
                let cc = convergence_check(&sch, &tol)?;
                report.result("convergence_check", cc);
                report.check_bool("theorem_sound", true, cc.sound());
                let r = alternating_solve(&sch, &b, x0.as_ref(), &iter.stop_rule())?;
                iteration_results(&mut report, &r);
                solution_checks(&mut report, &a, &b, &r, &tol)?;
            }
            Command::Induced { a, m, u } => {
                let a = load(&mut report, "A", a)?;
                let mm = load(&mut report, "M", m)?;
                let u = load(&mut report, "U", u)?;
                let sch = build_alternating(&a, &mm, &u, &tol)?;
                let ind = induced_splitting(&sch, &tol)?;
                let cc = convergence_check(&sch, &tol)?;
                report.result("b", &ind.b);
                report.result("c", &ind.c);
                report.result("class", ind.class.name());
                report.result("hypotheses_ok", ind.hypotheses_ok);
                report.result("identities", ind.identities);
                report.check_at_most("b_vs_inverse_formula", ind.identities.b_vs_inverse_formula, tol.eq_tol);
                if ind.hypotheses_ok {
                    report.check_at_most("pinv_vs_rhs_operator", ind.identities.pinv_vs_rhs_operator, tol.eq_tol);
                    report.check_at_most("pinv_vs_projected", ind.identities.pinv_vs_projected, tol.eq_tol);
                    report.check_at_most("iteration_matrix", ind.identities.iteration_matrix, tol.eq_tol);
                    if cc.theorem_applies {
                        report.check_bool(
                            "weak_regular",
                            true,
                            ind.class.is_at_least(SplitClass::ProperWeakRegular),
                        );
                    }
                } else {
                    report.warn("range or null space of M + U - A differs from A; identities not asserted");
                }
            }
            Command::Compare { a, u1, u2, mode } => {
                let a = load(&mut report, "A", a)?;
                let u1 = load(&mut report, "U1", u1)?;
                let u2 = load(&mut report, "U2", u2)?;
                let mode = match mode {
                    CompareModeArg::Tcomp1 => ComparisonMode::NonnegativeMatrix,
                    CompareModeArg::Tcomp2 => ComparisonMode::PositiveRowSums,
                };
                report.input("mode", mode);
                let sb = build_splitting(&a, &u1, &tol)?;
                let su = build_splitting(&a, &u2, &tol)?;
                let c = compare_splittings(&sb, &su, mode, &tol)?;
                report.result("comparison", c);
                report.check_bool("theorem_sound", true, c.sound());
            }
            Command::CompareAlt { a, m, u, mode } => {
                let a = load(&mut report, "A", a)?;
                let mm = load(&mut report, "M", m)?;
                let u = load(&mut report, "U", u)?;
                let mode = match mode {
                    CompositeModeArg::Main33 => CompositeMode::NonnegativeMatrix,
                    CompositeModeArg::Main333 => CompositeMode::PositiveRowSums,
                };
                report.input("mode", mode);
                let sch = build_alternating(&a, &mm, &u, &tol)?;
                let c = compare_composite(&sch, mode, &tol)?;
                report.result("comparison", c);
                report.check_bool("theorem_sound", true, c.sound());
            }
            Command::Spectrum { h } => {
                let h = load(&mut report, "H", h)?;
                let sp = spectrum(&h, &tol)?;
                report.result("radius", sp.radius);
                report.result("method", sp.method);
                report.result("eigenvalues", &sp.eigenvalues);
                if sp.eigenvalues.is_some() {
                    let gelfand = spectral_radius_gelfand(&h)?;
                    report.result("gelfand_radius", gelfand);
                    report.check_at_most(
                        "gelfand_agreement",
                        (gelfand - sp.radius).abs(),
                        RADIUS_AGREEMENT_TOL * (1.0 + sp.radius),
                    );
                }
            }
            Command::Pinv { a } => {
                let a = load(&mut report, "A", a)?;
                let g = pinv(&a, &tol)?;
                report.result("pinv", &g);
                report.result("rank", rank(&a, &tol)?);
                let bound = tol.eq_tol * (1.0 + a.max_abs());
                for (k, r) in penrose_residuals(&a, &g).into_iter().enumerate() {
                    report.check_at_most(&format!("penrose_{}", k + 1), r, bound);
                }
            }
            Command::MpIterate { a, m, u, iter } => {
                let a = load(&mut report, "A", a)?;
                let mm = load(&mut report, "M", m)?;
                let u = load(&mut report, "U", u)?;
                let sch = build_alternating(&a, &mm, &u, &tol)?;
                report.result("rho", spectral_radius(sch.iteration_matrix(), &tol)?);
                let r = pinv_iteration(&sch, &iter.stop_rule())?;
                iteration_results(&mut report, &r);
                report.check_bool("converged", true, r.converged);
                if r.converged {
                    let g = pinv(&a, &tol)?;
                    let distance = (&r.final_iterate - &g).frobenius();
                    report.check_at_most("distance_to_pinv", distance, SOLUTION_TOL * (1.0 + g.frobenius()));
                }
            }
            Command::Generate {
                seed,
                rows,
                cols,
                family,
                out,
            } => {
                report.input("seed", seed);
                report.input("shape", [rows, cols]);
                report.input("family", family);
                let g = generate_random_splitting(*seed, (*rows, *cols), *family, &tol)?;
                report.result("A", &g.a);
                report.result("U", &g.u);
                report.result("class", g.class.name());
                report.result("accepted", g.accepted);
                report.result("attempts", g.attempts);
                if g.accepted {
                    report.check_bool("family_guarantee", true, g.class.is_at_least(family.guarantee()));
                } else {
                    report.warn(format!("rejection budget exhausted after {} draws; instance skipped", g.attempts));
                }
                if let Some(dir) = out {
                    fs::create_dir_all(dir).map_err(|source| CliError::Write {
                        path: dir.display().to_string(),
                        source,
                    })?;
                    for (name, m) in [("A.mtx", &g.a), ("U.mtx", &g.u)] {
                        let path = dir.join(name);
                        fs::write(&path, write_matrix(m)).map_err(|source| CliError::Write {
                            path: path.display().to_string(),
                            source,
                        })?;
                    }
                    report.result("written", json!([dir.join("A.mtx"), dir.join("U.mtx")]));
                }
            }
            Command::Suite { manifest } => {
                return run_suite(manifest, &tol, &StopRule::default());
            }
        }
        Ok(report)
    }
}
