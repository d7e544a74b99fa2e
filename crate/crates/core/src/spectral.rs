//! Global assembly over Fourier modes: operator application, solves of
//! `A (u, v) = (f, g)` and `(A + B)(u, v) = (f, g)`, kernel scans, the
//! Fredholm index and the orthogonality test for solvability.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::{ConditionReport, ProblemConfig};
use crate::error::{Error, Result};
use crate::field::{FourierField, ModePair};
use crate::mode_function::ModeFunction;
use crate::mode_solver::{
    self, apply_mode, combine, propagate, resolution_degrees, singular_tolerance, system_kernel,
    ModeKernel, DEFAULT_SINGULAR_TOLERANCE,
};
use crate::parallel;
use crate::transfer::System;

/// Default mode cutoff for kernel scans.
pub const DEFAULT_K_MAX: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    /// `(d_t u + d_x u + a u, d_t v - d_x v + d v)`
    A,
    /// `(b v, c u)`
    B,
    /// `(-d_t u - d_x u + a u, -d_t v + d_x v + d v)`
    AAdjoint,
    /// `(c v, b u)`
    BAdjoint,
    /// `A + B`
    Full,
    /// `A~ + B~`
    FullAdjoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub k_max: i64,
    /// Relative threshold for singular boundary determinants and for
    /// compatibility defects.
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            k_max: DEFAULT_K_MAX,
            tolerance: DEFAULT_SINGULAR_TOLERANCE,
        }
    }
}

/// Mode-wise application of `op` to `field`.
///
/// Conjugate-symmetric input gives exactly conjugate-symmetric output: only
/// `k >= 0` is computed and the rest mirrored.
pub fn apply_operator(config: &ProblemConfig, op: Operator, field: &FourierField) -> FourierField {
    let (ks, symmetric) = solve_support(field);
    let images = parallel::map(&ks, |&k| (k, apply_mode(config, k, field.get(k).expect("k in support"), op)));
    assemble(field.gamma(), symmetric, images)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularModeReport {
    pub k: i64,
    #[serde(serialize_with = "crate::io::serialize_complex")]
    pub boundary_determinant: Complex64,
    /// Modulus of the pairing of `(f_k, g_k)` with the adjoint kernel basis.
    pub defect: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub solution: FourierField,
    pub singular_modes: Vec<SingularModeReport>,
    /// Largest per-mode residual `(||op(u, v)_k - (f_k, g_k)|| + bc defects) / (1 + ||f_k|| + ||g_k||)`.
    pub residual: f64,
    pub solvable: bool,
    pub v_norm: f64,
}

/// Modes to solve explicitly; the rest follow from conjugate symmetry.
fn solve_support(rhs: &FourierField) -> (Vec<i64>, bool) {
    let symmetric = rhs.is_conjugate_symmetric();
    let ks = rhs
        .support()
        .into_iter()
        .filter(|&k| !symmetric || k >= 0 || rhs.get(-k).is_none())
        .collect();
    (ks, symmetric)
}

fn assemble(
    gamma: f64,
    symmetric: bool,
    solved: impl IntoIterator<Item = (i64, ModePair)>,
) -> FourierField {
    let mut field = FourierField::new(gamma);
    for (k, pair) in solved {
        if symmetric && k > 0 {
            field.insert(-k, pair.conj());
        }
        if symmetric && k == 0 {
            let real = |f: &ModeFunction| f.map_values(|v| Complex64::new(v.re, 0.0));
            field.insert(0, ModePair::new(real(&pair.u), real(&pair.v)));
        } else {
            field.insert(k, pair);
        }
    }
    field
}

fn relative_residual(config: &ProblemConfig, op: Operator, k: i64, sol: &ModePair, rhs: &ModePair) -> f64 {
    let r = mode_solver::mode_residual(config, op, k, &sol.u, &sol.v, &rhs.u, &rhs.v);
    r / (1.0 + rhs.u.norm() + rhs.v.norm())
}

/// Inverts the decoupled operator `A` on the support of `rhs`.
pub fn solve_a(config: &ProblemConfig, rhs: &FourierField) -> Result<SolveReport> {
    config.require_condition()?;
    let (ks, symmetric) = solve_support(rhs);
    let outcomes = parallel::map(&ks, |&k| -> Result<(i64, ModePair, f64)> {
        let data = rhs.get(k).expect("k in support");
        let sol = mode_solver::solve_decoupled_mode(config, k, &data.u, &data.v)?.into_pair();
        let res = relative_residual(config, Operator::A, k, &sol, data);
        Ok((k, sol, res))
    });
    let mut residual = 0.0f64;
    let mut solved = Vec::with_capacity(ks.len());
    for outcome in outcomes {
        let (k, pair, res) = outcome?;
        residual = residual.max(res);
        solved.push((k, pair));
    }
    let solution = assemble(rhs.gamma(), symmetric, solved);
    let v_norm = solution.v_norm(config, None);
    Ok(SolveReport {
        solution,
        singular_modes: Vec::new(),
        residual,
        solvable: true,
        v_norm,
    })
}

struct ModeOutcome {
    k: i64,
    pair: ModePair,
    residual: f64,
    singular: Option<SingularModeReport>,
}

fn solve_full_mode(config: &ProblemConfig, k: i64, data: &ModePair, rel_tol: f64) -> ModeOutcome {
    let degrees = resolution_degrees(config, k, &[&data.u, &data.v]);
    let prop = propagate(config, System::Primal, k, Some((&data.u, &data.v)), &degrees);
    let tolerance = singular_tolerance(config, System::Primal, k, rel_tol);
    let l_k = prop.boundary_determinant;
    let (pair, singular) = if l_k.norm() > tolerance {
        (combine(&prop, -prop.particular_defect / l_k), None)
    } else {
        // Fredholm alternative on this mode: the data must be orthogonal to
        // the adjoint kernel; the least-squares member of P + s Z is returned.
        let adjoint = system_kernel(config, System::Adjoint, k, rel_tol);
        let defect = match &adjoint.basis {
            Some(basis) => data.inner(basis).norm(),
            None => prop.particular_defect.norm(),
        };
        let z = &prop.homogeneous;
        let p = prop.particular.as_ref().expect("forced propagation");
        let s = -p.inner(z) / z.norm_sq();
        let report = SingularModeReport {
            k,
            boundary_determinant: l_k,
            defect,
            tolerance: rel_tol * (data.norm()).max(1.0),
        };
        (combine(&prop, s), Some(report))
    };
    let residual = relative_residual(config, Operator::Full, k, &pair, data);
    ModeOutcome {
        k,
        pair,
        residual,
        singular,
    }
}

/// Solves `(A + B)(u, v) = rhs` mode by mode on the support of `rhs`.
///
/// Singular modes are reported with their compatibility defect and filled
/// with the minimum-norm particular solution; kernel components are never
/// added to the result.
pub fn solve_full(config: &ProblemConfig, rhs: &FourierField, options: &SolverOptions) -> Result<SolveReport> {
    config.require_condition()?;
    if config.is_decoupled() {
        return solve_a(config, rhs);
    }
    let (ks, symmetric) = solve_support(rhs);
    let outcomes = parallel::map(&ks, |&k| {
        solve_full_mode(config, k, rhs.get(k).expect("k in support"), options.tolerance)
    });
    let mut residual = 0.0f64;
    let mut singular_modes = Vec::new();
    let mut solved = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        residual = residual.max(o.residual);
        if let Some(s) = o.singular {
            if symmetric && o.k > 0 {
                singular_modes.push(SingularModeReport {
                    k: -o.k,
                    boundary_determinant: s.boundary_determinant.conj(),
                    ..s.clone()
                });
            }
            singular_modes.push(s);
        }
        solved.push((o.k, o.pair));
    }
    singular_modes.sort_by_key(|s| s.k);
    let solvable = singular_modes.iter().all(|s| s.defect <= s.tolerance);
    let solution = assemble(rhs.gamma(), symmetric, solved);
    let v_norm = solution.v_norm(config, None);
    Ok(SolveReport {
        solution,
        singular_modes,
        residual,
        solvable,
        v_norm,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    /// Some scanned `|L_k|` lies within a factor 10 of the threshold.
    Heuristic,
    Clean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelReport {
    pub system: System,
    pub k_max_scanned: i64,
    /// Every scanned mode `-k_max..=k_max`.
    pub per_mode: BTreeMap<i64, ModeKernel>,
    /// `dim(0) + 2 * sum_{k > 0} dim(k)`: modes `+-k` pair into real solutions.
    pub total_real_dimension: usize,
    pub certification: Certification,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Real,
    Imaginary,
}

/// Identifies one real basis element of a kernel: `Re` or `Im` of
/// `basis_k(x) exp(i k omega t)`, or the real mode-0 function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct KernelElementId {
    pub k: i64,
    pub part: Part,
}

impl KernelReport {
    pub fn singular_modes(&self) -> impl Iterator<Item = &ModeKernel> {
        self.per_mode.values().filter(|m| m.basis.is_some())
    }

    pub fn complex_dimension(&self) -> usize {
        self.per_mode.values().map(ModeKernel::dim).sum()
    }

    /// Real, unit-norm basis of the kernel as time-periodic fields.
    pub fn real_basis(&self, gamma: f64) -> Vec<(KernelElementId, FourierField)> {
        let mut out = Vec::new();
        for m in self.singular_modes().filter(|m| m.k >= 0) {
            let basis = m.basis.as_ref().expect("singular mode");
            if m.k == 0 {
                let field = FourierField::from_nonnegative(gamma, [(0, basis.clone())]).expect("k >= 0");
                out.push((KernelElementId { k: 0, part: Part::Real }, field));
            } else {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for (part, factor) in [(Part::Real, Complex64::new(s, 0.0)), (Part::Imaginary, Complex64::new(0.0, -s))] {
                    let field =
                        FourierField::from_nonnegative(gamma, [(m.k, basis.scale(factor))]).expect("k >= 0");
                    out.push((KernelElementId { k: m.k, part }, field));
                }
            }
        }
        out
    }
}

fn scan(config: &ProblemConfig, system: System, k_max: i64, rel_tol: f64) -> KernelReport {
    let ks: Vec<i64> = (0..=k_max.max(0)).collect();
    let scanned = parallel::map(&ks, |&k| system_kernel(config, system, k, rel_tol));
    let mut per_mode = BTreeMap::new();
    for m in scanned {
        if m.k > 0 {
            let mirror = ModeKernel {
                k: -m.k,
                boundary_determinant: m.boundary_determinant.conj(),
                tolerance: m.tolerance,
                basis: m.basis.as_ref().map(ModePair::conj),
            };
            per_mode.insert(-m.k, mirror);
        }
        per_mode.insert(m.k, m);
    }
    let total_real_dimension = per_mode
        .values()
        .map(ModeKernel::dim)
        .sum::<usize>();
    let certification = if per_mode.values().any(ModeKernel::is_ambiguous) {
        Certification::Heuristic
    } else {
        Certification::Clean
    };
    KernelReport {
        system,
        k_max_scanned: k_max,
        per_mode,
        total_real_dimension,
        certification,
    }
}

/// Scan of `ker(A + B)` over `|k| <= k_max`.
pub fn kernel(config: &ProblemConfig, k_max: i64) -> KernelReport {
    kernel_with(config, System::Primal, k_max, DEFAULT_SINGULAR_TOLERANCE)
}

/// Scan of `ker(A~ + B~)` over `|k| <= k_max`.
pub fn adjoint_kernel(config: &ProblemConfig, k_max: i64) -> KernelReport {
    kernel_with(config, System::Adjoint, k_max, DEFAULT_SINGULAR_TOLERANCE)
}

pub fn kernel_with(config: &ProblemConfig, system: System, k_max: i64, rel_tol: f64) -> KernelReport {
    scan(config, system, k_max, rel_tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FredholmReport {
    pub dim_kernel: usize,
    pub dim_adjoint_kernel: usize,
    pub index: i64,
    pub condition_report: ConditionReport,
}

pub fn index_report(config: &ProblemConfig, options: &SolverOptions) -> Result<FredholmReport> {
    let condition_report = config.require_condition()?;
    let primal = kernel_with(config, System::Primal, options.k_max, options.tolerance);
    let adjoint = kernel_with(config, System::Adjoint, options.k_max, options.tolerance);
    Ok(FredholmReport {
        dim_kernel: primal.total_real_dimension,
        dim_adjoint_kernel: adjoint.total_real_dimension,
        index: primal.total_real_dimension as i64 - adjoint.total_real_dimension as i64,
        condition_report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolvabilityDefect {
    pub element: KernelElementId,
    pub defect: f64,
}

/// Pairings of `rhs` with each real basis element of `ker(A~ + B~)`; an empty
/// list means `rhs` lies in the image.
pub fn solvability_test(
    config: &ProblemConfig,
    rhs: &FourierField,
    options: &SolverOptions,
) -> Result<Vec<SolvabilityDefect>> {
    let adjoint = kernel_with(config, System::Adjoint, options.k_max, options.tolerance);
    let rhs = rhs.map_modes(|_, p| p.on_grid(config.grid()));
    adjoint
        .real_basis(rhs.gamma())
        .into_iter()
        .map(|(element, field)| {
            Ok(SolvabilityDefect {
                element,
                defect: rhs.inner_product(&field)?,
            })
        })
        .collect()
}

/// Whether a list of defects certifies solvability at relative tolerance `tol`.
pub fn defects_vanish(defects: &[SolvabilityDefect], rhs: &FourierField, tol: f64) -> bool {
    let scale = rhs.iter().map(|(_, p)| p.norm_sq()).sum::<f64>().sqrt().max(1.0);
    defects.iter().all(|d| d.defect.abs() <= tol * scale)
}

impl From<&SolveReport> for Result<()> {
    fn from(report: &SolveReport) -> Self {
        if report.solvable {
            Ok(())
        } else {
            let worst = report
                .singular_modes
                .iter()
                .max_by(|a, b| a.defect.total_cmp(&b.defect))
                .expect("unsolvable implies a singular mode");
            Err(Error::SingularMode {
                k: worst.k,
                boundary_determinant: worst.boundary_determinant,
                tolerance: worst.tolerance,
                compatibility_defect: Complex64::new(worst.defect, 0.0),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, LN_2, PI};

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn cfg(omega: f64, r0: f64, r1: f64, a: f64, b: f64, c: f64, d: f64) -> ProblemConfig {
        ProblemConfig::constant(omega, 1.0, r0, r1, a, b, c, d).unwrap()
    }

    fn mode0(config: &ProblemConfig, u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> FourierField {
        let g = config.grid();
        let pair = ModePair::new(
            ModeFunction::sample(g, 32, |x| re(u(x))),
            ModeFunction::sample(g, 32, |x| re(v(x))),
        );
        FourierField::from_nonnegative(1.0, [(0, pair)]).unwrap()
    }

    fn ln2_config() -> ProblemConfig {
        cfg(1.0, 1.0, 1.0, LN_2, 0.0, 0.0, 0.0)
    }

    fn resonant() -> ProblemConfig {
        cfg(1.0, 0.0, 0.0, 0.0, FRAC_PI_2, FRAC_PI_2, 0.0)
    }

    #[test]
    fn coupling_vanishes_without_b_and_c() {
        let c = ln2_config();
        let x = mode0(&c, |x| x, |x| 1.0 - x * x);
        let image = apply_operator(&c, Operator::B, &x);
        assert!(image.iter().all(|(_, p)| p.u.is_zero() && p.v.is_zero()));
    }

    #[test]
    fn transport_of_constant() {
        let c = ln2_config();
        let x = mode0(&c, |_| 1.0 / LN_2, |_| 1.0 / LN_2);
        let image = apply_operator(&c, Operator::A, &x);
        let p = image.get(0).unwrap();
        assert!((p.u.eval(0.4) - re(1.0)).norm() < 1e-14);
        assert!(p.v.max_abs() < 1e-14);
    }

    #[test]
    fn solve_a_examples() {
        let c = ln2_config();
        let zero = solve_a(&c, &mode0(&c, |_| 0.0, |_| 0.0)).unwrap();
        assert!(zero.solution.iter().all(|(_, p)| p.norm() == 0.0));
        let one = solve_a(&c, &mode0(&c, |_| 1.0, |_| 0.0)).unwrap();
        let p = one.solution.get(0).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert!((p.u.eval(x) - re(1.0 / LN_2)).norm() < 1e-13);
            assert!((p.v.eval(x) - re(1.0 / LN_2)).norm() < 1e-13);
        }
        assert!(one.residual < 1e-12 && one.solvable && one.singular_modes.is_empty());
    }

    #[test]
    fn solve_a_requires_condition() {
        let c = cfg(PI, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        let err = solve_a(&c, &mode0(&c, |_| 1.0, |_| 0.0)).unwrap_err();
        assert!(matches!(err, Error::ConditionViolated { .. }));
    }

    #[test]
    fn decoupled_full_solve_is_solve_a() {
        let c = ln2_config();
        let rhs = mode0(&c, |x| x.cos(), |x| x * x);
        let full = solve_full(&c, &rhs, &SolverOptions::default()).unwrap();
        let a = solve_a(&c, &rhs).unwrap();
        assert_eq!(full, a);
    }

    #[test]
    fn resonant_rhs_is_rejected_with_half_defect() {
        let c = resonant();
        let rhs = mode0(&c, |x| (FRAC_PI_2 * x).cos(), |_| 0.0);
        let report = solve_full(&c, &rhs, &SolverOptions::default()).unwrap();
        assert!(!report.solvable);
        assert_eq!(report.singular_modes.len(), 1);
        assert!((report.singular_modes[0].defect - 0.5).abs() < 1e-12);
        let err: Result<()> = (&report).into();
        assert!(matches!(err, Err(Error::SingularMode { k: 0, .. })));
    }

    #[test]
    fn kernel_scans() {
        let decoupled = kernel(&ln2_config(), 16);
        assert_eq!(decoupled.total_real_dimension, 0);
        assert_eq!(decoupled.certification, Certification::Clean);
        assert_eq!(decoupled.per_mode.len(), 33);

        let res = kernel(&resonant(), 64);
        assert_eq!(res.total_real_dimension, 1);
        assert_eq!(res.certification, Certification::Clean);
        assert_eq!(res.singular_modes().map(|m| m.k).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn kernel_grows_without_condition() {
        let c = cfg(PI, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        let small = kernel(&c, 4).total_real_dimension;
        let large = kernel(&c, 12).total_real_dimension;
        assert_eq!((small, large), (9, 25));
    }

    #[test]
    fn index_examples() {
        let r = index_report(&resonant(), &SolverOptions::default()).unwrap();
        assert_eq!((r.dim_kernel, r.dim_adjoint_kernel, r.index), (1, 1, 0));
        let d = index_report(&ln2_config(), &SolverOptions::default()).unwrap();
        assert_eq!((d.dim_kernel, d.dim_adjoint_kernel, d.index), (0, 0, 0));
    }

    #[test]
    fn solvability_examples() {
        let c = ln2_config();
        let rhs = mode0(&c, |x| x, |_| 1.0);
        assert!(solvability_test(&c, &rhs, &SolverOptions::default()).unwrap().is_empty());

        let r = resonant();
        let bad = mode0(&r, |x| (FRAC_PI_2 * x).cos(), |_| 0.0);
        let d = solvability_test(&r, &bad, &SolverOptions::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert!((d[0].defect.abs() - 0.5).abs() < 1e-12);
        assert!(!defects_vanish(&d, &bad, 1e-8));

        let good = mode0(&r, |x| (FRAC_PI_2 * x).sin(), |x| 2.0 / PI * (FRAC_PI_2 * x).sin());
        let d = solvability_test(&r, &good, &SolverOptions::default()).unwrap();
        assert!(d[0].defect.abs() < 1e-10);
    }

    #[test]
    fn real_basis_of_nonzero_mode() {
        // omega = pi, r0 = r1 = 1: every mode is resonant, the pair +-1
        // contributes two real elements.
        let c = cfg(PI, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0);
        let report = kernel(&c, 1);
        let basis = report.real_basis(1.0);
        assert_eq!(basis.len(), 3);
        for (_, f) in &basis {
            assert!(f.is_conjugate_symmetric());
            assert!((f.inner_product(f).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(basis[1].1.inner_product(&basis[2].1).unwrap().abs() < 1e-12);
    }
}
