//! Per-mode boundary value problems.
//!
//! For a fixed Fourier index `k` the primal problem is
//!
//! ```text
//! u' + (a + ik omega) u + b v = f,    u(0) = r0 v(0),
//! -v' + (d + ik omega) v + c u = g,   v(1) = r1 u(1),
//! ```
//!
//! and the adjoint problem is
//!
//! ```text
//! -phi' + (a - ik omega) phi + c psi = 0,   psi(0) = r0 phi(0),
//! psi' + (d - ik omega) psi + b phi = 0,    phi(1) = r1 psi(1).
//! ```
//!
//! With `b = c = 0` the primal problem has the explicit inverse implemented by
//! [`solve_decoupled_mode`]. The coupled problem is solved by shooting from the
//! left boundary with closed-form segment exponentials.

use num_complex::Complex64;

use crate::coefficients::ProblemConfig;
use crate::error::{Error, Result};
use crate::field::ModePair;
use crate::mode_function::{ModeFunction, Segment, DEFAULT_DEGREE};
use crate::spectral::Operator;
use crate::transfer::{system_transfer_matrix, Mat2, System, Vec2};

/// Default relative singularity threshold for boundary determinants.
pub const DEFAULT_SINGULAR_TOLERANCE: f64 = 1e-8;

/// Largest per-segment degree the resolution heuristic will pick.
pub const MAX_DEGREE: usize = 8192;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSolveResult {
    pub u: ModeFunction,
    pub v: ModeFunction,
    /// `Delta_k` for the decoupled solve, `L_k` for the coupled one.
    pub boundary_determinant: Complex64,
    /// Larger of the two ODE residual norms plus both boundary defects.
    pub residual: f64,
}

impl ModeSolveResult {
    pub fn into_pair(self) -> ModePair {
        ModePair::new(self.u, self.v)
    }
}

/// Per-segment degrees that resolve mode `k` and the given data.
///
/// The solution oscillates like `exp(+-i k omega x)` and integrands carry up
/// to twice that frequency, so the degree grows linearly with `|k| omega`.
pub fn resolution_degrees(config: &ProblemConfig, k: i64, data: &[&ModeFunction]) -> Vec<usize> {
    let grid = config.grid();
    config
        .segments()
        .iter()
        .map(|seg| {
            let rate = (k as f64 * config.omega()).abs()
                + (seg.b * seg.c).abs().sqrt()
                + seg.a.abs()
                + seg.d.abs();
            let mut n = DEFAULT_DEGREE + (1.5 * rate * seg.len()).ceil() as usize;
            let mid = 0.5 * (seg.x0 + seg.x1);
            for f in data {
                let b = f.breakpoints();
                if b.as_slice() == grid {
                    let idx = crate::coefficients::segment_index(grid, mid);
                    n = n.max(f.segments()[idx].degree());
                } else {
                    n = n.max(f.degrees().into_iter().max().unwrap_or(0));
                }
            }
            n.min(MAX_DEGREE)
        })
        .collect()
}

fn on_config(config: &ProblemConfig, f: &ModeFunction, degrees: &[usize]) -> ModeFunction {
    f.on_grid(config.grid()).with_degrees(degrees)
}

/// `w_k(f, g) = r1 e^{-ik omega - alpha(1)} int_0^1 e^{ik omega y + alpha(y)} f
///            - e^{ik omega + delta(1)} int_0^1 e^{-ik omega y - delta(y)} g`.
pub fn compute_w_k(config: &ProblemConfig, k: i64, f: &ModeFunction, g: &ModeFunction) -> Complex64 {
    let degrees = resolution_degrees(config, k, &[f, g]);
    let f = on_config(config, f, &degrees);
    let g = on_config(config, g, &degrees);
    let kw = k as f64 * config.omega();
    let fi = weighted(config, &f, |seg, y| Complex64::new(seg.alpha(y), kw * y)).integral();
    let gi = weighted(config, &g, |seg, y| Complex64::new(-seg.delta(y), -kw * y)).integral();
    w_from_integrals(config, k, fi, gi)
}

fn w_from_integrals(config: &ProblemConfig, k: i64, fi: Complex64, gi: Complex64) -> Complex64 {
    let kw = k as f64 * config.omega();
    config.r1() * Complex64::new(-config.alpha1(), -kw).exp() * fi
        - Complex64::new(config.delta1(), kw).exp() * gi
}

/// `f(y) * exp(phase(y))` sampled on `f`'s nodes (which lie on the config grid).
fn weighted(
    config: &ProblemConfig,
    f: &ModeFunction,
    phase: impl Fn(&crate::coefficients::SegmentData, f64) -> Complex64,
) -> ModeFunction {
    let segs = config.segments();
    f.map_with_position(|i, y, v| v * phase(&segs[i], y).exp())
}

/// Explicit inverse of the decoupled mode operator.
///
/// The integral representation is evaluated with `-g` in the second slot so
/// that the result solves `-v' + (d + ik omega) v = g`.
pub fn solve_decoupled_mode(
    config: &ProblemConfig,
    k: i64,
    f: &ModeFunction,
    g: &ModeFunction,
) -> Result<ModeSolveResult> {
    let bound = config.check_condition().delta_lower_bound;
    let delta_k = config.delta_k(k);
    let floor = (0.5 * bound).max(DEFAULT_SINGULAR_TOLERANCE * config.delta1().exp());
    if delta_k.norm().partial_cmp(&floor) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InternalConsistency {
            k,
            detail: format!(
                "|Delta_k| = {:e} not above {:e}",
                delta_k.norm(),
                floor
            ),
        });
    }
    let degrees = resolution_degrees(config, k, &[f, g]);
    let f = on_config(config, f, &degrees);
    let g = on_config(config, g, &degrees);
    let g_hat = -&g;
    let kw = k as f64 * config.omega();

    let f_cum = weighted(config, &f, |seg, y| Complex64::new(seg.alpha(y), kw * y)).cumulative_integral();
    let g_cum =
        weighted(config, &g_hat, |seg, y| Complex64::new(-seg.delta(y), -kw * y)).cumulative_integral();
    let w = w_from_integrals(config, k, f_cum.last_value(), g_cum.last_value());
    let r0 = config.r0();
    let segs = config.segments();
    let u = f_cum.map_with_position(|i, x, fx| {
        Complex64::new(-segs[i].alpha(x), -kw * x).exp() * (fx + r0 * w / delta_k)
    });
    let v = g_cum.map_with_position(|i, x, gx| {
        Complex64::new(segs[i].delta(x), kw * x).exp() * (gx + w / delta_k)
    });
    let residual = mode_residual(config, Operator::A, k, &u, &v, &f, &g);
    Ok(ModeSolveResult {
        u,
        v,
        boundary_determinant: delta_k,
        residual,
    })
}

/// Larger of the L2 norms of the two mode-equation residuals of `op`, plus
/// the boundary-condition defects.
pub fn mode_residual(
    config: &ProblemConfig,
    op: Operator,
    k: i64,
    u: &ModeFunction,
    v: &ModeFunction,
    f: &ModeFunction,
    g: &ModeFunction,
) -> f64 {
    let pair = ModePair::new(u.clone(), v.clone());
    let image = apply_mode(config, k, &pair, op);
    let f = f.on_grid(config.grid());
    let g = g.on_grid(config.grid());
    let ru = (&image.u - &f).norm();
    let rv = (&image.v - &g).norm();
    let bc0 = (u.first_value() - config.r0() * v.first_value()).norm();
    let bc1 = (v.last_value() - config.r1() * u.last_value()).norm();
    ru.max(rv) + bc0 + bc1
}

/// Per-mode action of the operators `A`, `B`, `A + B` and their adjoints.
pub(crate) fn apply_mode(
    config: &ProblemConfig,
    k: i64,
    pair: &ModePair,
    op: Operator,
) -> ModePair {
    let pair = pair.on_grid(config.grid());
    let segs = config.segments();
    let coef = |sel: fn(&crate::coefficients::SegmentData) -> f64| -> Vec<Complex64> {
        segs.iter().map(|s| Complex64::new(sel(s), 0.0)).collect()
    };
    let ikw = Complex64::new(0.0, k as f64 * config.omega());
    let a = coef(|s| s.a);
    let b = coef(|s| s.b);
    let c = coef(|s| s.c);
    let d = coef(|s| s.d);
    // A: (ikw u + u' + a u, ikw v - v' + d v);  adjoint: (-ikw p - p' + a p, -ikw q + q' + d q)
    let transport = |adjoint: bool| -> ModePair {
        let du = pair.u.derivative();
        let dv = pair.v.derivative();
        if adjoint {
            let u = &(&pair.u.scale_segments(&a) - &pair.u.scale(ikw)) - &du;
            let v = &(&pair.v.scale_segments(&d) - &pair.v.scale(ikw)) + &dv;
            ModePair::new(u, v)
        } else {
            let u = &(&pair.u.scale_segments(&a) + &pair.u.scale(ikw)) + &du;
            let v = &(&pair.v.scale_segments(&d) + &pair.v.scale(ikw)) - &dv;
            ModePair::new(u, v)
        }
    };
    // B: (b v, c u);  adjoint: (c q, b p)
    let coupling = |adjoint: bool| -> ModePair {
        if adjoint {
            ModePair::new(pair.v.scale_segments(&c), pair.u.scale_segments(&b))
        } else {
            ModePair::new(pair.v.scale_segments(&b), pair.u.scale_segments(&c))
        }
    };
    let sum = |x: ModePair, y: ModePair| ModePair::new(&x.u + &y.u, &x.v + &y.v);
    match op {
        Operator::A => transport(false),
        Operator::B => coupling(false),
        Operator::AAdjoint => transport(true),
        Operator::BAdjoint => coupling(true),
        Operator::Full => sum(transport(false), coupling(false)),
        Operator::FullAdjoint => sum(transport(true), coupling(true)),
    }
}

/// Shooting data for one mode: the homogeneous solution `Z` with `Z(0)` on
/// the left boundary line and, when forced, the particular solution `P` with
/// `P(0) = 0`.
#[derive(Clone, Debug)]
pub(crate) struct Propagation {
    pub homogeneous: ModePair,
    pub particular: Option<ModePair>,
    /// Right boundary functional of `Z(1)`.
    pub boundary_determinant: Complex64,
    /// Right boundary functional of `P(1)`.
    pub particular_defect: Complex64,
}

pub(crate) fn propagate(
    config: &ProblemConfig,
    system: System,
    k: i64,
    forcing: Option<(&ModeFunction, &ModeFunction)>,
    degrees: &[usize],
) -> Propagation {
    let omega = config.omega();
    let forcing = forcing.map(|(f, g)| {
        let f = on_config(config, f, degrees);
        let g = on_config(config, g, degrees);
        (f, -&g)
    });
    let mut z0: Vec2 = system.left_state(config.r0());
    let mut p0: Vec2 = [ZERO, ZERO];
    let mut z_segs: [Vec<Segment>; 2] = [Vec::new(), Vec::new()];
    let mut p_segs: [Vec<Segment>; 2] = [Vec::new(), Vec::new()];

    for (i, seg) in config.segments().iter().enumerate() {
        let gen = system.generator(seg, k, omega);
        let nodes = crate::chebyshev::nodes(degrees[i], seg.x0, seg.x1);
        let props: Vec<Mat2> = nodes.iter().map(|x| gen.exp_scaled(x - seg.x0)).collect();
        let z: Vec<Vec2> = props.iter().map(|e| e.apply(z0)).collect();
        push_pair(&mut z_segs, seg.x0, seg.x1, &z);
        z0 = *z.last().expect("nonempty");

        if let Some((f, g_hat)) = &forcing {
            let fv = &f.segments()[i].values;
            let gv = &g_hat.segments()[i].values;
            let mut i0 = Vec::with_capacity(nodes.len());
            let mut i1 = Vec::with_capacity(nodes.len());
            for (j, x) in nodes.iter().enumerate() {
                let back = gen.exp_scaled(seg.x0 - x).apply([fv[j], gv[j]]);
                i0.push(back[0]);
                i1.push(back[1]);
            }
            let half = seg.half();
            let c0 = crate::chebyshev::cumulative_integral(&i0, half);
            let c1 = crate::chebyshev::cumulative_integral(&i1, half);
            let p: Vec<Vec2> = props
                .iter()
                .enumerate()
                .map(|(j, e)| e.apply([p0[0] + c0[j], p0[1] + c1[j]]))
                .collect();
            push_pair(&mut p_segs, seg.x0, seg.x1, &p);
            p0 = *p.last().expect("nonempty");
        }
    }
    let [zu, zv] = z_segs;
    let homogeneous = ModePair::new(ModeFunction::from_segments(zu), ModeFunction::from_segments(zv));
    let particular = forcing.map(|_| {
        let [pu, pv] = p_segs;
        ModePair::new(ModeFunction::from_segments(pu), ModeFunction::from_segments(pv))
    });
    Propagation {
        homogeneous,
        particular,
        boundary_determinant: system.right_defect(config.r1(), z0),
        particular_defect: system.right_defect(config.r1(), p0),
    }
}

fn push_pair(out: &mut [Vec<Segment>; 2], x0: f64, x1: f64, states: &[Vec2]) {
    for (c, target) in out.iter_mut().enumerate() {
        target.push(Segment {
            x0,
            x1,
            values: states.iter().map(|s| s[c]).collect(),
        });
    }
}

/// Absolute singularity threshold for the boundary determinant of `system`
/// at mode `k`: `rel * max(1, |Delta_k|)`, rescaled for the adjoint by
/// `exp(alpha(1) - delta(1))`, the ratio of the two determinants when `b = c = 0`.
pub fn singular_tolerance(config: &ProblemConfig, system: System, k: i64, rel: f64) -> f64 {
    let base = rel * config.delta_k(k).norm().max(1.0);
    match system {
        System::Primal => base,
        System::Adjoint => base * (config.alpha1() - config.delta1()).exp(),
    }
}

/// Boundary determinant `L_k` of `system` at mode `k`.
pub fn boundary_determinant(config: &ProblemConfig, system: System, k: i64) -> Complex64 {
    let t = system_transfer_matrix(config, system, k, 0.0, 1.0);
    system.right_defect(config.r1(), t.matrix.apply(system.left_state(config.r0())))
}

/// Solves the coupled mode problem with the default singularity threshold.
pub fn solve_coupled_mode(
    config: &ProblemConfig,
    k: i64,
    f: &ModeFunction,
    g: &ModeFunction,
) -> Result<ModeSolveResult> {
    solve_coupled_mode_with(config, k, f, g, DEFAULT_SINGULAR_TOLERANCE)
}

/// Shooting solve: `U(0) = s (r0, 1)`, `U = s Z + P`, with `s` fixed by the
/// right boundary condition `L_k s + defect(P) = 0`.
pub fn solve_coupled_mode_with(
    config: &ProblemConfig,
    k: i64,
    f: &ModeFunction,
    g: &ModeFunction,
    rel_tolerance: f64,
) -> Result<ModeSolveResult> {
    let degrees = resolution_degrees(config, k, &[f, g]);
    let prop = propagate(config, System::Primal, k, Some((f, g)), &degrees);
    let tolerance = singular_tolerance(config, System::Primal, k, rel_tolerance);
    let l_k = prop.boundary_determinant;
    if l_k.norm() <= tolerance {
        return Err(Error::SingularMode {
            k,
            boundary_determinant: l_k,
            tolerance,
            compatibility_defect: prop.particular_defect,
        });
    }
    let s = -prop.particular_defect / l_k;
    let pair = combine(&prop, s);
    let residual = mode_residual(config, Operator::Full, k, &pair.u, &pair.v, f, g);
    Ok(ModeSolveResult {
        u: pair.u,
        v: pair.v,
        boundary_determinant: l_k,
        residual,
    })
}

/// `P + s Z`.
pub(crate) fn combine(prop: &Propagation, s: Complex64) -> ModePair {
    let z = &prop.homogeneous;
    let p = prop.particular.as_ref().expect("forced propagation");
    ModePair::new(&p.u + &z.u.scale(s), &p.v + &z.v.scale(s))
}

/// Kernel of one mode problem (complex dimension 0 or 1).
#[derive(Clone, Debug, PartialEq)]
pub struct ModeKernel {
    pub k: i64,
    pub boundary_determinant: Complex64,
    pub tolerance: f64,
    /// Unit-norm basis (`int |u|^2 + |v|^2 = 1`) when the mode is singular.
    pub basis: Option<ModePair>,
}

impl ModeKernel {
    pub fn dim(&self) -> usize {
        usize::from(self.basis.is_some())
    }

    /// `|L_k|` within a factor 10 of the threshold on either side.
    pub fn is_ambiguous(&self) -> bool {
        let l = self.boundary_determinant.norm();
        l > 0.1 * self.tolerance && l <= 10.0 * self.tolerance
    }
}

pub fn mode_kernel(config: &ProblemConfig, k: i64) -> ModeKernel {
    system_kernel(config, System::Primal, k, DEFAULT_SINGULAR_TOLERANCE)
}

pub fn adjoint_mode_kernel(config: &ProblemConfig, k: i64) -> ModeKernel {
    system_kernel(config, System::Adjoint, k, DEFAULT_SINGULAR_TOLERANCE)
}

/// Kernel of the homogeneous mode problem of `system`. The basis is the
/// normalized shooting solution started from the left boundary line, so its
/// phase is fixed by `Z(0)` being a positive multiple of the left state.
pub fn system_kernel(config: &ProblemConfig, system: System, k: i64, rel_tolerance: f64) -> ModeKernel {
    let l_k = boundary_determinant(config, system, k);
    let tolerance = singular_tolerance(config, system, k, rel_tolerance);
    let basis = (l_k.norm() <= tolerance).then(|| {
        let degrees = resolution_degrees(config, k, &[]);
        let z = propagate(config, system, k, None, &degrees).homogeneous;
        let norm = z.norm();
        z.scale(Complex64::new(1.0 / norm, 0.0))
    });
    ModeKernel {
        k,
        boundary_determinant: l_k,
        tolerance,
        basis,
    }
}
