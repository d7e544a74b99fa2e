//! Shared helpers for integration tests: random configurations and fields,
//! and reference solutions computed without the library's solver paths.

#![allow(dead_code)]

use std::f64::consts::PI;

use hyperbolic_fredholm::mode_solver::boundary_determinant;
use hyperbolic_fredholm::{
    Complex64, FourierField, ModeFunction, ModePair, PiecewiseCoefficient, ProblemConfig, System,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn re(x: f64) -> C {
    C::new(x, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn constant_config(omega: f64, r0: f64, r1: f64, a: f64, b: f64, c: f64, d: f64) -> ProblemConfig {
    ProblemConfig::constant(omega, 1.0, r0, r1, a, b, c, d).unwrap()
}

/// `a = d = 0`, `b = c = pi/2`, `r0 = r1 = 0`: mode 0 has the kernel
/// `(sin, -cos)(pi x / 2)` up to scaling.
pub fn resonant_config() -> ProblemConfig {
    constant_config(1.0, 0.0, 0.0, 0.0, PI / 2.0, PI / 2.0, 0.0)
}

pub fn random_breakpoints(rng: &mut impl Rng, segments: usize) -> Vec<f64> {
    let mut inner: Vec<f64> = (1..segments).map(|_| rng.gen_range(0.1..0.9)).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup_by(|a, b| (*a - *b).abs() < 0.05);
    let mut bp = vec![0.0];
    bp.extend(inner);
    bp.push(1.0);
    bp
}

fn random_coefficient(rng: &mut impl Rng, bp: &[f64], scale: f64) -> PiecewiseCoefficient {
    let values = (1..bp.len()).map(|_| rng.gen_range(-scale..scale)).collect();
    PiecewiseCoefficient::new(bp.to_vec(), values).unwrap()
}

/// Random piecewise-constant configuration with at most four merged segments
/// whose invertibility condition holds with a relative margin of 10%.
pub fn random_config(rng: &mut impl Rng, coupled: bool) -> ProblemConfig {
    loop {
        let segments = rng.gen_range(1..=4);
        let bp = random_breakpoints(rng, segments);
        let omega = rng.gen_range(0.5..3.0);
        let r0 = rng.gen_range(-1.5..1.5);
        let r1 = rng.gen_range(-1.5..1.5);
        let a = random_coefficient(rng, &bp, 1.0);
        let d = random_coefficient(rng, &bp, 1.0);
        let (b, c) = if coupled {
            (random_coefficient(rng, &bp, 2.0), random_coefficient(rng, &bp, 2.0))
        } else {
            (PiecewiseCoefficient::zero(), PiecewiseCoefficient::zero())
        };
        let cfg = ProblemConfig::new(omega, 1.0, r0, r1, a, b, c, d).unwrap();
        let cond = cfg.check_condition();
        if (cond.lhs - cond.rhs).abs() > 0.1 * cond.rhs {
            return cfg;
        }
    }
}

/// Same coefficients with `b` and `c` multiplied by `lambda`.
pub fn scale_coupling(cfg: &ProblemConfig, lambda: f64) -> ProblemConfig {
    let scaled = |p: &PiecewiseCoefficient| {
        PiecewiseCoefficient::new(p.breakpoints().to_vec(), p.values().iter().map(|v| v * lambda).collect())
            .unwrap()
    };
    ProblemConfig::new(
        cfg.omega(),
        cfg.gamma(),
        cfg.r0(),
        cfg.r1(),
        cfg.a().clone(),
        scaled(cfg.b()),
        scaled(cfg.c()),
        cfg.d().clone(),
    )
    .unwrap()
}

/// Scales the coupling of `cfg` until the real mode-0 boundary determinant
/// changes sign, then bisects onto the root. `None` if no sign change is
/// found for scalings up to 8.
pub fn make_resonant(cfg: &ProblemConfig) -> Option<ProblemConfig> {
    let l0 = |lam: f64| boundary_determinant(&scale_coupling(cfg, lam), System::Primal, 0).re;
    let mut lo = 0.0;
    let f_lo = l0(lo);
    let mut hi = None;
    for i in 1..=64 {
        let lam = i as f64 * 0.125;
        if l0(lam).signum() != f_lo.signum() {
            hi = Some(lam);
            break;
        }
        lo = lam;
    }
    let mut hi = hi?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if l0(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (l0(lo).abs(), l0(hi).abs());
    Some(scale_coupling(cfg, if a < b { lo } else { hi }))
}

/// Smooth random function: `c0 + c1 x + c2 exp(i beta x)`.
#[derive(Clone, Copy, Debug)]
pub struct SmoothData {
    pub c: [C; 3],
    pub beta: f64,
}

impl SmoothData {
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut z = || C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let c = [z(), z(), z()];
        Self {
            c,
            beta: rng.gen_range(-4.0..4.0),
        }
    }

    pub fn eval(&self, x: f64) -> C {
        self.c[0] + self.c[1] * x + self.c[2] * C::new(0.0, self.beta * x).exp()
    }

    pub fn on(&self, grid: &[f64], degree: usize) -> ModeFunction {
        ModeFunction::sample(grid, degree, |x| self.eval(x))
    }
}

/// Chebyshev-Lobatto nodes on `[x0, x1]`, ascending.
pub fn cheb_nodes(n: usize, x0: f64, x1: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let t = -(PI * j as f64 / n as f64).cos();
            0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t
        })
        .collect()
}

/// Differentiation matrix on ascending Chebyshev-Lobatto nodes of `[-1, 1]`
/// (negative-sum trick on the diagonal).
pub fn cheb_diff(n: usize) -> DMatrix<f64> {
    let x: Vec<f64> = (0..=n).map(|j| -(PI * j as f64 / n as f64).cos()).collect();
    let cw = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 } * if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = cw(i) / cw(j) / (x[i] - x[j]);
            }
        }
    }
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d
}

/// Clenshaw-Curtis weights on `[-1, 1]` for `n + 1` Lobatto nodes.
pub fn cc_weights(n: usize) -> Vec<f64> {
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / n as f64).collect();
    let mut w = vec![0.0; n + 1];
    let interior: Vec<usize> = (1..n).collect();
    let mut v = vec![1.0; n.saturating_sub(1)];
    if n.is_multiple_of(2) {
        w[0] = 1.0 / ((n * n) as f64 - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            for (vi, &j) in v.iter_mut().zip(&interior) {
                *vi -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
        for (vi, &j) in v.iter_mut().zip(&interior) {
            *vi -= (n as f64 * theta[j]).cos() / ((n * n) as f64 - 1.0);
        }
    } else {
        w[0] = 1.0 / (n * n) as f64;
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            for (vi, &j) in v.iter_mut().zip(&interior) {
                *vi -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
        }
    }
    for (vi, &j) in v.iter().zip(&interior) {
        w[j] = 2.0 * vi / n as f64;
    }
    w
}

/// Dense collocation solution of one decoupled mode,
/// `u' + (a + ik omega) u = f`, `-v' + (d + ik omega) v = g`,
/// `u(0) = r0 v(0)`, `v(1) = r1 u(1)`, on the merged grid of `cfg`.
pub struct Collocation {
    pub grid: Vec<f64>,
    pub degrees: Vec<usize>,
    pub u: Vec<Vec<C>>,
    pub v: Vec<Vec<C>>,
}

pub fn collocation_oracle(
    cfg: &ProblemConfig,
    k: i64,
    f: impl Fn(f64) -> C,
    g: impl Fn(f64) -> C,
) -> Collocation {
    let grid = cfg.grid().to_vec();
    let kw = k as f64 * cfg.omega();
    let ikw = C::new(0.0, kw);
    let segs = grid.len() - 1;
    let degrees: Vec<usize> = (0..segs)
        .map(|s| {
            let len = grid[s + 1] - grid[s];
            let mid = 0.5 * (grid[s] + grid[s + 1]);
            let rate = kw.abs() + cfg.a().value_at(mid).abs() + cfg.d().value_at(mid).abs();
            30 + (rate * len).ceil() as usize
        })
        .collect();
    let offs: Vec<usize> = degrees
        .iter()
        .scan(0, |acc, &n| {
            let o = *acc;
            *acc += n + 1;
            Some(o)
        })
        .collect();
    let m: usize = degrees.iter().map(|n| n + 1).sum();
    // unknowns: u block [0, m), v block [m, 2m)
    let mut a_mat = DMatrix::<C>::zeros(2 * m, 2 * m);
    let mut rhs = DVector::<C>::zeros(2 * m);
    for s in 0..segs {
        let n = degrees[s];
        let (x0, x1) = (grid[s], grid[s + 1]);
        let scale = 2.0 / (x1 - x0);
        let d = cheb_diff(n);
        let xs = cheb_nodes(n, x0, x1);
        let mid = 0.5 * (x0 + x1);
        let (av, dv) = (cfg.a().value_at(mid), cfg.d().value_at(mid));
        let o = offs[s];
        for i in 0..=n {
            let (ru, rv) = (o + i, m + o + i);
            for j in 0..=n {
                a_mat[(ru, o + j)] += re(scale * d[(i, j)]);
                a_mat[(rv, m + o + j)] -= re(scale * d[(i, j)]);
            }
            a_mat[(ru, o + i)] += re(av) + ikw;
            a_mat[(rv, m + o + i)] += re(dv) + ikw;
            rhs[ru] = f(xs[i]);
            rhs[rv] = g(xs[i]);
        }
        // u row at the left node: boundary condition or continuity
        let ru = o;
        a_mat.row_mut(ru).fill(C::new(0.0, 0.0));
        rhs[ru] = C::new(0.0, 0.0);
        a_mat[(ru, o)] = re(1.0);
        if s == 0 {
            a_mat[(ru, m)] = re(-cfg.r0());
        } else {
            a_mat[(ru, offs[s - 1] + degrees[s - 1])] = re(-1.0);
        }
        // v row at the right node
        let rv = m + o + n;
        a_mat.row_mut(rv).fill(C::new(0.0, 0.0));
        rhs[rv] = C::new(0.0, 0.0);
        a_mat[(rv, m + o + n)] = re(1.0);
        if s + 1 == segs {
            a_mat[(rv, o + n)] = re(-cfg.r1());
        } else {
            a_mat[(rv, m + offs[s + 1])] = re(-1.0);
        }
    }
    let sol = a_mat.lu().solve(&rhs).expect("collocation system is regular");
    let block = |base: usize| -> Vec<Vec<C>> {
        (0..segs)
            .map(|s| (0..=degrees[s]).map(|i| sol[base + offs[s] + i]).collect())
            .collect()
    };
    Collocation {
        u: block(0),
        v: block(m),
        grid,
        degrees,
    }
}

impl Collocation {
    /// Relative `L2` distance of `(u, v)` to the oracle, by Clenshaw-Curtis
    /// quadrature on the oracle nodes.
    pub fn relative_error(&self, u: &ModeFunction, v: &ModeFunction) -> f64 {
        let mut err = 0.0;
        let mut norm = 0.0;
        for s in 0..self.degrees.len() {
            let n = self.degrees[s];
            let (x0, x1) = (self.grid[s], self.grid[s + 1]);
            let w = cc_weights(n);
            let half = 0.5 * (x1 - x0);
            for (i, x) in cheb_nodes(n, x0, x1).into_iter().enumerate() {
                let (uu, vv) = (eval_in(u, s, x), eval_in(v, s, x));
                err += w[i] * half * ((uu - self.u[s][i]).norm_sqr() + (vv - self.v[s][i]).norm_sqr());
                norm += w[i] * half * (self.u[s][i].norm_sqr() + self.v[s][i].norm_sqr());
            }
        }
        (err / norm).sqrt()
    }
}

/// Evaluation restricted to segment `s` (endpoints use that segment's limits).
pub fn eval_in(f: &ModeFunction, s: usize, x: f64) -> C {
    let seg = &f.segments()[s];
    if x <= seg.x0 {
        seg.values[0]
    } else if x >= seg.x1 {
        *seg.values.last().unwrap()
    } else {
        f.eval(x)
    }
}

/// Composite Gauss-Legendre rule (`pieces` panels of `order` points) on `[x0, x1]`.
pub fn gauss_legendre(x0: f64, x1: f64, pieces: usize, order: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gl_nodes(order);
    let h = (x1 - x0) / pieces as f64;
    let mut out = Vec::with_capacity(pieces * order);
    for p in 0..pieces {
        let a = x0 + p as f64 * h;
        for (t, w) in nodes.iter().zip(&weights) {
            out.push((a + 0.5 * h * (t + 1.0), 0.5 * h * w));
        }
    }
    out
}

fn gl_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, z);
                for j in 2..=n {
                    let q2 = ((2 * j - 1) as f64 * z * q1 - (j - 1) as f64 * q0) / j as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
    }
    (x, w)
}

/// Random real field on modes `0..=kmax` whose modes satisfy the primal
/// (`adjoint = false`) or adjoint boundary conditions.
pub fn random_boundary_field(
    rng: &mut impl Rng,
    cfg: &ProblemConfig,
    kmax: i64,
    adjoint: bool,
) -> FourierField {
    let grid = cfg.grid().to_vec();
    let (r0, r1) = (cfg.r0(), cfg.r1());
    let modes: Vec<(i64, ModePair)> = (0..=kmax)
        .map(|k| {
            let p = SmoothData::random(rng);
            let q = SmoothData::random(rng);
            // first/second component before the boundary fix-up
            let (p0, q0) = (p.eval(0.0), q.eval(0.0));
            let fixed = |x: f64| -> (C, C) {
                if !adjoint {
                    // u(0) = r0 v(0): shift u by (r0 q0 - p0)(1 - x);
                    // v(1) = r1 u(1): shift v by (r1 u1 - q1) x.
                    let u = p.eval(x) + (q0 * r0 - p0) * (1.0 - x);
                    let u1 = p.eval(1.0);
                    let v = q.eval(x) + (u1 * r1 - q.eval(1.0)) * x;
                    (u, v)
                } else {
                    // psi(0) = r0 phi(0), phi(1) = r1 psi(1).
                    let psi = q.eval(x) + (p0 * r0 - q0) * (1.0 - x);
                    let psi1 = q.eval(1.0);
                    let phi = p.eval(x) + (psi1 * r1 - p.eval(1.0)) * x;
                    (phi, psi)
                }
            };
            let u = ModeFunction::sample(&grid, 40, |x| fixed(x).0);
            let v = ModeFunction::sample(&grid, 40, |x| fixed(x).1);
            (k, ModePair::new(u, v))
        })
        .collect();
    FourierField::from_nonnegative(cfg.gamma(), modes).unwrap()
}

/// `sqrt(sum_k int |u_k|^2 + |v_k|^2)`.
pub fn l2(field: &FourierField) -> f64 {
    field.iter().map(|(_, p)| p.norm_sq()).sum::<f64>().sqrt()
}

pub fn constant_field(grid: &[f64], k: i64, u: C, v: C) -> FourierField {
    let mut field = FourierField::new(1.0);
    field.insert(k, ModePair::new(ModeFunction::constant(grid, 16, u), ModeFunction::constant(grid, 16, v)));
    field
}
