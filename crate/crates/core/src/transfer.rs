//! Closed-form 2x2 matrix exponentials and transfer matrices of the
//! per-mode first-order systems.

use std::ops::Mul;

use num_complex::Complex64;
use serde::Serialize;

use crate::coefficients::{segment_index, ProblemConfig, SegmentData};

/// A 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

/// A complex 2-vector `(first, second)`.
pub type Vec2 = [Complex64; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, x: Vec2) -> Vec2 {
        let m = &self.0;
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `exp(s M)` in closed form.
    ///
    /// Triangular generators use the divided-difference formula; otherwise the
    /// exponential is `e^{s tau/2} (cosh(s mu) I + sinh(s mu)/mu (M - tau/2 I))`
    /// with `mu^2 = (tau/2)^2 - det M`, switching to spectral projectors once
    /// `|Re(s mu)|` is large enough for `cosh - sinh` to cancel. The
    /// `mu -> 0` limit is the confluent form `e^{s lambda}(I + s (M - lambda I))`.
    pub fn exp_scaled(&self, s: f64) -> Self {
        let m = &self.0;
        if m[0][1] == ZERO || m[1][0] == ZERO {
            return self.exp_triangular(s);
        }
        let half_tr = self.trace() * 0.5;
        let mu = (half_tr * half_tr - self.det()).sqrt();
        let smu = mu * s;
        let shifted = Mat2([[m[0][0] - half_tr, m[0][1]], [m[1][0], m[1][1] - half_tr]]);
        if smu.re.abs() <= 2.0 {
            let (ch, shc) = cosh_sinhc(smu);
            let pre = (half_tr * s).exp();
            let n = &shifted.0;
            Mat2([
                [pre * (ch + shc * s * n[0][0]), pre * shc * s * n[0][1]],
                [pre * shc * s * n[1][0], pre * (ch + shc * s * n[1][1])],
            ])
        } else {
            // distinct eigenvalues lambda_pm = tau/2 +- mu, well separated
            let ep = ((half_tr + mu) * s).exp();
            let em = ((half_tr - mu) * s).exp();
            let n = &shifted.0;
            // P_pm = (mu I +- (M - tau/2 I)) / (2 mu)
            let inv2mu = (mu * 2.0).inv();
            let sum = (ep + em) * 0.5;
            let diff = (ep - em) * inv2mu;
            Mat2([
                [sum + diff * n[0][0], diff * n[0][1]],
                [diff * n[1][0], sum + diff * n[1][1]],
            ])
        }
    }

    fn exp_triangular(&self, s: f64) -> Self {
        let m = &self.0;
        let e0 = (m[0][0] * s).exp();
        let e1 = (m[1][1] * s).exp();
        // (e^{s m00} - e^{s m11}) / (m00 - m11), stable as m00 -> m11
        let dd = {
            let z = (m[0][0] - m[1][1]) * s;
            e1 * exprel(z) * s
        };
        Mat2([[e0, m[0][1] * dd], [m[1][0] * dd, e1]])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

/// `(e^z - 1) / z`.
fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        ONE + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)))
    } else {
        (z.exp() - ONE) / z
    }
}

/// `(cosh z, sinh(z)/z)`.
fn cosh_sinhc(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        (
            ONE + z2 * (0.5 + z2 * (1.0 / 24.0 + z2 / 720.0)),
            ONE + z2 * (1.0 / 6.0 + z2 * (1.0 / 120.0 + z2 / 5040.0)),
        )
    } else {
        (z.cosh(), z.sinh() / z)
    }
}

/// Which per-mode system is propagated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    /// `u' = -(a + ik omega) u - b v + f`, `v' = c u + (d + ik omega) v - g`.
    Primal,
    /// `phi' = (a - ik omega) phi + c psi`, `psi' = -b phi - (d - ik omega) psi`.
    Adjoint,
}

impl System {
    /// Constant generator `M` of `U' = M U` on one segment.
    pub fn generator(self, seg: &SegmentData, k: i64, omega: f64) -> Mat2 {
        let ikw = Complex64::new(0.0, k as f64 * omega);
        let re = |x: f64| Complex64::new(x, 0.0);
        match self {
            System::Primal => Mat2([
                [-(re(seg.a) + ikw), re(-seg.b)],
                [re(seg.c), re(seg.d) + ikw],
            ]),
            System::Adjoint => Mat2([
                [re(seg.a) - ikw, re(seg.c)],
                [re(-seg.b), -(re(seg.d) - ikw)],
            ]),
        }
    }

    /// `int tr M` from `0` to `x` (Liouville exponent of the determinant).
    pub fn trace_integral(self, config: &ProblemConfig, x: f64) -> f64 {
        match self {
            System::Primal => config.delta(x) - config.alpha(x),
            System::Adjoint => config.alpha(x) - config.delta(x),
        }
    }

    /// Left boundary data of the one-parameter family satisfying the left
    /// reflection condition, at parameter 1.
    pub fn left_state(self, r0: f64) -> Vec2 {
        let r0 = Complex64::new(r0, 0.0);
        match self {
            // u(0) = r0 v(0)
            System::Primal => [r0, ONE],
            // psi(0) = r0 phi(0)
            System::Adjoint => [ONE, r0],
        }
    }

    /// Right boundary functional; zero iff the right reflection condition holds.
    pub fn right_defect(self, r1: f64, state: Vec2) -> Complex64 {
        match self {
            // v(1) - r1 u(1)
            System::Primal => state[1] - state[0] * r1,
            // phi(1) - r1 psi(1)
            System::Adjoint => state[0] - state[1] * r1,
        }
    }
}

/// Fundamental solution `Phi(x1) Phi(x0)^{-1}` of a per-mode system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix {
    pub matrix: Mat2,
    pub x0: f64,
    pub x1: f64,
}

impl TransferMatrix {
    pub fn det(&self) -> Complex64 {
        self.matrix.det()
    }
}

/// Transfer matrix of the primal mode system between `x0 <= x1`.
pub fn transfer_matrix(config: &ProblemConfig, k: i64, x0: f64, x1: f64) -> TransferMatrix {
    system_transfer_matrix(config, System::Primal, k, x0, x1)
}

/// Product of closed-form segment exponentials, chained across breakpoints.
pub fn system_transfer_matrix(
    config: &ProblemConfig,
    system: System,
    k: i64,
    x0: f64,
    x1: f64,
) -> TransferMatrix {
    assert!(
        (0.0..=1.0).contains(&x0) && (0.0..=1.0).contains(&x1) && x0 <= x1,
        "transfer matrix needs 0 <= x0 <= x1 <= 1"
    );
    let mut acc = Mat2::identity();
    if x1 > x0 {
        let grid = config.grid();
        let first = segment_index(grid, x0);
        for seg in &config.segments()[first..] {
            if seg.x0 >= x1 {
                break;
            }
            let lo = seg.x0.max(x0);
            let hi = seg.x1.min(x1);
            if hi > lo {
                let g = system.generator(seg, k, config.omega());
                acc = g.exp_scaled(hi - lo) * acc;
            }
        }
    }
    TransferMatrix {
        matrix: acc,
        x0,
        x1,
    }
}
