//! Fourier-in-time solver and Fredholm analysis for time-periodic 2x2
//! first-order hyperbolic systems on `[0, 1]`:
//!
//! ```text
//! d_t u + d_x u + a(x) u + b(x) v = f,    u(0, t) = r0 v(0, t),
//! d_t v - d_x v + c(x) u + d(x) v = g,    v(1, t) = r1 u(1, t),
//! ```
//!
//! with piecewise-constant coefficients. Each Fourier mode in `t` reduces to a
//! two-point boundary value problem in `x`, solved in closed form when
//! `b = c = 0` and by transfer matrices otherwise.

pub mod chebyshev;
pub mod cli;
pub mod coefficients;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod io;
pub mod mode_function;
pub mod mode_solver;
pub mod parallel;
pub mod spectral;
pub mod transfer;

pub use coefficients::{ConditionReport, PiecewiseCoefficient, ProblemConfig};
pub use error::{Error, Result};
pub use field::{FourierField, ModePair};
pub use mode_function::ModeFunction;
pub use num_complex::Complex64;
pub use spectral::{Operator, SolverOptions};
pub use transfer::System;
