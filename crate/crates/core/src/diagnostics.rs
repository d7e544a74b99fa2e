//! Numerical witnesses for the functional-analytic structure: a bounded
//! sequence without convergent subsequence, decay of `(B A^{-1})^2` in the
//! mode index, and the translation modulus used as a compactness criterion.

use num_complex::Complex64;
use serde::Serialize;

use crate::chebyshev;
use crate::coefficients::ProblemConfig;
use crate::error::Result;
use crate::field::{FourierField, ModePair};
use crate::mode_function::ModeFunction;
use crate::mode_solver::{apply_mode, resolution_degrees, solve_decoupled_mode};
use crate::parallel;
use crate::spectral::Operator;

/// Single-mode field at `k = l`:
/// `u_l = (1 + l^2)^{-gamma/2} e^{-i l omega x} x`,
/// `v_l = (1 + l^2)^{-gamma/2} e^{i l omega x} (x - 1)`.
///
/// Both components vanish where `r0 = r1 = 0` requires, so the field lies in
/// the solution space while its transport image has unit size for every `l`.
pub fn noncompact_sequence(config: &ProblemConfig, l: i64) -> FourierField {
    let gamma = config.gamma();
    let weight = (1.0 + (l * l) as f64).powf(-0.5 * gamma);
    let lw = l as f64 * config.omega();
    let degrees = resolution_degrees(config, l, &[]);
    let grid = config.grid();
    let u = ModeFunction::sample_with_degrees(grid, &degrees, |x| {
        Complex64::from_polar(weight * x, -lw * x)
    });
    let v = ModeFunction::sample_with_degrees(grid, &degrees, |x| {
        Complex64::from_polar(weight, lw * x) * (x - 1.0)
    });
    let mut field = FourierField::new(gamma);
    field.insert(l, ModePair::new(u, v));
    field
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub k: i64,
    pub output_norm: f64,
    /// `(1 + |k|) * output_norm`
    pub ratio: f64,
}

/// `(B A^{-1})^2` applied to the unit right-hand side `(1, 0)` at mode `k`.
pub fn smoothing_image(config: &ProblemConfig, k: i64) -> Result<ModePair> {
    let grid = config.grid();
    let degrees = resolution_degrees(config, k, &[]);
    let mut pair = ModePair::new(
        ModeFunction::sample_with_degrees(grid, &degrees, |_| Complex64::new(1.0, 0.0)),
        ModeFunction::sample_with_degrees(grid, &degrees, |_| Complex64::new(0.0, 0.0)),
    );
    for _ in 0..2 {
        let solved = solve_decoupled_mode(config, k, &pair.u, &pair.v)?.into_pair();
        pair = apply_mode(config, k, &solved, Operator::B);
    }
    Ok(pair)
}

/// `L2` norms of [`smoothing_image`] over `ks`.
pub fn smoothing_decay(config: &ProblemConfig, ks: &[i64]) -> Result<Vec<DecayRow>> {
    config.require_condition()?;
    parallel::map(ks, |&k| {
        let output_norm = smoothing_image(config, k)?.norm();
        Ok(DecayRow {
            k,
            output_norm,
            ratio: (1.0 + k.unsigned_abs() as f64) * output_norm,
        })
    })
    .into_iter()
    .collect()
}

/// Least-squares slope of `ln(output_norm)` against `ln(1 + |k|)`.
pub fn decay_slope(rows: &[DecayRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((1.0 + r.k.unsigned_abs() as f64).ln(), r.output_norm.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `sqrt(sum_k (1 + k^2)^gamma int_0^1 |u_k(x + xi) e^{ik omega tau} - u_k(x)|^2 dx)`
/// summed over both components, with `u_k(x + xi) = 0` outside `[0, 1]`.
pub fn shift_modulus(field: &FourierField, omega: f64, xi: f64, tau: f64) -> f64 {
    let mut total = 0.0;
    for (k, pair) in field.iter() {
        let rot = Complex64::from_polar(1.0, k as f64 * omega * tau);
        let weight = (1.0 + (k * k) as f64).powf(field.gamma());
        total += weight * (shifted_defect(&pair.u, xi, rot) + shifted_defect(&pair.v, xi, rot));
    }
    total.sqrt()
}

/// `int_0^1 |f(x + xi) rot - f(x)|^2 dx` with zero extension.
fn shifted_defect(f: &ModeFunction, xi: f64, rot: Complex64) -> f64 {
    let bp = f.breakpoints();
    let mut cuts: Vec<f64> = bp
        .iter()
        .flat_map(|&b| [b, b - xi])
        .filter(|x| (0.0..=1.0).contains(x))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let n = 2 * f.degrees().into_iter().max().unwrap_or(0) + 2;
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        let mid = 0.5 * (x0 + x1);
        let inside = (0.0..=1.0).contains(&(mid + xi));
        let values: Vec<Complex64> = chebyshev::nodes(n, x0, x1)
            .into_iter()
            .map(|x| {
                let shifted = if inside {
                    eval_in_piece(f, (x + xi).clamp(0.0, 1.0), mid + xi)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let d = shifted * rot - eval_in_piece(f, x, mid);
                Complex64::new(d.norm_sqr(), 0.0)
            })
            .collect();
        acc += chebyshev::integral(&values, 0.5 * (x1 - x0)).re;
    }
    acc
}

/// Value at `x` of the polynomial piece containing `anchor`, so that endpoint
/// samples do not jump to a neighbouring segment.
fn eval_in_piece(f: &ModeFunction, x: f64, anchor: f64) -> Complex64 {
    let seg = f
        .segments()
        .iter()
        .find(|s| anchor >= s.x0 && anchor <= s.x1)
        .unwrap_or_else(|| f.segments().last().expect("non-empty"));
    chebyshev::evaluate(&seg.values, seg.x0, seg.x1, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one_segment() -> ProblemConfig {
        ProblemConfig::constant(2.0 * PI, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn noncompact_first_member() {
        let field = noncompact_sequence(&one_segment(), 1);
        let u = &field.get(1).unwrap().u;
        assert!((u.norm_sq() - 1.0 / 6.0).abs() < 1e-13);
        assert_eq!(u.first_value().norm(), 0.0);
        assert!(field.get(1).unwrap().v.last_value().norm() < 1e-15);
    }

    #[test]
    fn shift_of_constant_loses_boundary_mass() {
        let f = ModeFunction::constant(&[0.0, 1.0], 8, Complex64::new(1.0, 0.0));
        let mut field = FourierField::new(1.0);
        field.insert(0, ModePair::new(f, ModeFunction::zeros(&[0.0, 1.0], 8)));
        assert_eq!(shift_modulus(&field, 1.0, 0.0, 0.0), 0.0);
        assert!((shift_modulus(&field, 1.0, 0.1, 0.7) - 0.1f64.sqrt()).abs() < 1e-12);
        assert!((shift_modulus(&field, 1.0, -0.1, 0.0) - 0.1f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn shift_across_breakpoints() {
        let bp = [0.0, 0.4, 1.0];
        let f = ModeFunction::sample_segmentwise(&bp, &[6, 6], |i, x| Complex64::new(i as f64 + x, 0.0));
        let mut field = FourierField::new(1.0);
        field.insert(0, ModePair::new(f, ModeFunction::zeros(&bp, 6)));
        // u(x) = x + [x >= 0.4]; shift 0.1: jump region [0.3, 0.4) contributes
        // (x + 0.1 + 1 - x)^2 = 1.21 over length 0.1, elsewhere 0.01, tail 0.1 lost.
        let expected = (1.21 * 0.1 + 0.01 * 0.8 + quad_tail()).sqrt();
        assert!((shift_modulus(&field, 1.0, 0.1, 0.0) - expected).abs() < 1e-12);
    }

    /// `int_{0.9}^1 (x + 1)^2 dx`
    fn quad_tail() -> f64 {
        (2.0f64.powi(3) - 1.9f64.powi(3)) / 3.0
    }

    #[test]
    fn uncoupled_image_vanishes() {
        let cfg = ProblemConfig::constant(2.0 * PI, 1.0, 0.5, 0.5, 0.3, 0.0, 0.0, 0.0).unwrap();
        let rows = smoothing_decay(&cfg, &[0, 1, 5]).unwrap();
        assert!(rows.iter().all(|r| r.output_norm == 0.0));
    }
}
