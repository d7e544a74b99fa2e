//! Piecewise-constant coefficients and the problem configuration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the invertibility condition `|r0 r1| != exp(alpha(1) + delta(1))`.
pub const CONDITION_TOLERANCE: f64 = 1e-9;

/// A real coefficient on `[0, 1]`, constant between consecutive breakpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoefficient", into = "RawCoefficient")]
pub struct PiecewiseCoefficient {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawCoefficient {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawCoefficient> for PiecewiseCoefficient {
    type Error = Error;
    fn try_from(raw: RawCoefficient) -> Result<Self> {
        PiecewiseCoefficient::new(raw.breakpoints, raw.values)
    }
}

impl From<PiecewiseCoefficient> for RawCoefficient {
    fn from(c: PiecewiseCoefficient) -> Self {
        RawCoefficient {
            breakpoints: c.breakpoints,
            values: c.values,
        }
    }
}

impl PiecewiseCoefficient {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::invariant(
                "one_value_per_segment",
                format!(
                    "{} breakpoints need {} values, got {}",
                    breakpoints.len(),
                    breakpoints.len() - 1,
                    values.len()
                ),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invariant("finite_values", format!("value {v}")));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: vec![0.0, 1.0],
            values: vec![value],
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Value on the segment containing `x`; right-continuous, with `x = 1`
    /// belonging to the last segment.
    pub fn value_at(&self, x: f64) -> f64 {
        self.values[segment_index(&self.breakpoints, x)]
    }

    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// `int_0^x coef`, exact for piecewise-constant input.
    pub fn antiderivative(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        Ok(self.integrate_to(x))
    }

    fn integrate_to(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (w, v) in self.breakpoints.windows(2).zip(&self.values) {
            if x <= w[0] {
                break;
            }
            acc += v * (x.min(w[1]) - w[0]);
        }
        acc
    }
}

fn check_breakpoints(b: &[f64]) -> Result<()> {
    if b.len() < 2 {
        return Err(Error::invariant(
            "breakpoints_span_unit_interval",
            "need at least two breakpoints",
        ));
    }
    if b[0] != 0.0 || b[b.len() - 1] != 1.0 {
        return Err(Error::invariant(
            "breakpoints_span_unit_interval",
            format!("first = {}, last = {}", b[0], b[b.len() - 1]),
        ));
    }
    if let Some(w) = b.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::invariant(
            "breakpoints_strictly_increasing",
            format!("{} followed by {}", w[0], w[1]),
        ));
    }
    Ok(())
}

pub(crate) fn segment_index(breakpoints: &[f64], x: f64) -> usize {
    let last = breakpoints.len() - 2;
    // first breakpoint strictly greater than x, minus one
    let idx = breakpoints.partition_point(|&b| b <= x);
    idx.saturating_sub(1).min(last)
}

/// Coefficient values and antiderivatives on one segment of the merged grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentData {
    pub x0: f64,
    pub x1: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// `alpha(x0)` and `delta(x0)`.
    pub alpha0: f64,
    pub delta0: f64,
}

impl SegmentData {
    pub fn len(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn half(&self) -> f64 {
        0.5 * (self.x1 - self.x0)
    }

    pub fn alpha(&self, x: f64) -> f64 {
        self.alpha0 + self.a * (x - self.x0)
    }

    pub fn delta(&self, x: f64) -> f64 {
        self.delta0 + self.d * (x - self.x0)
    }
}

/// Verdict on the invertibility condition of the decoupled operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `|r0 r1|`
    pub lhs: f64,
    /// `exp(alpha(1) + delta(1))`
    pub rhs: f64,
    pub satisfied: bool,
    /// `|exp(delta(1)) - |r0 r1| exp(-alpha(1))|`, a lower bound for every `|Delta_k|`.
    pub delta_lower_bound: f64,
}

/// A full problem instance: frequency, scale, reflection coefficients and
/// the four coefficient functions.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    omega: f64,
    gamma: f64,
    r0: f64,
    r1: f64,
    a: PiecewiseCoefficient,
    b: PiecewiseCoefficient,
    c: PiecewiseCoefficient,
    d: PiecewiseCoefficient,
    grid: Vec<f64>,
    segments: Vec<SegmentData>,
}

impl ProblemConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega: f64,
        gamma: f64,
        r0: f64,
        r1: f64,
        a: PiecewiseCoefficient,
        b: PiecewiseCoefficient,
        c: PiecewiseCoefficient,
        d: PiecewiseCoefficient,
    ) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invariant("omega_positive", format!("omega = {omega}")));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::invariant("gamma_at_least_one", format!("gamma = {gamma}")));
        }
        if !(r0.is_finite() && r1.is_finite()) {
            return Err(Error::invariant("finite_reflections", format!("r0 = {r0}, r1 = {r1}")));
        }
        let mut grid: Vec<f64> = [&a, &b, &c, &d]
            .iter()
            .flat_map(|coef| coef.breakpoints().iter().copied())
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let mut segments = Vec::with_capacity(grid.len() - 1);
        let (mut alpha0, mut delta0) = (0.0, 0.0);
        for w in grid.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let seg = SegmentData {
                x0: w[0],
                x1: w[1],
                a: a.value_at(mid),
                b: b.value_at(mid),
                c: c.value_at(mid),
                d: d.value_at(mid),
                alpha0,
                delta0,
            };
            alpha0 = a.integrate_to(w[1]);
            delta0 = d.integrate_to(w[1]);
            segments.push(seg);
        }
        Ok(Self {
            omega,
            gamma,
            r0,
            r1,
            a,
            b,
            c,
            d,
            grid,
            segments,
        })
    }

    /// All coefficients constant on `[0, 1]`.
    #[allow(clippy::too_many_arguments)]
    pub fn constant(
        omega: f64,
        gamma: f64,
        r0: f64,
        r1: f64,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    ) -> Result<Self> {
        Self::new(
            omega,
            gamma,
            r0,
            r1,
            PiecewiseCoefficient::constant(a),
            PiecewiseCoefficient::constant(b),
            PiecewiseCoefficient::constant(c),
            PiecewiseCoefficient::constant(d),
        )
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn a(&self) -> &PiecewiseCoefficient {
        &self.a
    }
    pub fn b(&self) -> &PiecewiseCoefficient {
        &self.b
    }
    pub fn c(&self) -> &PiecewiseCoefficient {
        &self.c
    }
    pub fn d(&self) -> &PiecewiseCoefficient {
        &self.d
    }

    /// Union of all coefficient breakpoints.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn segments(&self) -> &[SegmentData] {
        &self.segments
    }

    pub fn is_decoupled(&self) -> bool {
        self.b.is_zero() && self.c.is_zero()
    }

    pub fn alpha(&self, x: f64) -> f64 {
        self.segments[segment_index(&self.grid, x)].alpha(x)
    }

    pub fn delta(&self, x: f64) -> f64 {
        self.segments[segment_index(&self.grid, x)].delta(x)
    }

    pub fn alpha1(&self) -> f64 {
        self.a.integrate_to(1.0)
    }

    pub fn delta1(&self) -> f64 {
        self.d.integrate_to(1.0)
    }

    pub fn check_condition(&self) -> ConditionReport {
        let lhs = (self.r0 * self.r1).abs();
        let rhs = (self.alpha1() + self.delta1()).exp();
        let satisfied = (lhs - rhs).abs() > CONDITION_TOLERANCE * rhs.max(1.0);
        let delta_lower_bound = (self.delta1().exp() - lhs * (-self.alpha1()).exp()).abs();
        ConditionReport {
            lhs,
            rhs,
            satisfied,
            delta_lower_bound,
        }
    }

    pub(crate) fn require_condition(&self) -> Result<ConditionReport> {
        let report = self.check_condition();
        if report.satisfied {
            Ok(report)
        } else {
            Err(Error::ConditionViolated {
                lhs: report.lhs,
                rhs: report.rhs,
            })
        }
    }

    /// `Delta_k = exp(i k omega + delta(1)) - r0 r1 exp(-i k omega - alpha(1))`.
    pub fn delta_k(&self, k: i64) -> Complex64 {
        let phase = k as f64 * self.omega;
        Complex64::new(self.delta1(), phase).exp()
            - self.r0 * self.r1 * Complex64::new(-self.alpha1(), -phase).exp()
    }
}
