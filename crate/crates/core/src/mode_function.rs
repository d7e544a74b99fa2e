//! Complex functions of `x` on `[0, 1]`, stored as per-segment Chebyshev samples.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::chebyshev;
use crate::coefficients::segment_index;
use crate::error::{Error, Result};

/// Default collocation degree per segment.
pub const DEFAULT_DEGREE: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub x0: f64,
    pub x1: f64,
    /// Samples at the ascending Chebyshev–Gauss–Lobatto nodes of `[x0, x1]`.
    pub values: Vec<Complex64>,
}

impl Segment {
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn half(&self) -> f64 {
        0.5 * (self.x1 - self.x0)
    }

    pub fn nodes(&self) -> Vec<f64> {
        chebyshev::nodes(self.degree(), self.x0, self.x1)
    }

    fn at_degree(&self, n: usize) -> Vec<Complex64> {
        chebyshev::resample(&self.values, n)
    }
}

/// A mode function: piecewise polynomial, one Chebyshev interpolant per segment.
///
/// Values are single-valued inside segments; one-sided limits at a breakpoint
/// may differ.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeFunction {
    segments: Vec<Segment>,
}

impl ModeFunction {
    pub fn sample(breakpoints: &[f64], degree: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let degrees = vec![degree; breakpoints.len() - 1];
        Self::sample_with_degrees(breakpoints, &degrees, f)
    }

    /// Samples `f` with a separate degree on each segment.
    pub fn sample_with_degrees(
        breakpoints: &[f64],
        degrees: &[usize],
        f: impl Fn(f64) -> Complex64,
    ) -> Self {
        assert_eq!(degrees.len() + 1, breakpoints.len());
        let segments = breakpoints
            .windows(2)
            .zip(degrees)
            .map(|(w, &n)| {
                let n = n.max(chebyshev::MIN_DEGREE);
                Segment {
                    x0: w[0],
                    x1: w[1],
                    values: chebyshev::nodes(n, w[0], w[1]).into_iter().map(&f).collect(),
                }
            })
            .collect();
        Self { segments }
    }

    /// Like [`ModeFunction::sample_with_degrees`], but `f` also receives the segment index.
    pub fn sample_segmentwise(
        breakpoints: &[f64],
        degrees: &[usize],
        f: impl Fn(usize, f64) -> Complex64,
    ) -> Self {
        assert_eq!(degrees.len() + 1, breakpoints.len());
        let segments = breakpoints
            .windows(2)
            .zip(degrees)
            .enumerate()
            .map(|(i, (w, &n))| {
                let n = n.max(chebyshev::MIN_DEGREE);
                Segment {
                    x0: w[0],
                    x1: w[1],
                    values: chebyshev::nodes(n, w[0], w[1])
                        .into_iter()
                        .map(|x| f(i, x))
                        .collect(),
                }
            })
            .collect();
        Self { segments }
    }

    pub fn zeros(breakpoints: &[f64], degree: usize) -> Self {
        Self::sample(breakpoints, degree, |_| Complex64::new(0.0, 0.0))
    }

    pub fn constant(breakpoints: &[f64], degree: usize, value: Complex64) -> Self {
        Self::sample(breakpoints, degree, |_| value)
    }

    /// Builds a mode function from raw per-segment samples.
    pub fn from_samples(breakpoints: &[f64], samples: Vec<Vec<Complex64>>) -> Result<Self> {
        if breakpoints.len() != samples.len() + 1 {
            return Err(Error::invariant(
                "one_sample_block_per_segment",
                format!("{} segments, {} sample blocks", breakpoints.len() - 1, samples.len()),
            ));
        }
        let mut segments = Vec::with_capacity(samples.len());
        for (w, values) in breakpoints.windows(2).zip(samples) {
            if values.len() < chebyshev::MIN_DEGREE + 1 {
                return Err(Error::invariant(
                    "at_least_four_samples_per_segment",
                    format!("segment [{}, {}] has {} samples", w[0], w[1], values.len()),
                ));
            }
            if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::invariant(
                    "breakpoints_strictly_increasing",
                    format!("{} followed by {}", w[0], w[1]),
                ));
            }
            segments.push(Segment {
                x0: w[0],
                x1: w[1],
                values,
            });
        }
        Ok(Self { segments })
    }

    pub(crate) fn from_segments(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.x0).collect();
        b.push(self.segments[self.segments.len() - 1].x1);
        b
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.segments.iter().map(Segment::degree).collect()
    }

    fn same_layout(&self, other: &Self) -> bool {
        self.segments.len() == other.segments.len()
            && self
                .segments
                .iter()
                .zip(&other.segments)
                .all(|(a, b)| a.x0 == b.x0 && a.x1 == b.x1)
    }

    /// Value inside the segment containing `x`; at an interior breakpoint the
    /// right limit, at `x = 1` the left limit.
    pub fn eval(&self, x: f64) -> Complex64 {
        let b = self.breakpoints();
        let s = &self.segments[segment_index(&b, x)];
        chebyshev::evaluate(&s.values, s.x0, s.x1, x)
    }

    /// Left limit at `x` (the value at `x = 0`).
    pub fn eval_left(&self, x: f64) -> Complex64 {
        let s = self
            .segments
            .iter()
            .find(|s| x > s.x0 && x <= s.x1)
            .unwrap_or(&self.segments[0]);
        chebyshev::evaluate(&s.values, s.x0, s.x1, x)
    }

    /// Right limit at `x` (the value at `x = 1`).
    pub fn eval_right(&self, x: f64) -> Complex64 {
        self.eval(x)
    }

    pub fn first_value(&self) -> Complex64 {
        self.segments[0].values[0]
    }

    pub fn last_value(&self) -> Complex64 {
        *self.segments[self.segments.len() - 1]
            .values
            .last()
            .expect("segments are never empty")
    }

    pub fn map_values(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    x0: s.x0,
                    x1: s.x1,
                    values: s.values.iter().map(|&v| f(v)).collect(),
                })
                .collect(),
        }
    }

    /// Pointwise map with access to the segment index and node position.
    pub fn map_with_position(&self, f: impl Fn(usize, f64, Complex64) -> Complex64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .enumerate()
                .map(|(i, s)| Segment {
                    x0: s.x0,
                    x1: s.x1,
                    values: s
                        .nodes()
                        .into_iter()
                        .zip(&s.values)
                        .map(|(x, &v)| f(i, x, v))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Multiplies segment `i` by `factors[i]`.
    pub fn scale_segments(&self, factors: &[Complex64]) -> Self {
        assert_eq!(factors.len(), self.segments.len());
        self.map_with_position(|i, _, v| v * factors[i])
    }

    pub fn conj(&self) -> Self {
        self.map_values(|v| v.conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map_values(|v| v * factor)
    }

    pub fn with_degrees(&self, degrees: &[usize]) -> Self {
        assert_eq!(degrees.len(), self.segments.len());
        Self {
            segments: self
                .segments
                .iter()
                .zip(degrees)
                .map(|(s, &n)| Segment {
                    x0: s.x0,
                    x1: s.x1,
                    values: s.at_degree(n.max(chebyshev::MIN_DEGREE)),
                })
                .collect(),
        }
    }

    /// Re-expresses the function on a finer breakpoint set.
    ///
    /// Each new segment inherits the degree of the old segment containing it,
    /// which is exact when `breakpoints` refines the current layout.
    pub fn on_grid(&self, breakpoints: &[f64]) -> Self {
        let current = self.breakpoints();
        if current == breakpoints {
            return self.clone();
        }
        let segments = breakpoints
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let src = &self.segments[segment_index(&current, mid)];
                let values = chebyshev::nodes(src.degree(), w[0], w[1])
                    .into_iter()
                    .map(|x| chebyshev::evaluate(&src.values, src.x0, src.x1, x))
                    .collect();
                Segment {
                    x0: w[0],
                    x1: w[1],
                    values,
                }
            })
            .collect();
        Self { segments }
    }

    pub fn derivative(&self) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    x0: s.x0,
                    x1: s.x1,
                    values: chebyshev::derivative(&s.values, s.half()),
                })
                .collect(),
        }
    }

    /// `x -> int_0^x f`, continuous across breakpoints.
    pub fn cumulative_integral(&self) -> Self {
        let mut offset = Complex64::new(0.0, 0.0);
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let mut values = chebyshev::cumulative_integral(&s.values, s.half());
                for v in &mut values {
                    *v += offset;
                }
                offset = *values.last().expect("nonempty");
                Segment {
                    x0: s.x0,
                    x1: s.x1,
                    values,
                }
            })
            .collect();
        Self { segments }
    }

    pub fn integral(&self) -> Complex64 {
        self.segments
            .iter()
            .map(|s| chebyshev::integral(&s.values, s.half()))
            .sum()
    }

    /// `int_0^1 self * conj(other)`, exact for the piecewise polynomials.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert!(self.same_layout(other), "mode functions on different grids");
        self.segments
            .iter()
            .zip(&other.segments)
            .map(|(a, b)| {
                let n = a.degree() + b.degree();
                let pa = a.at_degree(n);
                let pb = b.at_degree(n);
                let prod: Vec<Complex64> = pa.iter().zip(&pb).map(|(x, y)| x * y.conj()).collect();
                chebyshev::integral(&prod, a.half())
            })
            .sum()
    }

    /// `int_0^1 |f|^2`.
    pub fn norm_sq(&self) -> f64 {
        self.inner(self).re.max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| s.values.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.segments
            .iter()
            .all(|s| s.values.iter().all(|v| v.re == 0.0 && v.im == 0.0))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert!(self.same_layout(other), "mode functions on different grids");
        Self {
            segments: self
                .segments
                .iter()
                .zip(&other.segments)
                .map(|(a, b)| {
                    let n = a.degree().max(b.degree());
                    let pa = a.at_degree(n);
                    let pb = b.at_degree(n);
                    Segment {
                        x0: a.x0,
                        x1: a.x1,
                        values: pa.iter().zip(&pb).map(|(&x, &y)| f(x, y)).collect(),
                    }
                })
                .collect(),
        }
    }

    /// Pointwise product (degrees add, so the product is represented exactly).
    pub fn product(&self, other: &Self) -> Self {
        assert!(self.same_layout(other), "mode functions on different grids");
        Self {
            segments: self
                .segments
                .iter()
                .zip(&other.segments)
                .map(|(a, b)| {
                    let n = a.degree() + b.degree();
                    let pa = a.at_degree(n);
                    let pb = b.at_degree(n);
                    Segment {
                        x0: a.x0,
                        x1: a.x1,
                        values: pa.iter().zip(&pb).map(|(x, y)| x * y).collect(),
                    }
                })
                .collect(),
        }
    }
}

impl Add for &ModeFunction {
    type Output = ModeFunction;
    fn add(self, rhs: &ModeFunction) -> ModeFunction {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ModeFunction {
    type Output = ModeFunction;
    fn sub(self, rhs: &ModeFunction) -> ModeFunction {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &ModeFunction {
    type Output = ModeFunction;
    fn neg(self) -> ModeFunction {
        self.map_values(|v| -v)
    }
}

impl Mul<Complex64> for &ModeFunction {
    type Output = ModeFunction;
    fn mul(self, rhs: Complex64) -> ModeFunction {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn norm_of_monomial() {
        let f = ModeFunction::sample(&[0.0, 0.4, 1.0], 8, c);
        assert!((f.norm_sq() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn one_sided_limits_at_breakpoints() {
        let f = ModeFunction::sample_segmentwise(&[0.0, 0.5, 1.0], &[4, 4], |i, _| c(i as f64));
        assert_eq!(f.eval_left(0.5), c(0.0));
        assert_eq!(f.eval_right(0.5), c(1.0));
        assert_eq!(f.eval(1.0), c(1.0));
        assert_eq!(f.eval_left(0.0), c(0.0));
    }

    #[test]
    fn cumulative_integral_is_continuous() {
        let f = ModeFunction::sample(&[0.0, 0.3, 0.7, 1.0], 10, |x| c(2.0 * x));
        let fi = f.cumulative_integral();
        for x in [0.1, 0.3, 0.5, 0.9, 1.0] {
            assert!((fi.eval(x).re - x * x).abs() < 1e-14);
        }
        assert!((f.integral().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn refine_preserves_values() {
        let f = ModeFunction::sample(&[0.0, 1.0], 12, |x| c(x.powi(5)));
        let g = f.on_grid(&[0.0, 0.2, 0.9, 1.0]);
        assert_eq!(g.breakpoints(), vec![0.0, 0.2, 0.9, 1.0]);
        for x in [0.05, 0.2, 0.5, 0.95] {
            assert!((g.eval(x).re - x.powi(5)).abs() < 1e-14);
        }
    }

    #[test]
    fn sample_layout_errors() {
        assert!(ModeFunction::from_samples(&[0.0, 1.0], vec![vec![c(0.0); 3]]).is_err());
        assert!(ModeFunction::from_samples(&[0.0, 0.5, 1.0], vec![vec![c(0.0); 5]]).is_err());
        assert!(ModeFunction::from_samples(&[0.0, 1.0], vec![vec![c(0.0); 5]]).is_ok());
    }

    #[test]
    fn mixed_degree_arithmetic() {
        let f = ModeFunction::sample(&[0.0, 1.0], 4, c);
        let g = ModeFunction::sample(&[0.0, 1.0], 9, |x| c(x * x));
        let h = &f + &g;
        assert_eq!(h.degrees(), vec![9]);
        assert!((h.eval(0.5).re - 0.75).abs() < 1e-14);
        let p = f.product(&g);
        assert!((p.eval(0.5).re - 0.125).abs() < 1e-14);
    }
}
