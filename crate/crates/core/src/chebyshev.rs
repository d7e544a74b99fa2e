//! Chebyshev–Gauss–Lobatto machinery on a single interval.
//!
//! Samples are stored in ascending order of `x`. Node `j` of a degree-`n`
//! grid on `[x0, x1]` sits at `mid + half * (-cos(j * pi / n))`, so the
//! reversed sample vector is the usual `cos(m * pi / n)` ordering and the
//! DCT-I of it yields the Chebyshev coefficients in the reference variable.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Smallest admissible degree (four samples per segment).
pub const MIN_DEGREE: usize = 3;

/// Ascending Chebyshev–Gauss–Lobatto nodes of degree `n` mapped to `[x0, x1]`.
pub fn nodes(n: usize, x0: f64, x1: f64) -> Vec<f64> {
    let mid = 0.5 * (x0 + x1);
    let half = 0.5 * (x1 - x0);
    (0..=n)
        .map(|j| {
            if j == 0 {
                x0
            } else if j == n {
                x1
            } else {
                mid - half * (j as f64 * PI / n as f64).cos()
            }
        })
        .collect()
}

/// `S_k = (v_0 + (-1)^k v_n)/2 + sum_{j=1}^{n-1} v_j cos(pi j k / n)` via a
/// length-`2n` FFT of the even extension.
fn dct1(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len() - 1;
    let mut ext: Vec<Complex64> = Vec::with_capacity(2 * n);
    ext.extend_from_slice(v);
    ext.extend(v[1..n].iter().rev());
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(2 * n));
    fft.process(&mut ext);
    ext.truncate(n + 1);
    for s in &mut ext {
        *s *= 0.5;
    }
    ext
}

/// Chebyshev coefficients (reference variable on `[-1, 1]`) of ascending samples.
pub fn to_coeffs(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len() - 1;
    let rev: Vec<Complex64> = values.iter().rev().copied().collect();
    let mut c = dct1(&rev);
    let scale = 2.0 / n as f64;
    for ck in &mut c {
        *ck *= scale;
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    c
}

/// Inverse of [`to_coeffs`]: ascending samples of `sum c_k T_k`.
pub fn from_coeffs(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let mut c = coeffs.to_vec();
    c[0] *= 2.0;
    c[n] *= 2.0;
    let mut vals = dct1(&c);
    vals.reverse();
    vals
}

/// Samples of `d/dx` on a segment of half-length `half`.
pub fn derivative(values: &[Complex64], half: f64) -> Vec<Complex64> {
    let n = values.len() - 1;
    let c = to_coeffs(values);
    let mut d = vec![Complex64::new(0.0, 0.0); n + 2];
    for k in (1..=n).rev() {
        d[k - 1] = d[k + 1] + c[k] * (2.0 * k as f64);
    }
    d[0] *= 0.5;
    d.truncate(n + 1);
    let mut vals = from_coeffs(&d);
    for v in &mut vals {
        *v /= half;
    }
    vals
}

/// Samples of `x -> int_{x0}^{x} f`, exact for the degree-`n` interpolant.
pub fn cumulative_integral(values: &[Complex64], half: f64) -> Vec<Complex64> {
    let n = values.len() - 1;
    let c = to_coeffs(values);
    let at = |k: usize| if k <= n { c[k] } else { Complex64::new(0.0, 0.0) };
    // antiderivative coefficients, degree n + 1
    let mut big = vec![Complex64::new(0.0, 0.0); n + 2];
    for (k, slot) in big.iter_mut().enumerate().skip(1) {
        let lower = if k == 1 { at(0) * 2.0 } else { at(k - 1) };
        *slot = (lower - at(k + 1)) / (2.0 * k as f64);
    }
    let top = big[n + 1];
    big.truncate(n + 1);
    // T_{n+1}(cos(m pi/n)) = (-1)^m cos(m pi/n); samples below are in cos order
    let mut cos_ordered = from_coeffs(&big);
    cos_ordered.reverse();
    for (m, v) in cos_ordered.iter_mut().enumerate() {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let xi = if m == 0 {
            1.0
        } else if m == n {
            -1.0
        } else {
            (m as f64 * PI / n as f64).cos()
        };
        *v += top * (sign * xi);
    }
    let base = cos_ordered[n];
    cos_ordered
        .iter()
        .rev()
        .map(|v| (v - base) * half)
        .collect()
}

/// Clenshaw–Curtis integral over the segment.
pub fn integral(values: &[Complex64], half: f64) -> Complex64 {
    let c = to_coeffs(values);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, ck) in c.iter().enumerate().step_by(2) {
        acc += ck * (2.0 / (1.0 - (k * k) as f64));
    }
    acc * half
}

/// Re-sample the degree-`n` interpolant on a grid of degree `m`.
///
/// Exact when `m >= n`; truncates the Chebyshev series otherwise.
pub fn resample(values: &[Complex64], m: usize) -> Vec<Complex64> {
    let n = values.len() - 1;
    if m == n {
        return values.to_vec();
    }
    let mut c = to_coeffs(values);
    if m > n {
        c.resize(m + 1, Complex64::new(0.0, 0.0));
    } else {
        c.truncate(m + 1);
    }
    from_coeffs(&c)
}

/// Barycentric evaluation of the interpolant through ascending samples.
pub fn evaluate(values: &[Complex64], x0: f64, x1: f64, x: f64) -> Complex64 {
    let n = values.len() - 1;
    let mid = 0.5 * (x0 + x1);
    let half = 0.5 * (x1 - x0);
    let xi = (x - mid) / half;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (j, v) in values.iter().enumerate() {
        let node = -(j as f64 * PI / n as f64).cos();
        let node = if j == 0 {
            -1.0
        } else if j == n {
            1.0
        } else {
            node
        };
        let diff = xi - node;
        if diff == 0.0 {
            return *v;
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            w *= 0.5;
        }
        let t = w / diff;
        num += v * t;
        den += t;
    }
    num / den
}
