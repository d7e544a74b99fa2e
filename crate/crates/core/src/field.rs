//! Time-periodic fields represented by finitely many Fourier modes
//! `u(x, t) = sum_k u_k(x) exp(i k omega t)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::coefficients::ProblemConfig;
use crate::error::{Error, Result};
use crate::mode_function::ModeFunction;

/// Imaginary part tolerated (relative) in inner products of real fields.
pub const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-12;

/// The two components `(u_k, v_k)` of one Fourier mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModePair {
    pub u: ModeFunction,
    pub v: ModeFunction,
}

impl ModePair {
    pub fn new(u: ModeFunction, v: ModeFunction) -> Self {
        Self { u, v }
    }

    pub fn conj(&self) -> Self {
        Self::new(self.u.conj(), self.v.conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.u.scale(factor), self.v.scale(factor))
    }

    /// `int_0^1 (|u|^2 + |v|^2)`.
    pub fn norm_sq(&self) -> f64 {
        self.u.norm_sq() + self.v.norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `int_0^1 (u conj(phi) + v conj(psi))`.
    pub fn inner(&self, other: &ModePair) -> Complex64 {
        self.u.inner(&other.u) + self.v.inner(&other.v)
    }

    pub fn on_grid(&self, breakpoints: &[f64]) -> Self {
        Self::new(self.u.on_grid(breakpoints), self.v.on_grid(breakpoints))
    }
}

/// A finite family `k -> (u_k, v_k)`; absent modes are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierField {
    modes: BTreeMap<i64, ModePair>,
    gamma: f64,
}

impl FourierField {
    pub fn new(gamma: f64) -> Self {
        Self {
            modes: BTreeMap::new(),
            gamma,
        }
    }

    pub fn from_modes(gamma: f64, modes: BTreeMap<i64, ModePair>) -> Self {
        Self { modes, gamma }
    }

    /// Builds a real field from its modes `k >= 0`; mode `-k` is set to the
    /// conjugate of mode `k`, and mode 0 is replaced by its real part.
    pub fn from_nonnegative(gamma: f64, modes: impl IntoIterator<Item = (i64, ModePair)>) -> Result<Self> {
        let mut field = Self::new(gamma);
        for (k, pair) in modes {
            if k < 0 {
                return Err(Error::invariant(
                    "nonnegative_mode_index",
                    format!("mode {k} given where k >= 0 is expected"),
                ));
            }
            if k == 0 {
                let real = |f: &ModeFunction| f.map_values(|v| Complex64::new(v.re, 0.0));
                field.modes.insert(0, ModePair::new(real(&pair.u), real(&pair.v)));
            } else {
                field.modes.insert(-k, pair.conj());
                field.modes.insert(k, pair);
            }
        }
        Ok(field)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn insert(&mut self, k: i64, pair: ModePair) {
        self.modes.insert(k, pair);
    }

    pub fn get(&self, k: i64) -> Option<&ModePair> {
        self.modes.get(&k)
    }

    pub fn modes(&self) -> &BTreeMap<i64, ModePair> {
        &self.modes
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &ModePair)> {
        self.modes.iter().map(|(&k, p)| (k, p))
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn support(&self) -> Vec<i64> {
        self.modes.keys().copied().collect()
    }

    /// Exact check of `mode(-k) == conj(mode(k))`; returns the first offending `k`.
    pub fn conjugate_symmetry_violation(&self) -> Option<i64> {
        for (&k, pair) in &self.modes {
            match self.modes.get(&-k) {
                Some(mirror) if *mirror == pair.conj() => {}
                None if pair.u.is_zero() && pair.v.is_zero() => {}
                _ => return Some(k),
            }
        }
        None
    }

    pub fn is_conjugate_symmetric(&self) -> bool {
        self.conjugate_symmetry_violation().is_none()
    }

    pub fn map_modes(&self, f: impl Fn(i64, &ModePair) -> ModePair) -> Self {
        Self {
            modes: self.modes.iter().map(|(&k, p)| (k, f(k, p))).collect(),
            gamma: self.gamma,
        }
    }

    /// `(u, v) -> (u - other.u, v - other.v)` on the union of supports.
    pub fn difference(&self, other: &Self) -> Self {
        let mut modes = self.modes.clone();
        for (&k, p) in &other.modes {
            let entry = match modes.remove(&k) {
                Some(mine) => ModePair::new(&mine.u - &p.u, &mine.v - &p.v),
                None => ModePair::new(-&p.u, -&p.v),
            };
            modes.insert(k, entry);
        }
        Self {
            modes,
            gamma: self.gamma,
        }
    }

    /// `sqrt(||u||^2 + ||v||^2)` in `H^{0, gamma} x H^{0, gamma}`.
    pub fn w_norm(&self, omega: f64) -> f64 {
        let u = h0gamma_norm(self.iter().map(|(k, p)| (k, &p.u)), self.gamma, omega);
        let v = h0gamma_norm(self.iter().map(|(k, p)| (k, &p.v)), self.gamma, omega);
        (u * u + v * v).sqrt()
    }

    /// Mode-wise image under `(d_t + d_x, d_t - d_x)`:
    /// `(i k omega u_k + u_k', i k omega v_k - v_k')`.
    pub fn transport_image(&self, omega: f64) -> Self {
        self.map_modes(|k, p| {
            let ikw = Complex64::new(0.0, k as f64 * omega);
            let du = p.u.derivative();
            let dv = p.v.derivative();
            ModePair::new(&p.u.scale(ikw) + &du, &p.v.scale(ikw) - &dv)
        })
    }

    /// Graph norm of the solution space. `applied`, when given, replaces the
    /// spectral differentiation with a precomputed transport image.
    pub fn v_norm(&self, config: &ProblemConfig, applied: Option<&FourierField>) -> f64 {
        let omega = config.omega();
        let base = self.w_norm(omega);
        let transport = match applied {
            Some(img) => img.clone().with_gamma(self.gamma).w_norm(omega),
            None => self.transport_image(omega).w_norm(omega),
        };
        (base * base + transport * transport).sqrt()
    }

    /// `sum_k int_0^1 (u_k conj(phi_k) + v_k conj(psi_k)) dx` for real fields.
    pub fn inner_product(&self, other: &FourierField) -> Result<f64> {
        if let Some(k) = self.conjugate_symmetry_violation() {
            return Err(Error::NotConjugateSymmetric { k });
        }
        if let Some(k) = other.conjugate_symmetry_violation() {
            return Err(Error::NotConjugateSymmetric { k });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        for (k, p) in self.iter() {
            if let Some(q) = other.get(k) {
                let term = p.inner(q);
                scale += term.norm();
                acc += term;
            }
        }
        if acc.im.abs() > IMAGINARY_RESIDUE_TOLERANCE * scale.max(1.0) {
            return Err(Error::ImaginaryResidue { residue: acc.im.abs() });
        }
        Ok(acc.re)
    }

    /// One-sided boundary values per mode: right limit at 0, left limit at 1,
    /// the segment value in the interior.
    pub fn trace(&self, x: f64) -> Result<BTreeMap<i64, (Complex64, Complex64)>> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain { x });
        }
        Ok(self
            .iter()
            .map(|(k, p)| (k, (p.u.eval(x), p.v.eval(x))))
            .collect())
    }

    /// Point value `(u(x, t), v(x, t))`; the imaginary part (zero for real
    /// fields) is dropped.
    pub fn synthesize(&self, x: f64, t: f64, omega: f64) -> (f64, f64) {
        let mut u = Complex64::new(0.0, 0.0);
        let mut v = Complex64::new(0.0, 0.0);
        for (k, p) in self.iter() {
            let e = Complex64::new(0.0, k as f64 * omega * t).exp();
            u += p.u.eval(x) * e;
            v += p.v.eval(x) * e;
        }
        (u.re, v.re)
    }
}

/// `H^{0, gamma}` norm of one component: `(2 pi / omega) * sqrt(sum_k (1 + k^2)^gamma int |u_k|^2)`.
pub fn h0gamma_norm<'a>(
    component: impl IntoIterator<Item = (i64, &'a ModeFunction)>,
    gamma: f64,
    omega: f64,
) -> f64 {
    let period = 2.0 * PI / omega;
    let sum: f64 = component
        .into_iter()
        .map(|(k, f)| (1.0 + (k * k) as f64).powf(gamma) * f.norm_sq())
        .sum();
    period * sum.sqrt()
}
