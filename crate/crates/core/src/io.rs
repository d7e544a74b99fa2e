//! Problem files and deterministic JSON reports.
//!
//! Problem files are JSON with a schema version, the scalar parameters, the
//! four piecewise-constant coefficients and a list of right-hand-side modes
//! `k >= 0`; the modes `-k` are completed by conjugation. Reports are written
//! with sorted keys and every float in `{:.16e}` form, so equal inputs give
//! byte-identical output and all values round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::coefficients::{PiecewiseCoefficient, ProblemConfig};
use crate::error::{Error, Result};
use crate::field::{FourierField, ModePair};
use crate::mode_function::{ModeFunction, DEFAULT_DEGREE};
use crate::mode_solver::DEFAULT_SINGULAR_TOLERANCE;
use crate::spectral::{SolverOptions, DEFAULT_K_MAX};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "hypfred";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) fn serialize_complex<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn c64(z: [f64; 2]) -> Complex64 {
    Complex64::new(z[0], z[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub c: CoefficientSpec,
    pub d: CoefficientSpec,
}

/// Unvalidated coefficient data; checked when the problem is resolved so
/// that violations surface as named invariants rather than parse errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl From<&PiecewiseCoefficient> for CoefficientSpec {
    fn from(c: &PiecewiseCoefficient) -> Self {
        Self {
            breakpoints: c.breakpoints().to_vec(),
            values: c.values().to_vec(),
        }
    }
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<PiecewiseCoefficient> {
        PiecewiseCoefficient::new(self.breakpoints.clone(), self.values.clone())
    }
}

/// One component of a right-hand-side mode on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhsSpec {
    Zero,
    Const {
        value: [f64; 2],
    },
    /// `sum_j coeffs[j] x^j`
    Poly {
        coeffs: Vec<[f64; 2]>,
    },
    /// `scale * sin(p pi x) * cos(q pi x)`, absent factors omitted.
    Trig {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sin: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cos: Option<f64>,
        scale: [f64; 2],
    },
    /// Values at the Chebyshev-Lobatto nodes (ascending) of each segment of
    /// the merged coefficient grid.
    Samples {
        segments: Vec<Vec<[f64; 2]>>,
    },
}

impl RhsSpec {
    pub fn samples_of(f: &ModeFunction) -> Self {
        RhsSpec::Samples {
            segments: f
                .segments()
                .iter()
                .map(|s| s.values.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    fn eval(&self, x: f64) -> Complex64 {
        use std::f64::consts::PI;
        match self {
            RhsSpec::Zero | RhsSpec::Samples { .. } => Complex64::new(0.0, 0.0),
            RhsSpec::Const { value } => c64(*value),
            RhsSpec::Poly { coeffs } => coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c64(*c)),
            RhsSpec::Trig { sin, cos, scale } => {
                let s = sin.map_or(1.0, |p| (p * PI * x).sin());
                let c = cos.map_or(1.0, |q| (q * PI * x).cos());
                c64(*scale) * (s * c)
            }
        }
    }

    fn degree_hint(&self) -> usize {
        match self {
            RhsSpec::Poly { coeffs } => coeffs.len(),
            RhsSpec::Trig { sin, cos, .. } => {
                let freq = sin.unwrap_or(0.0).abs() + cos.unwrap_or(0.0).abs();
                (2.0 * freq).ceil() as usize
            }
            _ => 0,
        }
    }

    /// Mode function on `grid` (the merged coefficient grid).
    pub fn to_mode_function(&self, grid: &[f64], degree: usize) -> Result<ModeFunction> {
        match self {
            RhsSpec::Samples { segments } => ModeFunction::from_samples(
                grid,
                segments
                    .iter()
                    .map(|seg| seg.iter().copied().map(c64).collect())
                    .collect(),
            ),
            RhsSpec::Zero => Ok(ModeFunction::zeros(grid, degree)),
            _ => Ok(ModeFunction::sample(grid, degree.max(self.degree_hint() + 8), |x| self.eval(x))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsEntry {
    pub k: i64,
    pub f: RhsSpec,
    pub g: RhsSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub omega: f64,
    pub gamma: f64,
    pub r0: f64,
    pub r1: f64,
    pub coefficients: Coefficients,
    #[serde(default)]
    pub rhs: Vec<RhsEntry>,
    #[serde(default)]
    pub options: FileOptions,
}

/// Options after defaults and command-line overrides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolvedOptions {
    pub k_max: i64,
    pub tol: f64,
    pub degree: usize,
}

impl ResolvedOptions {
    pub fn solver(&self) -> SolverOptions {
        SolverOptions {
            k_max: self.k_max,
            tolerance: self.tol,
        }
    }
}

impl FileOptions {
    pub fn resolve(&self, k_max: Option<i64>, tol: Option<f64>) -> Result<ResolvedOptions> {
        let opts = ResolvedOptions {
            k_max: k_max.or(self.k_max).unwrap_or(DEFAULT_K_MAX),
            tol: tol.or(self.tol).unwrap_or(DEFAULT_SINGULAR_TOLERANCE),
            degree: self.degree.unwrap_or(DEFAULT_DEGREE),
        };
        if opts.k_max < 1 {
            return Err(Error::invariant("k_max_positive", format!("k_max = {}", opts.k_max)));
        }
        if !(opts.tol.is_finite() && opts.tol > 0.0) {
            return Err(Error::invariant("tolerance_positive", format!("tol = {}", opts.tol)));
        }
        if opts.degree < crate::chebyshev::MIN_DEGREE {
            return Err(Error::invariant("degree_at_least_three", format!("degree = {}", opts.degree)));
        }
        Ok(opts)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub config: ProblemConfig,
    pub rhs: FourierField,
    pub file: ProblemFile,
}

impl ProblemFile {
    pub fn new(config: &ProblemConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            omega: config.omega(),
            gamma: config.gamma(),
            r0: config.r0(),
            r1: config.r1(),
            coefficients: Coefficients {
                a: config.a().into(),
                b: config.b().into(),
                c: config.c().into(),
                d: config.d().into(),
            },
            rhs: Vec::new(),
            options: FileOptions::default(),
        }
    }

    /// Stores the modes `k >= 0` of `rhs` as raw samples on the config grid.
    pub fn with_rhs_samples(mut self, config: &ProblemConfig, rhs: &FourierField) -> Self {
        self.rhs = rhs
            .iter()
            .filter(|(k, _)| *k >= 0)
            .map(|(k, p)| {
                let p = p.on_grid(config.grid());
                RhsEntry {
                    k,
                    f: RhsSpec::samples_of(&p.u),
                    g: RhsSpec::samples_of(&p.v),
                }
            })
            .collect();
        self
    }

    pub fn config(&self) -> Result<ProblemConfig> {
        let c = &self.coefficients;
        ProblemConfig::new(
            self.omega,
            self.gamma,
            self.r0,
            self.r1,
            c.a.build()?,
            c.b.build()?,
            c.c.build()?,
            c.d.build()?,
        )
    }

    pub fn rhs_field(&self, config: &ProblemConfig) -> Result<FourierField> {
        let degree = self.options.resolve(None, None)?.degree;
        let mut seen = std::collections::BTreeSet::new();
        let mut modes = Vec::with_capacity(self.rhs.len());
        for entry in &self.rhs {
            if entry.k < 0 {
                return Err(Error::invariant("rhs_modes_nonnegative", format!("k = {}", entry.k)));
            }
            if !seen.insert(entry.k) {
                return Err(Error::invariant("rhs_modes_unique", format!("k = {} repeated", entry.k)));
            }
            let f = entry.f.to_mode_function(config.grid(), degree)?;
            let g = entry.g.to_mode_function(config.grid(), degree)?;
            modes.push((entry.k, ModePair::new(f, g)));
        }
        FourierField::from_nonnegative(config.gamma(), modes)
    }

    pub fn resolve(self) -> Result<Problem> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let config = self.config()?;
        let rhs = self.rhs_field(&config)?;
        Ok(Problem {
            config,
            rhs,
            file: self,
        })
    }
}

pub fn parse_problem(text: &str, path: &Path) -> Result<Problem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|source| Error::Parse {
        path: path.display().to_string(),
        source,
    })?;
    file.resolve()
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    let text = fs::read_to_string(path)?;
    parse_problem(&text, path)
}

pub fn save_problem(path: &Path, file: &ProblemFile) -> Result<()> {
    write_json(path, file)
}

/// `serde_json` formatter that prints every float with 17 significant digits
/// and non-finite values as `null`.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Canonical JSON text: keys sorted, fixed float format, trailing newline.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let tree: Value = serde_json::to_value(value).map_err(|e| Error::invariant("serializable", e.to_string()))?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats);
    tree.serialize(&mut ser)
        .map_err(|e| Error::invariant("serializable", e.to_string()))?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_canonical_json(value)?)?;
    Ok(())
}

#[derive(Serialize)]
struct ModeFunctionJson {
    breakpoints: Vec<f64>,
    segments: Vec<Vec<[f64; 2]>>,
}

impl From<&ModeFunction> for ModeFunctionJson {
    fn from(f: &ModeFunction) -> Self {
        Self {
            breakpoints: f.breakpoints(),
            segments: f
                .segments()
                .iter()
                .map(|s| s.values.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

/// Report form of a field: per mode, the Chebyshev-Lobatto samples of each
/// component as `[re, im]` pairs.
pub fn field_to_json(field: &FourierField) -> Value {
    let modes: Vec<Value> = field
        .iter()
        .map(|(k, p)| {
            serde_json::json!({
                "k": k,
                "u": ModeFunctionJson::from(&p.u),
                "v": ModeFunctionJson::from(&p.v),
            })
        })
        .collect();
    serde_json::json!({ "gamma": field.gamma(), "modes": modes })
}

pub fn pair_to_json(pair: &ModePair) -> Value {
    serde_json::json!({
        "u": ModeFunctionJson::from(&pair.u),
        "v": ModeFunctionJson::from(&pair.v),
    })
}
