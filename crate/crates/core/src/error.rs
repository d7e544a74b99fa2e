use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A named structural invariant of an input value does not hold.
    #[error("invariant `{invariant}` violated: {detail}")]
    Invariant {
        invariant: &'static str,
        detail: String,
    },

    #[error("x = {x} lies outside [0, 1]")]
    Domain { x: f64 },

    #[error("|r0 r1| = {lhs} is too close to exp(int_0^1 (a + d)) = {rhs}")]
    ConditionViolated { lhs: f64, rhs: f64 },

    #[error("mode {k}: {detail}")]
    InternalConsistency { k: i64, detail: String },

    /// The homogeneous mode problem has a nontrivial solution.
    #[error("mode {k} is singular: |L_k| = {} at tolerance {tolerance:e}", boundary_determinant.norm())]
    SingularMode {
        k: i64,
        boundary_determinant: Complex64,
        tolerance: f64,
        compatibility_defect: Complex64,
    },

    #[error("field is not conjugate symmetric at mode {k}")]
    NotConjugateSymmetric { k: i64 },

    #[error("inner product has imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },

    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("unsupported schema version {found} (expected {expected})")]
    Schema { found: u32, expected: u32 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invariant { .. } => "invariant_violation",
            Error::Domain { .. } => "domain",
            Error::ConditionViolated { .. } => "condition_violated",
            Error::InternalConsistency { .. } => "internal_consistency",
            Error::SingularMode { .. } => "singular_mode",
            Error::NotConjugateSymmetric { .. } => "not_conjugate_symmetric",
            Error::ImaginaryResidue { .. } => "imaginary_residue",
            Error::Parse { .. } => "parse_error",
            Error::Schema { .. } => "unsupported_schema",
            Error::Io(_) => "io_error",
            Error::Csv(_) => "io_error",
        }
    }

    pub(crate) fn invariant(invariant: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant {
            invariant,
            detail: detail.into(),
        }
    }
}
