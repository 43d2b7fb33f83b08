//! Exact arithmetic for integral binary n-ic forms (n odd) and the structures
//! attached to them.
//!
//! The crate is organized around one chain of constructions:
//!
//! * [`forms`] — binary n-ic forms over Z: invariants, the SL2(Z) action,
//!   factorization, signatures, and enumeration over congruence families.
//! * [`rings`] — the rank-n ring R_f attached to a form, its distinguished
//!   ideals, based fractional ideals with exact Hermite-normal-form bases,
//!   and element arithmetic in K_f = Q[x]/(f(x,1)).
//! * [`pairs`] — pairs (A, B) of integral symmetric n x n matrices with
//!   resolvent det(Ax - By), the section recipe, and the exact two-way
//!   correspondence with ideal classes (I, delta) carrying 2-torsion data.
//! * [`modp`] — finite-field ground truth: exhaustive orbit/stabilizer
//!   censuses of the fibers over F_p, predicted counts from unit groups, and
//!   p-adic local masses.
//! * [`julia`] — the Julia invariant theta(f) and J(f) = sqrt(theta(f)) via
//!   certified root finding and Newton iteration on weighted root data, plus
//!   reduction of forms through the positive definite covariant quadratic.
//! * [`classgroup`] — desk-scale class groups, unit groups, narrow class
//!   data, and 2-torsion ideal censuses for the orders arising from forms.
//! * [`weights`] and [`campaign`] — the cusp weight combinatorics checker
//!   and the enumeration/statistics campaign engine behind the CLI.
//!
//! Everything outside [`julia`] is exact integer/rational arithmetic; the
//! numerical layer runs on arbitrary-precision binary floats at a caller-fixed
//! mantissa size, so results are reproducible bit-for-bit at a fixed
//! precision.

pub mod forms;
pub mod fp;
pub mod julia;
pub mod linalg;
pub mod modp;
pub mod pairs;
pub mod poly;
pub mod rings;

use thiserror::Error;

/// Crate-wide error type. Variant names follow the operation contracts.
#[derive(Debug, Error)]
pub enum BinicError {
    /// Every coefficient of the form vanishes.
    #[error("zero form")]
    ZeroForm,
    /// The form has discriminant zero where a nondegenerate form is required.
    #[error("degenerate form (discriminant zero)")]
    DegenerateForm,
    /// An input failed the preconditions of the ideal correspondence
    /// (degenerate, imprimitive, or reducible resolvent, or no usable leading
    /// coefficient).
    #[error("degenerate input for the correspondence: {0}")]
    DegenerateInput(String),
    /// Index outside the valid range for the operation.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    /// Element is not invertible in K_f.
    #[error("element is not invertible")]
    NonInvertible,
    /// The form vanishes identically modulo p.
    #[error("form vanishes mod {0}")]
    FormVanishesModP(u64),
    /// A factorization type with repeated factors where a separable one is
    /// required.
    #[error("inseparable factorization type")]
    InseparableType,
    /// The requested enumeration exceeds the configured feasibility guard.
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    /// Truncation level too low: the computed quantity has not stabilized.
    #[error("precision too low: {0}")]
    PrecisionTooLow(String),
    /// Root finding could not certify the roots at any allowed precision.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    /// Iterative minimization failed to reach the residual target.
    #[error("no convergence: residual {0}")]
    NonConvergence(f64),
    /// A basis with negative orientation where positive is required.
    #[error("basis orientation error")]
    OrientationError,
    /// Extracted matrix entries were not integral, signalling a violated
    /// precondition.
    #[error("non-integral output: {0}")]
    NonIntegralOutput(String),
    /// Two ideal classes over different forms were combined.
    #[error("incompatible forms")]
    IncompatibleForms,
    /// A bounded search ended before certification.
    #[error("effort bound exceeded: {0}")]
    EffortExceeded(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, BinicError>;
