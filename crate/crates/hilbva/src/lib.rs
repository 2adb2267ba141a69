//! Exact symbolic computation for ℏ-adic free-field vertex superalgebras.
//!
//! The crate is organised around a Wick-formula OPE engine acting on localized
//! "jet symbols" (supercommutative rational functions in mode variables):
//!
//! - [`scalar`]: arbitrary-precision rationals and ℏ-polynomials with
//!   half-integer exponents, the coefficient ring of every state.
//! - [`qseries`]: truncated exact q-series with fractional exponents
//!   (denominator 24), eta/theta/Eisenstein series.
//! - [`system`]: free-field systems — generator tables, contraction tables and
//!   declared localizers.
//! - [`symbol`]: the supercommutative symbol algebra with superderivatives,
//!   the translation operator and the (twt, wt, charge, parity) gradings.
//! - [`ope`]: n-th products, normally ordered inverses and the
//!   Borcherds/skew-symmetry axiom checkers.
//! - [`brst`]: the BRST complex for the gl_N reduction — chiral comoment map,
//!   ghost currents, the charge Q, the differential d = ℏ⁻¹Q₍₀₎ and its
//!   bigraded split.
//! - [`n4`]: the named global sections (trace powers, small N=4 superconformal
//!   generators, conformal vectors) and the OPE verification suites.
//! - [`charts`]: localized chart sections, the rank-(N−1) βγbc free-field
//!   realisation and the N=2 transition identities.
//! - [`characters`]: supercharacters three ways (closed formula, Haar constant
//!   term, free-field weight count) plus exact quasimodular fitting.
//! - [`expr`], [`report`], [`config`]: the CLI expression mini-language,
//!   machine-readable run reports and key=value configuration.

pub mod brst;
pub mod characters;
pub mod charts;
pub mod config;
pub mod expr;
pub mod linalg;
pub mod n4;
pub mod ope;
pub mod qseries;
pub mod report;
pub mod scalar;
pub mod symbol;
pub mod system;

/// Errors shared across the engine and front end.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("mismatched truncation orders: {0} vs {1}")]
    MismatchedTruncation(String, String),
    #[error("series has zero leading term; not invertible")]
    ZeroLeadingTerm,
    #[error("half-integer hbar power evaluated at non-square rational {0}")]
    IrrationalEvaluation(String),
    #[error("operands belong to different free-field systems")]
    SystemMismatch,
    #[error("divergent Wick sum: {0}")]
    DivergentWickSum(String),
    #[error("symbol is not invertible in the localized algebra: {0}")]
    NonInvertibleSymbol(String),
    #[error("element is not homogeneous: {0} vs {1}")]
    Inhomogeneous(String, String),
    #[error("generator index out of range for N={0}")]
    IndexOutOfRange(usize),
    #[error("unknown named section `{0}`")]
    UnknownSection(String),
    #[error("operation unsupported for N={0}: {1}")]
    UnsupportedN(usize, String),
    #[error("unsupported chart: {0}")]
    UnsupportedChart(String),
    #[error("no coboundary witness found: {0}")]
    WitnessNotFound(String),
    #[error("requested order too large for configured cap: {0}")]
    OrderTooLargeForCap(String),
    #[error("no exact fit in the given basis: {0}")]
    NoFit(String),
    #[error("basis is underdetermined: {0}")]
    UnderdeterminedBasis(String),
    #[error("parse error at offset {offset}: {message}")]
    ParseError { offset: usize, message: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("usage error: {0}")]
    UsageError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
