//! Crate-wide error vocabulary.
//!
//! Machine-readable rejection codes for invalid class data live here as well,
//! so callers (and wire formats) can match on the reason without string
//! scraping.

use thiserror::Error;

/// Machine-readable reasons a raw class description is rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionCode {
    MalformedShape,
    ZeroEigenvalue,
    DuplicateEigenvalue,
    MultiplicityOutOfRange,
    RankExceedsDimension,
    AmbientDimensionTooSmall,
    AssumptionViolation,
}

impl std::fmt::Display for RejectionCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RejectionCode::MalformedShape => "malformed_shape",
            RejectionCode::ZeroEigenvalue => "zero_eigenvalue",
            RejectionCode::DuplicateEigenvalue => "duplicate_eigenvalue",
            RejectionCode::MultiplicityOutOfRange => "multiplicity_out_of_range",
            RejectionCode::RankExceedsDimension => "rank_exceeds_dimension",
            RejectionCode::AmbientDimensionTooSmall => "ambient_dimension_too_small",
            RejectionCode::AssumptionViolation => "assumption_violation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid class spec [{code}]: {detail}")]
    InvalidSpec { code: RejectionCode, detail: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not self-adjoint (max deviation {deviation:.3e})")]
    NotSelfAdjoint { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("columns are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("operator is not a member of the apartment: column {column}: {detail}")]
    NotInApartment { column: usize, detail: String },

    #[error("eigenvalue {value:.6e} matches no slot eigenvalue within {tol:.3e}")]
    EigenvalueMismatch { value: f64, tol: f64 },

    #[error("block sizes do not match multiplicities: slot {slot} has {got}, expected {expected}")]
    BlockSizeMismatch {
        slot: usize,
        got: usize,
        expected: usize,
    },

    #[error("apartment size {size} exceeds enumeration cap {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("empty subsets have no fusion structure")]
    EmptySubset,

    #[error("operators do not share a class spec: {0}")]
    SpecMismatch(String),

    #[error("operation requires two distinct operators")]
    IdenticalOperators,

    #[error("index pair must consist of two distinct indices")]
    IdenticalIndices,

    #[error("permutation does not preserve slot multiplicities")]
    NotASymmetry,

    #[error("class not supported by this operation: {0}")]
    UnsupportedSpec(String),

    #[error("support intersection has size {got}, expected {expected}")]
    SupportIntersection { expected: usize, got: usize },

    #[error("map is not a bijection of the apartment: {0}")]
    NotApartmentPreserving(String),

    #[error("map violates its hypotheses: {detail}")]
    MapHypothesisViolation {
        detail: String,
        witness: Option<(usize, usize)>,
    },

    #[error("map is not of canonical form: {detail}")]
    OutOfForm {
        operator_index: Option<usize>,
        detail: String,
    },

    #[error("induced support map is ill-defined: inputs {a} and {b} share a support but their images do not")]
    IllDefinedSupportMap { a: usize, b: usize },

    #[error("biorthogonal closure mismatch: {0}")]
    BiorthogonalMismatch(String),

    #[error("incomplete domain: {0}")]
    IncompleteDomain(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("numerical procedure failed: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
