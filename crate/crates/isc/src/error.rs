use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the certification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("even modulus: the Legendre symbol requires an odd prime modulus")]
    EvenModulus,

    #[error("not invertible: {residue} has no inverse mod {modulus}")]
    NotInvertible { residue: u64, modulus: u64 },

    #[error("mismatched moduli: {0} vs {1}")]
    MixedModuli(u64, u64),

    #[error("bad reduction prime: {prime} divides the denominator of {value}")]
    BadReductionPrime { prime: u64, value: String },

    #[error("skipped prime: {prime} is unreliable for the model with j = {j}")]
    SkippedPrime { prime: u64, j: String },

    #[error("singular reduction: 4a^3 + 27b^2 = 0 over F_{0}")]
    SingularReduction(u64),

    #[error("oracle bound exceeded: naive point count refused for l = {0} > 10^4")]
    OracleBoundExceeded(u64),

    #[error("use naive count: the Legendre-sum count requires an odd prime")]
    LegendreCountEvenPrime,

    #[error("ambiguous order: group order over F_{0} not pinned down within the retry budget")]
    AmbiguousOrder(u64),

    #[error("no genus-zero j-map for r = {0}; only r in {{2, 3, 5, 7, 13}} is rational")]
    NoGenusZeroJMap(u64),

    #[error("cusp: t = 0 (and t = infinity) are cusps, the j-map is undefined there")]
    Cusp,

    #[error("p too small for witness criteria: p = {0}, need p >= 5")]
    WitnessPrimeTooSmall(u64),

    #[error("degenerate determinant: d = 0 mod p cannot arise from a good prime")]
    DegenerateDeterminant,

    #[error("subgroup oracle only supports p in {{5, 7}}, got {0}")]
    OracleRange(u64),

    #[error("singular matrix mod {0} is not an element of GL2")]
    SingularMatrix(u64),

    #[error("criterion requires p >= 5, got {0}")]
    CriterionPrimeTooSmall(u64),

    #[error("upgrade criterion undefined for p = {0}: p must avoid {{2, 3, 5, 7, 13}}")]
    UpgradePrimeExcluded(u64),

    #[error("denominator not smooth: unfactored cofactor {0} exceeds 10^12")]
    DenominatorNotSmooth(String),

    #[error("invalid rational literal {literal:?}: expected <num> or <num>/<den>")]
    InvalidRational { literal: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("corrupt trace cache {path} at line {line}: {reason}")]
    CorruptTraceCache {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("trace cache I/O on {path}: {source}")]
    CacheIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report I/O on {path}: {source}")]
    ReportIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
