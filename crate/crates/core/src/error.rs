use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state set is empty or has zero dimension")]
    Empty,

    #[error("vector {index} has dimension {found}, expected {expected}")]
    VectorDimension {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("vector {index} is not normalized (squared norm {norm_sq})")]
    NotNormalized { index: usize, norm_sq: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e}, allowed {allowed:e})")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("diagonal entry {index} is {value}, expected 1")]
    NotUnitDiagonal { index: usize, value: f64 },

    #[error("entry ({row},{col}) has modulus {modulus} > 1")]
    EntryTooLarge { row: usize, col: usize, modulus: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },

    #[error("support obstruction inapplicable: output states are linearly dependent (min eigenvalue {min_eigenvalue:e})")]
    LemmaInapplicable { min_eigenvalue: f64 },

    #[error("n = {n} is too large for {what} (max {max})")]
    TooLarge {
        what: &'static str,
        n: usize,
        max: usize,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("priors must be uniform (p_i = 1/n)")]
    NonUniformPriors,

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, value: f64, range: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            value,
            range: range.into(),
        }
    }
}
