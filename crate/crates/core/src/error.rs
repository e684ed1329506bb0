use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRationalError {
    #[error("malformed numeral `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("format error: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct MpsError {
    pub line: usize,
    pub kind: MpsErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MpsErrorKind {
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("duplicate entry for column `{column}` in row `{row}`")]
    DuplicateEntry { column: String, row: String },
    #[error("reference to undeclared row `{0}`")]
    UnknownRow(String),
    #[error("reference to undeclared column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate row `{0}`")]
    DuplicateRow(String),
    #[error("bad row type `{0}`")]
    BadRowType(String),
    #[error("bad bound type `{0}`")]
    BadBoundType(String),
    #[error("data outside of any section")]
    NoSection,
    #[error("wrong number of fields")]
    FieldCount,
    #[error("no objective row")]
    NoObjective,
    #[error(transparent)]
    Number(#[from] ParseRationalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("precision limit of {limit} bits reached")]
pub struct PrecisionLimitReached {
    pub limit: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("basis matrix is singular (rank {rank} of {dim})")]
pub struct SingularBasis {
    pub rank: usize,
    pub dim: usize,
}
