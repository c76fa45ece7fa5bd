use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Identifies one block of a block-structured matrix. Layers are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BlockId {
    Diag(usize),
    Off(usize, usize),
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // 1-based, matching how layers are usually named (A^1, B^{1,2}).
        match *self {
            BlockId::Diag(j) => write!(f, "diagonal block {}", j + 1),
            BlockId::Off(j, k) => write!(f, "off-diagonal block ({},{})", j + 1, k + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("no tabulated alpha for k={k}, m={m}; valid range is 1 <= k <= 4, 1 <= m <= 4")]
    Lookup { k: usize, m: usize },

    #[error("{what}: need at least {required}, got {got}")]
    Size {
        what: &'static str,
        required: usize,
        got: usize,
    },

    #[error("{block}: zero variance ({detail}); use scaling \"none\" for this block")]
    DegenerateVariance { block: BlockId, detail: String },

    #[error("invalid network specification: {0}")]
    InvalidSpec(String),

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("eigenvalue iteration did not converge for index {index}")]
    NoConvergence { index: usize },

    #[error("sample is empty")]
    EmptySample,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("structure contains no residues with the selected atom")]
    EmptyStructure,

    #[error("every block has a degenerate edge count; no block can be scaled")]
    AllBlocksDegenerate,

    #[error("network does not match a known case (a-d): {0}")]
    UnknownCase(String),

    #[error("{block}: {source}")]
    Block {
        block: BlockId,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_block(self, block: BlockId) -> Self {
        Error::Block {
            block,
            source: Box::new(self),
        }
    }
}
