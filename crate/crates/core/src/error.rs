use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("contraction ratio {0} must lie in the open interval (0, 1/2)")]
    InvalidRatio(String),
    #[error("invalid symbol {0:?} in word (expected '1' or '2')")]
    InvalidSymbol(char),
    #[error("word of length {len} exceeds the limit {limit}")]
    WordTooLong { len: usize, limit: usize },
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("denominator vanishes at r = {0}")]
    PoleAtPoint(String),
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: String, hi: String },
    #[error("denominator has a root in [{lo}, {hi}]")]
    PoleInInterval { lo: String, hi: String },
    #[error("tolerance must be positive")]
    NonPositiveTolerance,
    #[error("cylinders overlap: {0} is a prefix of {1}")]
    OverlappingCylinders(String, String),
    #[error("empty word set")]
    EmptyWordSet,
    #[error("bad cardinality: {0}")]
    BadCardinality(String),
    #[error("index word {word} has length {len}, expected {expected}")]
    BadWordLength { word: String, len: usize, expected: usize },
    #[error("bad variant selector: {0}")]
    BadVariants(String),
    #[error("n must be at least {min}, got {n}")]
    BadCount { n: usize, min: usize },
    #[error("codebook points are not strictly increasing at index {0}")]
    UnsortedCodebook(usize),
    #[error("discretization depth {0} outside [1, 20]")]
    DepthOutOfRange(usize),
    #[error("{n} codepoints requested for {atoms} atoms")]
    TooManyCodepoints { n: usize, atoms: usize },
    #[error("codepoint {0} captures no mass")]
    EmptyCell(usize),
    #[error("cell resolution is not constant over the window: {0}")]
    UnstableResolution(String),
    #[error("cells unresolved at depth {0}")]
    Unresolved(usize),
    #[error("family {0} has no construction for this request")]
    UnsupportedFamily(String),
    #[error("threshold {name} not found in its bracket; sign changes at {found}")]
    ThresholdMismatch { name: String, found: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
