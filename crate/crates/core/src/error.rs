use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("DFT index {index} (RIS {ris}) points away from the RIS plane")]
    DirectionMissesPlane { ris: usize, index: i64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("path selection infeasible: {surfaces} surfaces cannot carry {streams} streams")]
    Infeasible { surfaces: usize, streams: usize },

    #[error("RIS {0} has no surviving RIS-Rx path")]
    NoCandidatePath(usize),

    #[error("no feasible power allocation: every eigenmode is zero")]
    NoFeasibleAllocation,

    #[error("channel matrix has non-finite entries")]
    NonFinite,

    #[error("combiner columns are not orthonormal (max deviation {0:e})")]
    CombinerNotOrthonormal(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("undefined input: {0}")]
    Undefined(&'static str),

    #[error("degenerate draw: stream {0} has zero cascaded gain")]
    DegenerateDraw(usize),

    #[error("exhaustive partition too large: {0} candidates exceed the guard")]
    SearchTooLarge(u128),

    #[error("regime {regime} {problem}")]
    Regime { regime: &'static str, problem: &'static str },
}
