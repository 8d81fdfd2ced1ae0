use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by profile handling, rule construction, manipulation
/// moves, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid ballot: {reason}")]
    InvalidBallot { reason: String },

    #[error("invalid profile: {reason}")]
    InvalidProfile { reason: String },

    #[error("invalid tie-break order: {reason}")]
    InvalidTieBreak { reason: String },

    #[error("invalid scoring vector: {reason}")]
    InvalidScoringVector { reason: String },

    #[error("unknown rule `{name}` (accepted: plurality, veto, approval2, approval3, borda, copeland, maximin, stv)")]
    UnknownRule { name: String },

    #[error("unknown move `{name}` (accepted: best, pragmatist<k> e.g. pragmatist2/pragmatist3, m1, m2)")]
    UnknownMove { name: String },

    #[error("{k}-approval requires more than {k} candidates, got m={m}")]
    ApprovalNotDefined { k: usize, m: usize },

    #[error("k-pragmatist requires 1 <= k <= m, got k={k} with m={m}")]
    PragmatistOutOfRange { k: usize, m: usize },

    #[error("profile parse error at line {line}: {message}")]
    ProfileParse { line: usize, message: String },

    #[error("no profile with a Condorcet winner found within {attempts} attempts (m={m}, n={n})")]
    SamplingCapExceeded { attempts: usize, m: usize, n: usize },

    #[error("best-response enumeration supports at most {cap} candidates, got m={m}")]
    EnumerationCapExceeded { m: usize, cap: usize },

    #[error("experiment config error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("select_mover called with no eligible agents")]
    NoEligibleAgent,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
