use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Malformed graph description (bad vertex index, nonpositive length, ...).
    InvalidGraph(String),
    /// Malformed origami (not a permutation, disconnected, ...).
    InvalidOrigami(String),
    InvalidArgument(String),
    /// An enumeration hit its configured node cap.
    ResourceLimit {
        what: &'static str,
        cap: u64,
    },
    /// The tail block of the transfer matrix has row-sum norm >= 1.
    TailCondition {
        k: usize,
        norm_bound: f64,
    },
    Singular,
    NoConvergence {
        residual: f64,
        iterations: usize,
    },
    ZeroMatrix,
    /// `ρ(W_σ)` never dropped below 1; some tail family is not summable.
    EntropyDiverges,
    /// Eta was requested at or below the abscissa of convergence.
    BelowAbscissa {
        z: f64,
    },
    NoSingularities,
    NotSingular(usize),
    /// The saddle-connection truncation is not strongly connected.
    Disconnected {
        max_len: f64,
    },
    InsufficientData(String),
    NotPrimitive {
        p: i64,
        q: i64,
    },
    DifferentCones,
    NotConvergent,
    MismatchedEntropy {
        left: f64,
        right: f64,
    },
    EmptyInput,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGraph(m) => write!(f, "invalid graph: {m}"),
            Error::InvalidOrigami(m) => write!(f, "invalid origami: {m}"),
            Error::InvalidArgument(m) => write!(f, "invalid argument: {m}"),
            Error::ResourceLimit { what, cap } => {
                write!(f, "resource limit: {what} exceeded the cap of {cap}")
            }
            Error::TailCondition { k, norm_bound } => write!(
                f,
                "tail block norm bound {norm_bound} >= 1 with head size k={k}; increase k"
            ),
            Error::Singular => write!(f, "singular linear system"),
            Error::NoConvergence {
                residual,
                iterations,
            } => write!(
                f,
                "power iteration did not converge after {iterations} iterations (residual {residual:e})"
            ),
            Error::ZeroMatrix => write!(f, "matrix is identically zero"),
            Error::EntropyDiverges => write!(
                f,
                "entropy diverges under truncation; increase σ range (summability of the edge lengths fails)"
            ),
            Error::BelowAbscissa { z } => {
                write!(f, "z = {z} is not above the entropy; the eta series diverges")
            }
            Error::NoSingularities => write!(f, "surface has no singular points"),
            Error::NotSingular(c) => write!(f, "cone point {c} is not singular"),
            Error::Disconnected { max_len } => write!(
                f,
                "saddle-connection truncation at L = {max_len} is not strongly connected; increase L"
            ),
            Error::InsufficientData(m) => write!(f, "insufficient data: {m}"),
            Error::NotPrimitive { p, q } => write!(f, "direction ({p}, {q}) is not primitive"),
            Error::DifferentCones => write!(f, "directions belong to different cone points"),
            Error::NotConvergent => write!(f, "report verdict is not convergent"),
            Error::MismatchedEntropy { left, right } => {
                write!(f, "reports use different entropies ({left} vs {right})")
            }
            Error::EmptyInput => write!(f, "empty input"),
        }
    }
}

impl core::error::Error for Error {}
