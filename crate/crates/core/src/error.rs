use thiserror::Error;

/// Errors raised by the width laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value while evaluating integrand at t = {at}")]
    Evaluation { at: f64 },

    /// `k1 < k0`: the level range is empty for this `n`.
    #[error("lemma regime not reached for n = {n} (k0 = {k0}, k1 = {k1}); smallest valid n is {}",
        min_valid_n.map(|m| m.to_string()).unwrap_or_else(|| "unbounded".into()))]
    Regime {
        n: u64,
        k0: u32,
        k1: i64,
        min_valid_n: Option<u64>,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("empty subspace: every input vector vanished")]
    EmptySubspace,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
