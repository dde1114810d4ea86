use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an operation (invalid mode index, point
    /// outside the cavity, zero direction vector, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    /// Successive quadrature refinements still disagree after the last
    /// allowed doubling.
    #[error(
        "quadrature did not converge: order {coarse_order} gave {coarse:.12e}, \
         order {fine_order} gave {fine:.12e}"
    )]
    NonConvergence { coarse_order: usize, fine_order: usize, coarse: f64, fine: f64 },

    #[error("{what}: requested {requested} exceeds cap {cap}")]
    ResourceCap { what: &'static str, requested: usize, cap: usize },

    #[error("coherent state cutoff {given} too small, need at least {required}")]
    CutoffTooSmall { given: usize, required: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::CutoffTooSmall { .. } => 2,
            Error::NonConvergence { .. } => 3,
            Error::ResourceCap { .. } => 4,
            Error::Io(_) => 1,
        }
    }
}
