use thiserror::Error;

/// Errors raised by the solvers in this crate.
///
/// The variants map one-to-one onto the failure stages of a run: parameter
/// validation, root finding, profile/moment numerics, and the dynamical
/// integrators (interaction system and PDE oracle).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {}", .0.join("; "))]
    Domain(Vec<String>),

    #[error("no root: {reason} (scanned {lo:e} ..= {hi:e})")]
    NoRoot { reason: String, lo: f64, hi: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("quadrature did not converge: {what} (relative change {rel_change:e})")]
    Convergence { what: String, rel_change: f64 },

    #[error("law {0} is odd in its derivative argument; its single-wave integral vanishes identically")]
    Parity(&'static str),

    #[error("singular interaction system at tau = {tau}: condition number {cond:e}")]
    SingularSystem { tau: f64, cond: f64 },

    #[error("blow-up at t = {t}: {reason}")]
    Blowup { t: f64, reason: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(vec![msg.into()])
    }

    /// Stable short name of the failing stage, used by the CLI for exit codes
    /// and messages.
    pub fn stage(&self) -> &'static str {
        match self {
            Error::Domain(_) => "validation",
            Error::NoRoot { .. } => "root-finding",
            Error::Integration(_) | Error::Convergence { .. } | Error::Parity(_) => "numerics",
            Error::SingularSystem { .. } | Error::Blowup { .. } => "dynamics",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
