use thiserror::Error;

/// Errors raised by the evaluators and builders of this crate.
///
/// Check failures are never errors: they are entries of the various
/// reports. Errors are reserved for calls whose preconditions do not hold.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("argument {requested} exceeds the weight's blow-up bound {eta_sup}")]
    BlowUpExceeded { requested: f64, eta_sup: f64 },

    #[error("weight evaluation overflows f64 at tau = {tau}")]
    Overflow { tau: f64 },

    #[error("inadmissible modulus: {0}")]
    InadmissibleModulus(String),

    #[error("no k0 <= {limit} satisfies the admissibility conditions")]
    SearchFailure { limit: u64 },

    #[error("ellipticity violated at t = {t}, xi = {xi:?}: {detail}")]
    Ellipticity { t: f64, xi: Vec<f64>, detail: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("magnitude 10^{log10:.1} not representable in absolute mode; use gauged evaluation")]
    Unrepresentable { log10: f64 },

    #[error("degenerate point t = {t}, x = ({x1}, {x2}): u and its gradient vanish")]
    Degenerate { t: f64, x1: f64, x2: f64 },

    #[error("invalid coefficient path: {0}")]
    InvalidPath(String),
}

pub type Result<T> = std::result::Result<T, Error>;
