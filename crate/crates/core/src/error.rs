use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("frequency ratio on axis {axis} is {ratio}, not within {tol} of an integer")]
    Commensurability { axis: usize, ratio: f64, tol: f64 },

    #[error("series did not converge within {terms} terms (remaining tail bound {bound:e})")]
    Convergence { terms: usize, bound: f64 },

    #[error("formula not applicable: {0}")]
    InapplicableFormula(String),

    #[error("unsupported expansion order {0}")]
    UnsupportedOrder(u32),

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error("at T = {temperature}: {source}")]
    AtTemperature {
        temperature: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
