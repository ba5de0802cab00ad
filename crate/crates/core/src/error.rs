use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of a function.
    #[error("domain error in {func}: {detail}")]
    Domain {
        func: &'static str,
        detail: &'static str,
    },

    /// A scenario parameter violates a model invariant.
    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),

    /// Adaptive quadrature stopped before reaching its tolerance.
    #[error("quadrature did not converge (achieved relative error {achieved:e})")]
    Quadrature { achieved: f64 },

    /// The SINR series needs more Laplace derivatives than the configured cap.
    #[error(
        "derivative order {required} exceeds the cap of {cap}; use the tail form or the Monte Carlo oracle"
    )]
    DerivativeCap { required: usize, cap: usize },

    /// A Monte Carlo request that cannot be honoured.
    #[error("simulation error: {0}")]
    Simulation(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: &'static str) -> Self {
        Error::Domain { func, detail }
    }
}
