use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tail integral of the potential does not converge (alpha - beta = {gap} <= 1)")]
    NonConvergentTail { gap: f64 },

    #[error("q(r) + E stays non-positive up to the safety horizon r = {horizon:e}")]
    TurningRadiusNotFound { horizon: f64 },

    #[error("adaptive step collapsed at r = {r:e} (unresolved oscillation)")]
    StepCollapse { r: f64 },

    #[error("step budget of {budget} exhausted at r = {r:e}")]
    StepBudget { r: f64, budget: usize },

    #[error("operator is weighted (rho = {rho}); reduce it to standard form first")]
    WeightedOperator { rho: f64 },

    #[error("ground-state data was built for a different potential")]
    MismatchedGroundState,

    #[error("double transform requires alpha - beta = 2, got {gap}")]
    NotCritical { gap: f64 },

    #[error("parameters outside the classification theorem: {0}")]
    OutOfTheoremRange(String),

    #[error("least-squares fit needs distinct abscissae")]
    DegenerateAbscissae,

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("quadrature did not resolve the integrand on [{a:e}, {b:e}]")]
    UnresolvedIntegrand { a: f64, b: f64 },

    #[error("channel l = {l}: {source}")]
    Channel {
        l: u32,
        #[source]
        source: Box<Error>,
    },

    #[error("channel cutoff not reached below l = {l_max}")]
    ChannelCutoff { l_max: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_channel(self, l: u32) -> Self {
        Error::Channel {
            l,
            source: Box::new(self),
        }
    }
}
