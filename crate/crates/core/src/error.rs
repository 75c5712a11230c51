use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The relay budget is already used up by the other active elements.
    #[error("infeasible relay budget: limit {budget:e} W, already committed {committed:e} W")]
    InfeasibleBudget { budget: f64, committed: f64 },

    /// A matrix assumed to be rank one has a significant second component.
    #[error("rank assumption violated: residual ratio {residual:e} exceeds tolerance {tol:e}")]
    Rank { residual: f64, tol: f64 },

    /// The KL divergence failed to increase with transmit power while bracketing.
    #[error("KL divergence not monotone in transmit power near P_a = {pa:e} W")]
    NonMonotone { pa: f64 },

    /// A Hermitian matrix that must be positive definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(&'static str),

    #[error("optimizer failed at outer iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
