use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Construction-time invariant violations, joined into one message.
    #[error("invalid network: {0}")]
    Invalid(String),

    /// No directed origin→destination path exists.
    #[error("no path from origin to destination")]
    NoPath,

    /// A reduced Laplacian system was singular (disconnected support).
    #[error("singular linear system: {0}")]
    SingularSystem(String),

    /// The resistor network does not connect the requested terminals.
    #[error("terminals {0} and {1} are not connected")]
    Disconnected(usize, usize),

    /// Iterative solver exceeded its budget.
    #[error("solver did not converge: gap {gap:.3e} after {iterations} iterations")]
    NotConverged { gap: f64, iterations: usize },

    /// Throughput threshold requested on a network that is not series-parallel.
    #[error("network is not series-parallel")]
    NotSeriesParallel,

    /// Nonlinear conductance requested for a link carrying no flow.
    #[error("link {0} carries no flow; conductance f/τ(f) is undefined")]
    ZeroFlowLink(usize),

    /// Electrical gain formula requested for a link outside the equilibrium support.
    #[error("link {0} is unused at equilibrium (λ > 0); electrical gain does not apply")]
    LinkUnsupported(usize),

    /// Strict complementarity fails: some link has both f = 0 and λ = 0.
    #[error("degenerate equilibrium: link {0} has f = 0 and λ = 0")]
    Degenerate(usize),

    /// Hitting-probability query from a state that cannot reach any target.
    #[error("start node {0} cannot reach any target node")]
    Unreachable(usize),

    /// The two social-cost evaluations disagree beyond tolerance.
    #[error("social cost mismatch: Σfτ = {direct:.12e}, m(γ_o−γ_d) = {multiplier:.12e}")]
    InconsistentMultipliers { direct: f64, multiplier: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(violations: &[String]) -> Self {
        Error::Invalid(violations.join("; "))
    }
}
