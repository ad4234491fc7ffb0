use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("fields live on different grids")]
    DomainMismatch,
    #[error("{0}: expected a pure-vector (zero scalar part) field")]
    NotPure(&'static str),
    #[error("{0}: expected a scalar field")]
    NotScalar(&'static str),
    #[error("L^q exponent {0} outside (1, 3/2) and not 2")]
    ExponentOutOfRange(f64),
    #[error("{what} did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { what: &'static str, iterations: usize, residual: f64 },
    #[error("all {0} samples were degenerate (zero norm)")]
    Degenerate(usize),
    #[error("radicand under W is negative ({radicand:e}); the field-size condition already fails")]
    NegativeRadicand { radicand: f64 },
    #[error("Neumann series refused: measured ratio q{which} = {q} >= 1")]
    NeumannRatio { which: u8, q: f64 },
    #[error("iteration diverged at step {iteration}: state norm {norm:e} exceeds 1e3 x reference {reference:e}")]
    Divergence { iteration: usize, norm: f64, reference: f64 },
    #[error("iteration stagnated at step {iteration}: state change grew for 5 consecutive steps")]
    Stagnation { iteration: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
