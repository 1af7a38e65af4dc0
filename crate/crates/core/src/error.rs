//! Error surface shared by the solver, eigenvalue, and dynamics layers.
//!
//! Error payloads are plain `f64` regardless of the scalar the computation
//! ran in, so the enum stays object-simple and printable everywhere.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The tridiagonal solve hit a (numerically) zero pivot.
    #[error("singular tridiagonal system at t = {time}: zero pivot in row {row}")]
    SingularSystem { row: usize, time: f64 },

    /// A nonlinear step produced a value outside the admissible band
    /// around [0, K]; the time step is too large for the comparison
    /// structure of the scheme.
    #[error("state left [{lo}, {hi}] at node {node} (value {value}, t = {time}); reduce dt")]
    RangeViolation {
        node: usize,
        value: f64,
        lo: f64,
        hi: f64,
        time: f64,
    },

    /// Power iteration (or a bracketing iteration) ran out of periods.
    #[error("no convergence within {max_periods} periods (last residual {residual:e})")]
    NoConvergence { max_periods: usize, residual: f64 },

    /// An iterate collapsed to an unusable state (identically zero or so
    /// small that renormalization lost all information).
    #[error("iterate degenerated at t = {time}: sup-norm {sup:e}")]
    DegenerateState { sup: f64, time: f64 },

    /// A value became non-finite during time stepping.
    #[error("non-finite value produced at t = {time}")]
    NonFinite { time: f64 },

    /// The dense period-map assembly was asked for more columns than the
    /// guard allows.
    #[error("dense period map limited to {limit} interior points, requested {requested}")]
    SizeExceeded { requested: usize, limit: usize },

    /// The converged principal mode was not strictly positive, so it cannot
    /// be the dominant one.
    #[error("principal mode lost positivity (min interior value {min:e})")]
    PositivityLost { min: f64 },

    /// Persistence machinery requires the linear growth rate to clear the
    /// principal eigenvalue by a solver-resolution margin.
    #[error("f'(0) = {fprime0} does not exceed mu = {mu} by the required margin {slack:e}")]
    ThresholdNotExceeded { fprime0: f64, mu: f64, slack: f64 },

    /// Construction-time validation failure (domain, reaction, grid,
    /// stepping configuration, or call arguments).
    #[error("invalid {what}: {why}")]
    Invalid { what: &'static str, why: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            why: why.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
