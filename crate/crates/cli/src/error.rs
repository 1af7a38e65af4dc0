//! CLI error type carrying the exit-code contract.

use std::fmt;

/// Failure categories, each mapped to a distinct exit code so scripts can
/// triage: configuration problems (1), a computed value violating a proven
/// bound (2), and the numerics giving up (3).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Audit(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Audit(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Audit(m) => write!(f, "bound audit failed: {m}"),
            CliError::Solver(m) => write!(f, "solver failed: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl From<fdl_core::Error> for CliError {
    fn from(e: fdl_core::Error) -> Self {
        match &e {
            // Invalid inputs trace back to the configuration file.
            fdl_core::Error::Invalid { .. } => CliError::Config(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(CliError::config("x").code(), 1);
        assert_eq!(CliError::Io("x".into()).code(), 1);
        assert_eq!(CliError::Audit("x".into()).code(), 2);
        assert_eq!(CliError::Solver("x".into()).code(), 3);
    }

    #[test]
    fn library_errors_split_into_config_and_solver() {
        let invalid = fdl_core::Error::Invalid {
            what: "grid",
            why: "too small".into(),
        };
        assert_eq!(CliError::from(invalid).code(), 1);
        let stuck = fdl_core::Error::NoConvergence {
            max_periods: 4,
            residual: 1.0,
        };
        assert_eq!(CliError::from(stuck).code(), 3);
    }
}
