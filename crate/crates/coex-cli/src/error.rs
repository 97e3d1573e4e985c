//! Error type carrying the process exit code.
//!
//! The tool distinguishes input problems (unreadable files, malformed
//! scenarios, bad flags — exit code 1) from numerical failures inside an
//! otherwise valid run (quadrature that cannot reach tolerance, an SINR grid
//! that cannot hold the threshold, a degenerate energy model — exit code 2).
//! Success is exit code 0.

use std::fmt;

/// A CLI failure, tagged with how it should terminate the process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input: files, flags, scenario contents. Exit code 1.
    Input(String),
    /// A numerical method failed on valid input. Exit code 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

/// Sorts an engine error into the input/numerical split.
///
/// Grid and quadrature failures, and an energy model that cannot define a
/// battery lifetime, happen while computing on accepted input; everything
/// else an engine returns describes the input itself.
impl From<coex_core::Error> for CliError {
    fn from(e: coex_core::Error) -> Self {
        use coex_core::Error as E;
        match e {
            E::QuadratureNoConvergence { .. } | E::GridMaxTooSmall { .. } | E::ZeroEnergy => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
