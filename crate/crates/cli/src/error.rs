use std::fmt::Display;
use std::io;

use hiergame::Error;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Display, source: io::Error) -> Self {
        CliError::Io { path: path.to_string(), source }
    }

    /// Process exit code. 2 is left to argument errors reported by clap.
    pub fn code(&self) -> u8 {
        match self.kind() {
            "io" => 1,
            "parse" => 3,
            "invalid-graph" => 4,
            "enumeration-cap" => 5,
            _ => 6,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } | CliError::Csv(_) => "io",
            CliError::Core(e) => match e {
                Error::Parse(_) => "parse",
                Error::UnknownVertex(_)
                | Error::DuplicateVertex(_)
                | Error::NoPredecessors(_)
                | Error::EmptyVote
                | Error::Cyclic(_)
                | Error::MultiEdge(..)
                | Error::InvalidGraph(_) => "invalid-graph",
                Error::EnumerationInfeasible { .. } => "enumeration-cap",
                Error::OverlappingSets(_)
                | Error::AssignmentMismatch(_)
                | Error::DegenerateInfluence { .. }
                | Error::OutsideScope(_)
                | Error::BoundaryValue { .. }
                | Error::InvalidParameter(_)
                | Error::InvalidGame(_) => "domain",
            },
        }
    }
}
