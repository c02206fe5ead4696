use std::fmt;

use gridcross_core::constructions::ConstructionError;
use gridcross_core::crossings::CrossingError;
use gridcross_core::enumeration::EnumError;
use gridcross_core::grid_graph::GraphError;
use gridcross_core::numtheory::NumTheoryError;
use serde_json::json;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    CapExceeded,
    Io,
}

impl ErrorKind {
    fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::CapExceeded => "cap-exceeded",
            ErrorKind::Io => "io",
        }
    }
}

/// Error reported by the command-line front end. Maps onto exit codes and a
/// one-line JSON diagnostic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Io,
            message: message.into(),
        }
    }

    /// Prefixes the message with where it happened.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 2,
            ErrorKind::CapExceeded => 3,
            ErrorKind::Io => 1,
        }
    }

    pub fn to_json_line(&self) -> String {
        json!({"error": self.kind.as_str(), "message": self.message}).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<EnumError> for CliError {
    fn from(e: EnumError) -> Self {
        let kind = match e {
            EnumError::CapExceeded { .. } => ErrorKind::CapExceeded,
            EnumError::BadArgument(_) => ErrorKind::Validation,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::validation(e.to_string())
            }
        })*
    };
}

validation_from!(GraphError, CrossingError, ConstructionError, NumTheoryError);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}
