//! File formats and command implementations behind the `khier` binary.

pub mod commands;
pub mod io;
pub mod report;

use khier_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Io(String),
    #[error("VERIFICATION_FAILED: {0}")]
    VerifyFailed(String),
}

impl CliError {
    /// 2 parse error, 3 invalid structure, 4 numerical ambiguity, 5 failed verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Core(Error::NumericallyAmbiguous(_)) => 4,
            CliError::Core(_) => 3,
            CliError::Io(_) => 1,
            CliError::VerifyFailed(_) => 5,
        }
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
