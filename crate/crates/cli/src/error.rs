use std::fmt;
use std::path::Path;

/// Harness-level failure, split by how the CLI should exit: configuration
/// mistakes (unknown env, bad flag value, malformed config file) exit 2
/// with a usage-style message, everything else exits 1.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> CliError {
        CliError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> CliError {
        CliError::Runtime(msg.into())
    }

    /// Wrap an I/O error with the path it concerned.
    pub fn io(err: std::io::Error, path: &Path) -> CliError {
        CliError::Runtime(format!("{}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<herd_core::Error> for CliError {
    fn from(err: herd_core::Error) -> CliError {
        match err {
            herd_core::Error::InvalidConfig(_) => CliError::Config(err.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}
