use std::fmt;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SEMANTIC: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

/// Failure classes, one per non-zero exit code (usage errors are handled by clap).
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad configuration.
    Input(String),
    /// Inputs parsed but failed validation or produced no usable result.
    Semantic(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Semantic(_) => EXIT_SEMANTIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Semantic(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}
