// SPDX-License-Identifier: Apache-2.0

use inloop_core::ErrorKind;

/// Exit statuses. Usage errors exit with 2, as clap does.
pub const EXIT_IO: u8 = 1;
pub const EXIT_UNSTABLE: u8 = 3;
pub const EXIT_PARAMETER: u8 = 4;
pub const EXIT_NUMERICAL: u8 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] inloop_core::Error),
    #[error("unstable: {0}")]
    Unstable(String),
    #[error("numerical: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_PARAMETER,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Parameter => EXIT_PARAMETER,
                ErrorKind::Instability => EXIT_UNSTABLE,
                ErrorKind::Numerical => EXIT_NUMERICAL,
            },
            CliError::Unstable(_) => EXIT_UNSTABLE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if !e.is_io_error() {
            return CliError::Io(std::io::Error::other(e));
        }
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            _ => unreachable!("checked above"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
