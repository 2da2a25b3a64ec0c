use std::fmt;

use mcb_core::Error;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_MATH: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn math(message: impl Into<String>) -> Self {
        Self { code: EXIT_MATH, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Malformed input is a usage error; everything else is a mathematical failure.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionMismatch { .. }
            | Error::NotStochastic(_)
            | Error::NotProbability(_)
            | Error::ParseRational(_)
            | Error::OutOfRange(_)
            | Error::Unsupported(_) => EXIT_USAGE,
            _ => EXIT_MATH,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
