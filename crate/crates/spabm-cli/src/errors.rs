//! Process-level error classification.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use spabm::SpabmError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad parameter values, empty ranges.
    Usage(String),
    /// Unreadable or malformed input files, inconsistent dimensions.
    Data(String),
    /// Solver breakdowns: non-convergence, unfillable clusterings.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

pub fn classify(err: SpabmError) -> CliError {
    match err {
        SpabmError::NonConvergence { .. } | SpabmError::EmptyCommunity(_) => {
            CliError::Numerical(err.to_string())
        }
        SpabmError::InvalidParameter(_) | SpabmError::SearchSpaceTooLarge(_) => {
            CliError::Usage(err.to_string())
        }
        _ => CliError::Data(err.to_string()),
    }
}

/// Classifies and prefixes the pipeline stage that failed.
pub fn at_stage(stage: &str) -> impl FnOnce(SpabmError) -> CliError + '_ {
    move |err| {
        let wrapped = classify(err);
        let msg = format!("{stage}: {}", wrapped.message());
        match wrapped {
            CliError::Usage(_) => CliError::Usage(msg),
            CliError::Data(_) => CliError::Data(msg),
            CliError::Numerical(_) => CliError::Numerical(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
