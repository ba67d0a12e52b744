//! Exit-code discipline: 0 success, 1 usage, 2 data error, 3 fit failure.

use vardyn_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Fit = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub source: anyhow::Error,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(source: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ExitKind::Usage,
            source: source.into(),
        }
    }

    pub fn data(source: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ExitKind::Data,
            source: source.into(),
        }
    }

    pub fn fit(source: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: ExitKind::Fit,
            source: source.into(),
        }
    }

    /// Classifies a pipeline error from the core library: fitting problems
    /// exit 3, everything else is a data problem.
    pub fn from_core(err: CoreError) -> Self {
        match err {
            CoreError::TooFewPoints { .. }
            | CoreError::NoConvergence { .. }
            | CoreError::Bootstrap(_) => Self::fit(err),
            _ => Self::data(err),
        }
    }
}

pub trait IntoCliResult<T> {
    fn or_data(self) -> CliResult<T>;
    fn or_usage(self) -> CliResult<T>;
}

impl<T> IntoCliResult<T> for Result<T, CoreError> {
    fn or_data(self) -> CliResult<T> {
        self.map_err(CliError::data)
    }

    fn or_usage(self) -> CliResult<T> {
        self.map_err(CliError::usage)
    }
}
