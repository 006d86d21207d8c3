use std::fmt;

use dimwit_core::bellfmt::BellfmtError;
use dimwit_core::catalog::CatalogError;
use dimwit_core::grothendieck::GrothendieckError;
use dimwit_core::localbound::LocalBoundError;
use dimwit_core::scenario::ScenarioError;
use dimwit_core::seesaw::SeesawError;

pub const EXIT_NOT_WITNESSED: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_MISMATCH: u8 = 3;
pub const EXIT_TOO_LARGE: u8 = 4;
pub const EXIT_CONFIG: u8 = 5;
pub const EXIT_OTHER: u8 = 6;

/// A user-facing failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(EXIT_CONFIG, message)
    }

    /// Prefixes the message with the file or argument it concerns.
    pub fn with_context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<BellfmtError> for CliError {
    fn from(e: BellfmtError) -> Self {
        Self::new(EXIT_PARSE, format!("parse error: {e}"))
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::ScenarioMismatch(_) => EXIT_MISMATCH,
            ScenarioError::TableParse { .. }
            | ScenarioError::InvalidTable(_)
            | ScenarioError::SignalingDetected { .. }
            | ScenarioError::InvalidScenario(_) => EXIT_PARSE,
            ScenarioError::DimensionMismatch(_) | ScenarioError::InvalidModel(_) => EXIT_CONFIG,
            ScenarioError::Linalg(_) => EXIT_OTHER,
        };
        Self::new(code, e.to_string())
    }
}

impl From<LocalBoundError> for CliError {
    fn from(e: LocalBoundError) -> Self {
        Self::new(EXIT_TOO_LARGE, e.to_string())
    }
}

impl From<SeesawError> for CliError {
    fn from(e: SeesawError) -> Self {
        match e {
            SeesawError::Scenario(inner) => inner.into(),
            SeesawError::ConfigInvalid(_) | SeesawError::WrongOutcomeCount { .. } => {
                Self::config(e.to_string())
            }
            SeesawError::AllRestartsFailed(_) | SeesawError::Linalg(_) => {
                Self::new(EXIT_OTHER, e.to_string())
            }
        }
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::UnknownName(_) => Self::new(EXIT_PARSE, e.to_string()),
            CatalogError::InvalidArgument(_) => Self::config(e.to_string()),
            CatalogError::LocalBound(inner) => inner.into(),
            CatalogError::Seesaw(inner) => inner.into(),
        }
    }
}

impl From<GrothendieckError> for CliError {
    fn from(e: GrothendieckError) -> Self {
        let code = match e {
            GrothendieckError::Shape(_) | GrothendieckError::NonFinite { .. } => EXIT_PARSE,
            GrothendieckError::TooLarge { .. } => EXIT_TOO_LARGE,
            GrothendieckError::ZeroMatrix | GrothendieckError::ConfigInvalid(_) => EXIT_CONFIG,
        };
        Self::new(code, e.to_string())
    }
}
