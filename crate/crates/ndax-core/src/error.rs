//! Error type shared across the engine.

use std::fmt;

/// Diagnostic produced while parsing or lowering a source document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub col: u32,
    pub message: String,
    pub hint: Option<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if let Some(hint) = &self.hint {
            write!(f, " (hint: {hint})")?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{origin}: {}", render_diagnostics(.diagnostics))]
    Parse {
        origin: String,
        diagnostics: Vec<Diagnostic>,
    },

    #[error("specification error: {0}")]
    Spec(String),

    #[error("execution error: {0}")]
    Execution(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("strategy incomplete: no decision for key {0}")]
    StrategyIncomplete(String),

    #[error("program is not situation-determined: {0}")]
    NotSituationDetermined(String),

    #[error("ambiguous explanation: {0}")]
    AmbiguousExplanation(String),

    #[error("unsupported construct: {0}")]
    Unsupported(String),

    #[error("refinement constraint failed: {0}")]
    RefinementUnsound(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    pub fn execution(msg: impl Into<String>) -> Self {
        Error::Execution(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
