use thiserror::Error;

/// Failures of the Java front end and type-graph construction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("{path}:{line}: syntax error: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("superclass cycle: {}", .cycle.join(" -> "))]
    Cycle { cycle: Vec<String> },

    #[error("type {name} declared in both {first} and {second}")]
    DuplicateType { name: String, first: String, second: String },

    #[error("duplicate compilation unit path {0}")]
    DuplicatePath(String),

    #[error("empty path for compilation unit")]
    EmptyPath,
}

/// Failures of history mining and bug-ledger handling.
#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("cannot access repository {path}: {message}")]
    RepoAccess { path: String, message: String },

    #[error("no commits to analyze on {0}")]
    EmptyHistory(String),

    #[error("commit {0} is not part of the analyzed sequence")]
    UnknownCommit(String),

    #[error("bug ledger, bug {bug_id}: {message}")]
    LedgerFormat { bug_id: String, message: String },

    #[error("bug ledger: {0}")]
    LedgerSyntax(String),

    #[error("panel: {0}")]
    PanelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<git2::Error> for HistoryError {
    fn from(e: git2::Error) -> Self {
        HistoryError::RepoAccess { path: String::new(), message: e.message().to_string() }
    }
}
