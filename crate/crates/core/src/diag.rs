use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// A non-fatal problem recorded while mining; the run continues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub commit: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn warning(commit: Option<&str>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, commit: commit.map(str::to_string), message: message.into() }
    }

    pub fn error(commit: Option<&str>, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, commit: commit.map(str::to_string), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.commit {
            Some(c) => write!(f, "{level} [{c}] {}", self.message),
            None => write!(f, "{level} {}", self.message),
        }
    }
}
