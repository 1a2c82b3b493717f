//! Commit-history mining: linear history walk, churn, bug ledgers, and
//! assembly of the commit-transition panel.

mod git;
mod ledger;
mod miner;
mod panel;

use serde::{Deserialize, Serialize};

pub use git::{walk_history, GitRepo, HistoryLimits, SourceBlob};
pub use ledger::{active_bug_count, read_exclusion_list, BugEntry, BugLedger, ResolvedBug, ResolvedLedger};
pub use miner::{mine_snapshots, CommitSnapshot};
pub use panel::{
    assemble_panel, classify_bug_delta, panel_header, read_panel_csv, read_series_csv, series_header,
    series_rows, write_panel_csv, write_panel_jsonl, write_series_csv, BugDelta, PanelRow, SeriesRow,
};

/// Diff statistics of one file in one commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub added: u64,
    pub deleted: u64,
}

impl FileChange {
    pub fn is_java(&self) -> bool {
        self.path.ends_with(".java")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub commit_id: String,
    /// Position in the analyzed first-parent sequence, starting at 0.
    pub order_index: usize,
    /// Committer time, seconds since the Unix epoch.
    pub timestamp: i64,
    pub files_changed: Vec<FileChange>,
    pub lines_added: u64,
    pub lines_deleted: u64,
}

/// Lines added plus lines deleted in `.java` files.
pub fn compute_churn(record: &CommitRecord) -> u64 {
    record.files_changed.iter().filter(|f| f.is_java()).map(|f| f.added + f.deleted).sum()
}
