use std::path::{Path, PathBuf};

use git2::{DiffOptions, Oid, Patch, Repository, TreeWalkMode, TreeWalkResult};

use super::{CommitRecord, FileChange};
use crate::error::HistoryError;

/// Optional restriction of the analyzed commit sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HistoryLimits {
    /// Oldest commit to include (inclusive); must lie on the first-parent
    /// chain of `to`.
    pub from: Option<String>,
    /// Newest commit to include; defaults to the branch tip.
    pub to: Option<String>,
    /// Keep only the newest `last` commits of the range.
    pub last: Option<usize>,
}

impl HistoryLimits {
    /// Parses `from..to`, `..to`, `from..` or a bare revision (`to`).
    pub fn parse_range(range: &str) -> Self {
        let non_empty = |s: &str| (!s.trim().is_empty()).then(|| s.trim().to_string());
        match range.split_once("..") {
            Some((from, to)) => Self { from: non_empty(from), to: non_empty(to), last: None },
            None => Self { from: None, to: non_empty(range), last: None },
        }
    }
}

/// A `.java` blob of one snapshot.
#[derive(Debug, Clone)]
pub struct SourceBlob {
    pub path: String,
    pub oid: String,
    pub content: Vec<u8>,
}

pub struct GitRepo {
    repo: Repository,
    path: PathBuf,
}

impl GitRepo {
    pub fn open(path: &Path) -> Result<Self, HistoryError> {
        let repo = Repository::open(path).map_err(|e| HistoryError::RepoAccess {
            path: path.display().to_string(),
            message: e.message().to_string(),
        })?;
        Ok(Self { repo, path: path.to_path_buf() })
    }

    fn access(&self, e: git2::Error) -> HistoryError {
        HistoryError::RepoAccess { path: self.path.display().to_string(), message: e.message().to_string() }
    }

    /// First-parent history of `branch`, oldest first, with per-file diff
    /// statistics against the first parent.
    pub fn walk_history(&self, branch: &str, limits: &HistoryLimits) -> Result<Vec<CommitRecord>, HistoryError> {
        let tip_rev = limits.to.as_deref().unwrap_or(branch);
        let tip = self
            .repo
            .revparse_single(tip_rev)
            .and_then(|o| o.peel_to_commit())
            .map_err(|e| self.access(e))?;
        let from = match &limits.from {
            Some(rev) => Some(
                self.repo.revparse_single(rev).and_then(|o| o.peel_to_commit()).map_err(|e| self.access(e))?.id(),
            ),
            None => None,
        };

        let mut chain = Vec::new();
        let mut cur = Some(tip);
        let mut reached_from = from.is_none();
        while let Some(commit) = cur {
            let id = commit.id();
            cur = if commit.parent_count() > 0 { Some(commit.parent(0).map_err(|e| self.access(e))?) } else { None };
            chain.push(commit);
            if Some(id) == from {
                reached_from = true;
                break;
            }
        }
        if !reached_from {
            return Err(HistoryError::RepoAccess {
                path: self.path.display().to_string(),
                message: format!("range start {} is not a first-parent ancestor of {tip_rev}", limits.from.as_deref().unwrap_or("")),
            });
        }
        chain.reverse();
        if let Some(last) = limits.last {
            let skip = chain.len().saturating_sub(last);
            chain.drain(..skip);
        }
        if chain.is_empty() {
            return Err(HistoryError::EmptyHistory(branch.to_string()));
        }

        chain
            .iter()
            .enumerate()
            .map(|(order_index, commit)| {
                let files_changed = self.diff_stats(commit)?;
                Ok(CommitRecord {
                    commit_id: commit.id().to_string(),
                    order_index,
                    timestamp: commit.time().seconds(),
                    lines_added: files_changed.iter().map(|f| f.added).sum(),
                    lines_deleted: files_changed.iter().map(|f| f.deleted).sum(),
                    files_changed,
                })
            })
            .collect()
    }

    fn diff_stats(&self, commit: &git2::Commit<'_>) -> Result<Vec<FileChange>, HistoryError> {
        let tree = commit.tree().map_err(|e| self.access(e))?;
        let parent_tree = match commit.parent_count() {
            0 => None,
            _ => Some(commit.parent(0).and_then(|p| p.tree()).map_err(|e| self.access(e))?),
        };
        let mut opts = DiffOptions::new();
        let diff = self
            .repo
            .diff_tree_to_tree(parent_tree.as_ref(), Some(&tree), Some(&mut opts))
            .map_err(|e| self.access(e))?;
        let mut out = Vec::new();
        for idx in 0..diff.deltas().len() {
            let delta = diff.get_delta(idx).expect("delta index in range");
            let path = delta
                .new_file()
                .path()
                .or_else(|| delta.old_file().path())
                .map(|p| p.to_string_lossy().replace('\\', "/"))
                .unwrap_or_default();
            let (added, deleted) = match Patch::from_diff(&diff, idx).map_err(|e| self.access(e))? {
                Some(patch) => {
                    let (_, a, d) = patch.line_stats().map_err(|e| self.access(e))?;
                    (a as u64, d as u64)
                }
                None => (0, 0),
            };
            out.push(FileChange { path, added, deleted });
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }

    /// Every `.java` blob in the commit's tree, sorted by path.
    pub fn java_sources(&self, commit_id: &str) -> Result<Vec<SourceBlob>, HistoryError> {
        let oid = Oid::from_str(commit_id).map_err(|e| self.access(e))?;
        let tree = self.repo.find_commit(oid).and_then(|c| c.tree()).map_err(|e| self.access(e))?;
        let mut entries = Vec::new();
        tree.walk(TreeWalkMode::PreOrder, |root, entry| {
            if entry.kind() == Some(git2::ObjectType::Blob) {
                if let Some(name) = entry.name() {
                    if name.ends_with(".java") {
                        entries.push((format!("{root}{name}"), entry.id()));
                    }
                }
            }
            TreeWalkResult::Ok
        })
        .map_err(|e| self.access(e))?;
        entries.sort();
        entries
            .into_iter()
            .map(|(path, id)| {
                let blob = self.repo.find_blob(id).map_err(|e| self.access(e))?;
                Ok(SourceBlob { path, oid: id.to_string(), content: blob.content().to_vec() })
            })
            .collect()
    }
}

/// Opens `repo` and walks `branch`; see [`GitRepo::walk_history`].
pub fn walk_history(repo: &Path, branch: &str, limits: &HistoryLimits) -> Result<Vec<CommitRecord>, HistoryError> {
    GitRepo::open(repo)?.walk_history(branch, limits)
}
