use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CommitRecord;
use crate::diag::Diagnostic;
use crate::error::HistoryError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugEntry {
    pub bug_id: String,
    pub introducing_commit: Option<String>,
    pub fixing_commit: String,
}

/// Known bugs with their introducing and fixing commits.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugLedger {
    pub entries: Vec<BugEntry>,
}

const ID_COLUMNS: &[&str] = &["bug_id", "bug.id"];
const INTRODUCING_COLUMNS: &[&str] = &["introducing_commit", "revision.id.buggy"];
const FIXING_COLUMNS: &[&str] = &["fixing_commit", "revision.id.fixed"];

impl BugLedger {
    /// Reads `bug_id,introducing_commit,fixing_commit` CSV. Defects4J
    /// `active-bugs.csv` headers are accepted too, with the buggy revision
    /// standing in for the introducing commit.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, HistoryError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let find = |names: &[&str]| headers.iter().position(|h| names.contains(&h));
        let (Some(id_col), Some(fix_col)) = (find(ID_COLUMNS), find(FIXING_COLUMNS)) else {
            return Err(HistoryError::LedgerSyntax(format!(
                "expected header bug_id,introducing_commit,fixing_commit, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        };
        let intro_col = find(INTRODUCING_COLUMNS);

        let mut entries = Vec::new();
        let mut ids = BTreeSet::new();
        for record in rdr.records() {
            let record = record?;
            let bug_id = record.get(id_col).unwrap_or("").to_string();
            if bug_id.is_empty() {
                return Err(HistoryError::LedgerSyntax(format!(
                    "empty bug_id on line {}",
                    record.position().map(|p| p.line()).unwrap_or(0)
                )));
            }
            if !ids.insert(bug_id.clone()) {
                return Err(HistoryError::LedgerFormat { bug_id, message: "listed more than once".into() });
            }
            let fixing_commit = record.get(fix_col).unwrap_or("").to_string();
            if fixing_commit.is_empty() {
                return Err(HistoryError::LedgerFormat { bug_id, message: "missing fixing_commit".into() });
            }
            let introducing_commit =
                intro_col.and_then(|c| record.get(c)).filter(|s| !s.is_empty()).map(str::to_string);
            entries.push(BugEntry { bug_id, introducing_commit, fixing_commit });
        }
        Ok(Self { entries })
    }

    pub fn from_path(path: &Path) -> Result<Self, HistoryError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), HistoryError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bug_id", "introducing_commit", "fixing_commit"])?;
        for e in &self.entries {
            w.write_record([e.bug_id.as_str(), e.introducing_commit.as_deref().unwrap_or(""), e.fixing_commit.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Drops the listed bugs.
    pub fn without(&self, excluded: &BTreeSet<String>) -> Self {
        Self { entries: self.entries.iter().filter(|e| !excluded.contains(&e.bug_id)).cloned().collect() }
    }

    /// Maps commit identifiers onto positions of the analyzed sequence.
    ///
    /// Identifiers match exactly or as a unique prefix. A fixing commit
    /// outside the sequence, or an introducing commit that does not
    /// precede its fix, is a [`HistoryError::LedgerFormat`]. An
    /// introducing commit outside the sequence is treated as unknown (the
    /// bug is active from the first analyzed commit) with a warning.
    pub fn resolve(&self, commits: &[CommitRecord]) -> Result<(ResolvedLedger, Vec<Diagnostic>), HistoryError> {
        let mut diags = Vec::new();
        let mut bugs = Vec::new();
        for e in &self.entries {
            let fixing = find_commit(commits, &e.fixing_commit).ok_or_else(|| HistoryError::LedgerFormat {
                bug_id: e.bug_id.clone(),
                message: format!("fixing commit {} is not in the analyzed range", e.fixing_commit),
            })?;
            let introducing = match &e.introducing_commit {
                None => None,
                Some(id) => match find_commit(commits, id) {
                    Some(i) if i < fixing => Some(i),
                    Some(_) => {
                        return Err(HistoryError::LedgerFormat {
                            bug_id: e.bug_id.clone(),
                            message: format!("introducing commit {id} does not precede fixing commit {}", e.fixing_commit),
                        })
                    }
                    None => {
                        diags.push(Diagnostic::warning(
                            None,
                            format!("bug {}: introducing commit {id} outside analyzed range; active from start", e.bug_id),
                        ));
                        None
                    }
                },
            };
            bugs.push(ResolvedBug { bug_id: e.bug_id.clone(), introducing, fixing });
        }
        Ok((ResolvedLedger { bugs, commit_ids: commits.iter().map(|c| c.commit_id.clone()).collect() }, diags))
    }
}

fn find_commit(commits: &[CommitRecord], id: &str) -> Option<usize> {
    if let Some(c) = commits.iter().find(|c| c.commit_id == id) {
        return Some(c.order_index);
    }
    if id.len() < 4 {
        return None;
    }
    let mut matches = commits.iter().filter(|c| c.commit_id.starts_with(id));
    match (matches.next(), matches.next()) {
        (Some(c), None) => Some(c.order_index),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedBug {
    pub bug_id: String,
    pub introducing: Option<usize>,
    pub fixing: usize,
}

impl ResolvedBug {
    /// Half-open activity interval `[introducing, fixing)`.
    pub fn active_at(&self, order_index: usize) -> bool {
        self.introducing.unwrap_or(0) <= order_index && order_index < self.fixing
    }
}

/// A ledger bound to one analyzed commit sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedLedger {
    pub bugs: Vec<ResolvedBug>,
    pub commit_ids: Vec<String>,
}

impl ResolvedLedger {
    pub fn active_at(&self, order_index: usize) -> usize {
        self.bugs.iter().filter(|b| b.active_at(order_index)).count()
    }

    /// Bugs whose introducing commit is at `order_index`.
    pub fn introduced_at(&self, order_index: usize) -> Vec<&str> {
        self.bugs.iter().filter(|b| b.introducing == Some(order_index)).map(|b| b.bug_id.as_str()).collect()
    }

    pub fn is_defect_inducing(&self, order_index: usize) -> bool {
        self.bugs.iter().any(|b| b.introducing == Some(order_index))
    }
}

/// Active bugs at `commit`, which must belong to the ledger's sequence.
pub fn active_bug_count(ledger: &ResolvedLedger, commit: &CommitRecord) -> Result<usize, HistoryError> {
    match ledger.commit_ids.get(commit.order_index) {
        Some(id) if *id == commit.commit_id => Ok(ledger.active_at(commit.order_index)),
        _ => Err(HistoryError::UnknownCommit(commit.commit_id.clone())),
    }
}

/// Bug ids listed one per line; blank lines and `#` comments are ignored.
pub fn read_exclusion_list(path: &Path) -> Result<BTreeSet<String>, HistoryError> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn commits(n: usize) -> Vec<CommitRecord> {
        (0..n)
            .map(|i| CommitRecord {
                commit_id: format!("c{i}"),
                order_index: i,
                timestamp: i as i64,
                files_changed: vec![],
                lines_added: 0,
                lines_deleted: 0,
            })
            .collect()
    }

    fn ledger(csv: &str) -> BugLedger {
        BugLedger::from_reader(csv.as_bytes()).unwrap()
    }

    #[test]
    fn half_open_interval() {
        let cs = commits(8);
        let (l, _) = ledger("bug_id,introducing_commit,fixing_commit\nb1,c2,c5\n").resolve(&cs).unwrap();
        assert_eq!(active_bug_count(&l, &cs[3]).unwrap(), 1);
        assert_eq!(active_bug_count(&l, &cs[5]).unwrap(), 0);
        assert_eq!(active_bug_count(&l, &cs[1]).unwrap(), 0);
        assert_eq!(active_bug_count(&l, &cs[2]).unwrap(), 1);
    }

    #[test]
    fn overlapping_bugs() {
        let cs = commits(8);
        let (l, _) =
            ledger("bug_id,introducing_commit,fixing_commit\nb1,c2,c5\nb2,c3,c7\nb3,c5,c6\n").resolve(&cs).unwrap();
        assert_eq!(active_bug_count(&l, &cs[4]).unwrap(), 2);
    }

    #[test]
    fn unknown_introduction_is_active_from_start() {
        let cs = commits(4);
        let (l, _) = ledger("bug_id,introducing_commit,fixing_commit\nb1,,c2\n").resolve(&cs).unwrap();
        assert_eq!(l.active_at(0), 1);
        assert_eq!(l.active_at(2), 0);
    }

    #[test]
    fn fixing_commit_out_of_range_names_bug() {
        let cs = commits(3);
        let err = ledger("bug_id,introducing_commit,fixing_commit\nB-7,c0,zzzz\n").resolve(&cs).unwrap_err();
        assert!(matches!(err, HistoryError::LedgerFormat { ref bug_id, .. } if bug_id == "B-7"), "{err}");
    }

    #[test]
    fn introduction_after_fix_rejected() {
        let cs = commits(5);
        let err = ledger("bug_id,introducing_commit,fixing_commit\nb,c4,c2\n").resolve(&cs).unwrap_err();
        assert!(matches!(err, HistoryError::LedgerFormat { .. }));
    }

    #[test]
    fn unknown_commit_query() {
        let cs = commits(3);
        let (l, _) = ledger("bug_id,introducing_commit,fixing_commit\n").resolve(&cs).unwrap();
        let mut stranger = cs[1].clone();
        stranger.commit_id = "elsewhere".into();
        assert!(matches!(active_bug_count(&l, &stranger), Err(HistoryError::UnknownCommit(_))));
    }

    #[test]
    fn defects4j_header_and_prefix_ids() {
        let mut cs = commits(3);
        cs[0].commit_id = "aaaa1111".into();
        cs[2].commit_id = "bbbb2222".into();
        let l = ledger("bug.id,revision.id.buggy,revision.id.fixed,report.id,report.url\n1,aaaa1111,bbbb,X-1,http://x\n");
        let (r, _) = l.resolve(&cs).unwrap();
        assert_eq!(r.bugs[0], ResolvedBug { bug_id: "1".into(), introducing: Some(0), fixing: 2 });
    }

    #[test]
    fn exclusion_drops_bugs() {
        let l = ledger("bug_id,introducing_commit,fixing_commit\nb1,c0,c1\nb2,c0,c2\n");
        let kept = l.without(&BTreeSet::from(["b1".to_string()]));
        assert_eq!(kept.entries.len(), 1);
        assert_eq!(kept.entries[0].bug_id, "b2");
    }
}
