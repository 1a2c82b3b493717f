use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use super::{compute_churn, CommitRecord, CommitSnapshot, ResolvedLedger};
use crate::diag::Diagnostic;
use crate::error::HistoryError;
use crate::format::{round_sig6, sig6};
use crate::snapshot::Metric;

/// Direction of the active-bug count between two consecutive commits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BugDelta {
    Decrease,
    Stable,
    Increase,
}

impl BugDelta {
    pub const ALL: [BugDelta; 3] = [BugDelta::Decrease, BugDelta::Stable, BugDelta::Increase];

    pub fn as_str(self) -> &'static str {
        match self {
            BugDelta::Decrease => "decrease",
            BugDelta::Stable => "stable",
            BugDelta::Increase => "increase",
        }
    }
}

impl fmt::Display for BugDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BugDelta {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decrease" => Ok(BugDelta::Decrease),
            "stable" => Ok(BugDelta::Stable),
            "increase" => Ok(BugDelta::Increase),
            other => Err(format!("unknown bug-delta label {other:?}")),
        }
    }
}

/// Sign of `n_to − n_from`.
pub fn classify_bug_delta(n_from: usize, n_to: usize) -> BugDelta {
    match n_to.cmp(&n_from) {
        std::cmp::Ordering::Equal => BugDelta::Stable,
        std::cmp::Ordering::Greater => BugDelta::Increase,
        std::cmp::Ordering::Less => BugDelta::Decrease,
    }
}

/// One commit-to-commit transition.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub project: String,
    pub from_commit: String,
    pub to_commit: String,
    pub to_index: usize,
    pub n_classes: usize,
    /// Snapshot sums at `to_commit`, indexed by [`Metric::index`].
    pub sums: [u64; 10],
    pub means: [f64; 10],
    /// `to − from` of the reuse-metric sums.
    pub reuse_delta_sum: [i64; 3],
    pub reuse_delta_mean: [f64; 3],
    pub churn: u64,
    pub bugs_from: usize,
    pub bugs_to: usize,
    pub label: BugDelta,
}

impl PanelRow {
    pub fn level(&self, metric: Metric, mean: bool) -> f64 {
        if mean {
            self.means[metric.index()]
        } else {
            self.sums[metric.index()] as f64
        }
    }

    /// Delta of a reuse metric; `None` for CK metrics.
    pub fn reuse_delta(&self, metric: Metric, mean: bool) -> Option<f64> {
        let i = Metric::REUSE.iter().position(|&m| m == metric)?;
        Some(if mean { self.reuse_delta_mean[i] } else { self.reuse_delta_sum[i] as f64 })
    }

    fn cells(&self) -> Vec<Cell> {
        let mut cells = vec![
            Cell::Str(self.project.clone()),
            Cell::Str(self.from_commit.clone()),
            Cell::Str(self.to_commit.clone()),
            Cell::Int(self.to_index as i64),
            Cell::Int(self.n_classes as i64),
        ];
        cells.extend(self.sums.iter().map(|&s| Cell::Int(s as i64)));
        cells.extend(self.means.iter().map(|&m| Cell::Float(m)));
        cells.extend(self.reuse_delta_sum.iter().map(|&d| Cell::Int(d)));
        cells.extend(self.reuse_delta_mean.iter().map(|&d| Cell::Float(d)));
        cells.push(Cell::Int(self.churn as i64));
        cells.push(Cell::Int(self.bugs_from as i64));
        cells.push(Cell::Int(self.bugs_to as i64));
        cells.push(Cell::Str(self.label.as_str().into()));
        cells
    }
}

/// Panel column names, in output order.
pub fn panel_header() -> Vec<String> {
    let mut h: Vec<String> = ["project", "from_commit", "to_commit", "to_index", "n_classes"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(Metric::ALL.iter().map(|m| format!("{m}_sum")));
    h.extend(Metric::ALL.iter().map(|m| format!("{m}_mean")));
    h.extend(Metric::REUSE.iter().map(|m| format!("d_{m}_sum")));
    h.extend(Metric::REUSE.iter().map(|m| format!("d_{m}_mean")));
    h.extend(["churn", "bugs_from", "bugs_to", "bug_delta"].iter().map(|s| s.to_string()));
    h
}

enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => sig6(*f),
        }
    }
}

struct JsonRow<'a> {
    header: &'a [String],
    cells: Vec<Cell>,
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.cells.len()))?;
        for (k, c) in self.header.iter().zip(&self.cells) {
            match c {
                Cell::Str(s) => map.serialize_entry(k, s)?,
                Cell::Int(i) => map.serialize_entry(k, i)?,
                Cell::Float(f) => map.serialize_entry(k, &round_sig6(*f))?,
            }
        }
        map.end()
    }
}

/// Builds one row per consecutive commit pair. Pairs where either side
/// lacks a snapshot are skipped with one diagnostic each.
pub fn assemble_panel(
    project: &str,
    commits: &[CommitRecord],
    snapshots: &[Option<CommitSnapshot>],
    ledger: &ResolvedLedger,
) -> (Vec<PanelRow>, Vec<Diagnostic>) {
    let mut rows = Vec::new();
    let mut diags = Vec::new();
    for (i, pair) in commits.windows(2).enumerate() {
        let (from, to) = (&pair[0], &pair[1]);
        let (Some(Some(a)), Some(Some(b))) = (snapshots.get(i), snapshots.get(i + 1)) else {
            let missing = if snapshots.get(i).map_or(true, Option::is_none) { from } else { to };
            diags.push(Diagnostic::warning(
                Some(&to.commit_id),
                format!("SnapshotMissing: row {}..{} skipped, no snapshot for {}", from.commit_id, to.commit_id, missing.commit_id),
            ));
            continue;
        };
        let (a, b) = (&a.aggregate, &b.aggregate);
        let bugs_from = ledger.active_at(from.order_index);
        let bugs_to = ledger.active_at(to.order_index);
        let mut reuse_delta_sum = [0i64; 3];
        let mut reuse_delta_mean = [0f64; 3];
        for (k, m) in Metric::REUSE.iter().enumerate() {
            reuse_delta_sum[k] = b.sum(*m) as i64 - a.sum(*m) as i64;
            reuse_delta_mean[k] = b.mean(*m) - a.mean(*m);
        }
        rows.push(PanelRow {
            project: project.to_string(),
            from_commit: from.commit_id.clone(),
            to_commit: to.commit_id.clone(),
            to_index: to.order_index,
            n_classes: b.n_classes,
            sums: b.sums,
            means: b.means,
            reuse_delta_sum,
            reuse_delta_mean,
            churn: compute_churn(to),
            bugs_from,
            bugs_to,
            label: classify_bug_delta(bugs_from, bugs_to),
        });
    }
    (rows, diags)
}

pub fn write_panel_csv<W: Write>(rows: &[PanelRow], writer: W) -> Result<(), HistoryError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(panel_header())?;
    for r in rows {
        w.write_record(r.cells().iter().map(Cell::render))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_panel_jsonl<W: Write>(rows: &[PanelRow], mut writer: W) -> Result<(), HistoryError> {
    let header = panel_header();
    for r in rows {
        serde_json::to_writer(&mut writer, &JsonRow { header: &header, cells: r.cells() })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

struct Columns {
    index: std::collections::HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        Self { index: headers.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect() }
    }

    fn get<'r>(&self, rec: &'r csv::StringRecord, name: &str) -> Result<&'r str, HistoryError> {
        self.index
            .get(name)
            .and_then(|&i| rec.get(i))
            .ok_or_else(|| HistoryError::PanelFormat(format!("missing column {name}")))
    }

    fn parse<T: FromStr>(&self, rec: &csv::StringRecord, name: &str) -> Result<T, HistoryError> {
        let raw = self.get(rec, name)?;
        raw.parse().map_err(|_| HistoryError::PanelFormat(format!("bad value {raw:?} in column {name}")))
    }
}

pub fn read_panel_csv<R: Read>(reader: R) -> Result<Vec<PanelRow>, HistoryError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let cols = Columns::new(rdr.headers()?);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut sums = [0u64; 10];
        let mut means = [0f64; 10];
        for m in Metric::ALL {
            sums[m.index()] = cols.parse(&rec, &format!("{m}_sum"))?;
            means[m.index()] = cols.parse(&rec, &format!("{m}_mean"))?;
        }
        let mut reuse_delta_sum = [0i64; 3];
        let mut reuse_delta_mean = [0f64; 3];
        for (k, m) in Metric::REUSE.iter().enumerate() {
            reuse_delta_sum[k] = cols.parse(&rec, &format!("d_{m}_sum"))?;
            reuse_delta_mean[k] = cols.parse(&rec, &format!("d_{m}_mean"))?;
        }
        let label_raw = cols.get(&rec, "bug_delta")?;
        rows.push(PanelRow {
            project: cols.get(&rec, "project")?.to_string(),
            from_commit: cols.get(&rec, "from_commit")?.to_string(),
            to_commit: cols.get(&rec, "to_commit")?.to_string(),
            to_index: cols.parse(&rec, "to_index")?,
            n_classes: cols.parse(&rec, "n_classes")?,
            sums,
            means,
            reuse_delta_sum,
            reuse_delta_mean,
            churn: cols.parse(&rec, "churn")?,
            bugs_from: cols.parse(&rec, "bugs_from")?,
            bugs_to: cols.parse(&rec, "bugs_to")?,
            label: label_raw.parse().map_err(HistoryError::PanelFormat)?,
        });
    }
    Ok(rows)
}

/// Per-commit metric values, used for trend analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub order_index: usize,
    pub commit_id: String,
    pub timestamp: i64,
    pub n_classes: usize,
    pub churn: u64,
    pub active_bugs: usize,
    pub sums: [u64; 10],
    pub means: [f64; 10],
}

impl SeriesRow {
    pub fn value(&self, metric: Metric, mean: bool) -> f64 {
        if mean {
            self.means[metric.index()]
        } else {
            self.sums[metric.index()] as f64
        }
    }
}

/// Series rows for every commit with a snapshot.
pub fn series_rows(
    commits: &[CommitRecord],
    snapshots: &[Option<CommitSnapshot>],
    ledger: &ResolvedLedger,
) -> Vec<SeriesRow> {
    commits
        .iter()
        .zip(snapshots)
        .filter_map(|(c, s)| {
            let s = s.as_ref()?;
            Some(SeriesRow {
                order_index: c.order_index,
                commit_id: c.commit_id.clone(),
                timestamp: c.timestamp,
                n_classes: s.aggregate.n_classes,
                churn: compute_churn(c),
                active_bugs: ledger.active_at(c.order_index),
                sums: s.aggregate.sums,
                means: s.aggregate.means,
            })
        })
        .collect()
}

pub fn series_header() -> Vec<String> {
    let mut h: Vec<String> = ["order_index", "commit_id", "timestamp", "n_classes", "churn", "active_bugs"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(Metric::ALL.iter().map(|m| format!("{m}_sum")));
    h.extend(Metric::ALL.iter().map(|m| format!("{m}_mean")));
    h
}

pub fn write_series_csv<W: Write>(rows: &[SeriesRow], writer: W) -> Result<(), HistoryError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(series_header())?;
    for r in rows {
        let mut rec = vec![
            r.order_index.to_string(),
            r.commit_id.clone(),
            r.timestamp.to_string(),
            r.n_classes.to_string(),
            r.churn.to_string(),
            r.active_bugs.to_string(),
        ];
        rec.extend(r.sums.iter().map(u64::to_string));
        rec.extend(r.means.iter().map(|&m| sig6(m)));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv<R: Read>(reader: R) -> Result<Vec<SeriesRow>, HistoryError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let cols = Columns::new(rdr.headers()?);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let mut sums = [0u64; 10];
        let mut means = [0f64; 10];
        for m in Metric::ALL {
            sums[m.index()] = cols.parse(&rec, &format!("{m}_sum"))?;
            means[m.index()] = cols.parse(&rec, &format!("{m}_mean"))?;
        }
        rows.push(SeriesRow {
            order_index: cols.parse(&rec, "order_index")?,
            commit_id: cols.get(&rec, "commit_id")?.to_string(),
            timestamp: cols.parse(&rec, "timestamp")?,
            n_classes: cols.parse(&rec, "n_classes")?,
            churn: cols.parse(&rec, "churn")?,
            active_bugs: cols.parse(&rec, "active_bugs")?,
            sums,
            means,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snapshot::SnapshotAggregate;

    #[test]
    fn labels() {
        assert_eq!(classify_bug_delta(3, 3), BugDelta::Stable);
        assert_eq!(classify_bug_delta(3, 5), BugDelta::Increase);
        assert_eq!(classify_bug_delta(1, 0), BugDelta::Decrease);
    }

    fn commit(i: usize, java_lines: u64) -> CommitRecord {
        CommitRecord {
            commit_id: format!("c{i}"),
            order_index: i,
            timestamp: 100 + i as i64,
            files_changed: vec![super::super::FileChange { path: "A.java".into(), added: java_lines, deleted: 1 }],
            lines_added: java_lines,
            lines_deleted: 1,
        }
    }

    fn snap(spec: u64, classes: usize) -> Option<CommitSnapshot> {
        let mut sums = [0u64; 10];
        sums[0] = spec;
        let means = sums.map(|s| s as f64 / classes as f64);
        Some(CommitSnapshot {
            aggregate: SnapshotAggregate { n_classes: classes, sums, means },
            java_files: 1,
            skipped_files: 0,
        })
    }

    #[test]
    fn rows_pair_consecutive_commits_and_skip_missing() {
        let commits: Vec<_> = (0..5).map(|i| commit(i, i as u64)).collect();
        let snaps = vec![snap(1, 2), snap(2, 2), None, snap(2, 3), snap(3, 3)];
        let (rows, diags) = assemble_panel("p", &commits, &snaps, &ResolvedLedger::default());
        assert_eq!(rows.len(), 2);
        assert_eq!(diags.len(), 2);
        assert_eq!(rows.len() + diags.len(), commits.len() - 1);
        assert_eq!(rows[0].reuse_delta_sum[0], 1);
        assert_eq!(rows[1].to_commit, "c4");
        assert_eq!(rows[1].churn, 5);
    }

    #[test]
    fn csv_round_trip_keeps_values_at_six_digits() {
        let commits: Vec<_> = (0..3).map(|i| commit(i, 2)).collect();
        let snaps = vec![snap(1, 3), snap(2, 3), snap(4, 3)];
        let (rows, _) = assemble_panel("proj", &commits, &snaps, &ResolvedLedger::default());
        let mut buf = Vec::new();
        write_panel_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",0.666667,"));
        let back = read_panel_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].sums, rows[1].sums);
        assert_eq!(back[1].means[0], 1.33333);
        assert_eq!(back[1].label, rows[1].label);
    }

    #[test]
    fn jsonl_is_ordered_and_rounded() {
        let commits: Vec<_> = (0..2).map(|i| commit(i, 2)).collect();
        let snaps = vec![snap(1, 3), snap(2, 3)];
        let (rows, _) = assemble_panel("proj", &commits, &snaps, &ResolvedLedger::default());
        let mut buf = Vec::new();
        write_panel_jsonl(&rows, &mut buf).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert!(line.starts_with("{\"project\":\"proj\",\"from_commit\":\"c0\""));
        assert!(line.contains("\"spec_inheritance_mean\":0.666667"));
        assert!(line.ends_with("\"bug_delta\":\"stable\"}\n"));
    }
}
