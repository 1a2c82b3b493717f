use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{CommitRecord, GitRepo};
use crate::diag::Diagnostic;
use crate::graph::TypeGraph;
use crate::java::parse_compilation_unit;
use crate::model::CompilationUnitModel;
use crate::reuse::MetricsConfig;
use crate::snapshot::{compute_snapshot, SnapshotAggregate};

/// Metrics of one commit's source tree.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitSnapshot {
    pub aggregate: SnapshotAggregate,
    pub java_files: usize,
    pub skipped_files: usize,
}

type ParseOutcome = Result<Arc<CompilationUnitModel>, String>;

/// Parses and measures every commit. Unparseable files are skipped with a
/// diagnostic (once per blob); a commit whose type graph cannot be built
/// has no snapshot. Unchanged blobs are parsed once.
pub fn mine_snapshots(
    repo: &GitRepo,
    commits: &[CommitRecord],
    config: &MetricsConfig,
) -> (Vec<Option<CommitSnapshot>>, Vec<Diagnostic>) {
    let mut cache: HashMap<(String, String), ParseOutcome> = HashMap::new();
    let mut diags = Vec::new();
    let mut out = Vec::with_capacity(commits.len());

    for commit in commits {
        let id = commit.commit_id.as_str();
        let blobs = match repo.java_sources(id) {
            Ok(b) => b,
            Err(e) => {
                diags.push(Diagnostic::error(Some(id), format!("cannot read tree: {e}")));
                out.push(None);
                continue;
            }
        };

        let fresh: Vec<_> = blobs.iter().filter(|b| !cache.contains_key(&(b.oid.clone(), b.path.clone()))).collect();
        let parsed: Vec<((String, String), ParseOutcome)> = fresh
            .par_iter()
            .map(|b| {
                let text = String::from_utf8_lossy(&b.content);
                let outcome = parse_compilation_unit(&text, &b.path).map(Arc::new).map_err(|e| e.to_string());
                ((b.oid.clone(), b.path.clone()), outcome)
            })
            .collect();
        for (key, outcome) in parsed {
            if let Err(msg) = &outcome {
                diags.push(Diagnostic::warning(Some(id), format!("skipped unparseable file: {msg}")));
            }
            cache.insert(key, outcome);
        }

        let mut skipped = 0;
        let units: Vec<Arc<CompilationUnitModel>> = blobs
            .iter()
            .filter_map(|b| match &cache[&(b.oid.clone(), b.path.clone())] {
                Ok(u) => Some(Arc::clone(u)),
                Err(_) => {
                    skipped += 1;
                    None
                }
            })
            .collect();

        match TypeGraph::build(units.iter().map(|u| u.as_ref())) {
            Ok(graph) => {
                let records = compute_snapshot(&graph, config);
                out.push(Some(CommitSnapshot {
                    aggregate: SnapshotAggregate::from_records(&records),
                    java_files: blobs.len(),
                    skipped_files: skipped,
                }));
            }
            Err(e) => {
                diags.push(Diagnostic::error(Some(id), format!("snapshot unavailable: {e}")));
                out.push(None);
            }
        }
    }
    (out, diags)
}
