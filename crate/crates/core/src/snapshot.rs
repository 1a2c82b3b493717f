//! Per-class metric records for one snapshot and their commit-level
//! aggregation.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::ck::{compute_ck, CKVector};
use crate::error::ModelError;
use crate::graph::TypeGraph;
use crate::java::parse_compilation_unit;
use crate::model::{CompilationUnitModel, TypeKind};
use crate::reuse::{reuse_vector, MetricsConfig, ReuseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    SpecInheritance,
    ImplInheritance,
    Delegation,
    Dit,
    Noc,
    Loc,
    Lcom,
    Wmc,
    Rfc,
    Cbo,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::SpecInheritance,
        Metric::ImplInheritance,
        Metric::Delegation,
        Metric::Dit,
        Metric::Noc,
        Metric::Loc,
        Metric::Lcom,
        Metric::Wmc,
        Metric::Rfc,
        Metric::Cbo,
    ];

    pub const REUSE: [Metric; 3] = [Metric::SpecInheritance, Metric::ImplInheritance, Metric::Delegation];

    pub fn name(self) -> &'static str {
        match self {
            Metric::SpecInheritance => "spec_inheritance",
            Metric::ImplInheritance => "impl_inheritance",
            Metric::Delegation => "delegation",
            Metric::Dit => "dit",
            Metric::Noc => "noc",
            Metric::Loc => "loc",
            Metric::Lcom => "lcom",
            Metric::Wmc => "wmc",
            Metric::Rfc => "rfc",
            Metric::Cbo => "cbo",
        }
    }

    pub fn index(self) -> usize {
        Metric::ALL.iter().position(|&m| m == self).unwrap_or(0)
    }

    pub fn is_reuse(self) -> bool {
        Metric::REUSE.contains(&self)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMetricsRecord {
    pub class_name: String,
    pub path: String,
    pub kind: TypeKind,
    pub reuse: ReuseVector,
    pub ck: CKVector,
}

impl ClassMetricsRecord {
    pub fn value(&self, metric: Metric) -> usize {
        match metric {
            Metric::SpecInheritance => self.reuse.spec_inheritance,
            Metric::ImplInheritance => self.reuse.impl_inheritance,
            Metric::Delegation => self.reuse.delegation,
            Metric::Dit => self.ck.dit,
            Metric::Noc => self.ck.noc,
            Metric::Loc => self.ck.loc,
            Metric::Lcom => self.ck.lcom,
            Metric::Wmc => self.ck.wmc,
            Metric::Rfc => self.ck.rfc,
            Metric::Cbo => self.ck.cbo,
        }
    }
}

/// Metrics for every type in the graph, ordered by qualified name.
pub fn compute_snapshot(graph: &TypeGraph, config: &MetricsConfig) -> Vec<ClassMetricsRecord> {
    let decls: Vec<_> = graph.types.values().collect();
    decls
        .par_iter()
        .map(|decl| ClassMetricsRecord {
            class_name: decl.qualified_name.clone(),
            path: graph.path_of(&decl.qualified_name).unwrap_or_default().to_string(),
            kind: decl.kind,
            reuse: reuse_vector(decl, graph, config),
            ck: compute_ck(decl, graph),
        })
        .collect()
}

/// Commit-level sums and per-class means of every metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotAggregate {
    pub n_classes: usize,
    pub sums: [u64; 10],
    pub means: [f64; 10],
}

impl SnapshotAggregate {
    pub fn from_records(records: &[ClassMetricsRecord]) -> Self {
        let mut sums = [0u64; 10];
        for r in records {
            for m in Metric::ALL {
                sums[m.index()] += r.value(m) as u64;
            }
        }
        let n = records.len();
        let means = sums.map(|s| if n == 0 { 0.0 } else { s as f64 / n as f64 });
        Self { n_classes: n, sums, means }
    }

    pub fn sum(&self, metric: Metric) -> u64 {
        self.sums[metric.index()]
    }

    pub fn mean(&self, metric: Metric) -> f64 {
        self.means[metric.index()]
    }
}

/// Parses every `.java` file under `root` (sorted by path) and returns the
/// units; any parse failure aborts.
pub fn parse_tree(root: &Path) -> Result<Vec<CompilationUnitModel>, ScanError> {
    let mut files: Vec<_> = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "java"))
        .map(|e| e.into_path())
        .collect();
    files.sort();
    files
        .par_iter()
        .map(|p| {
            let rel = p.strip_prefix(root).unwrap_or(p).to_string_lossy().replace('\\', "/");
            let text = std::fs::read(p).map_err(|e| ScanError::Io(format!("{}: {e}", p.display())))?;
            parse_compilation_unit(&String::from_utf8_lossy(&text), &rel).map_err(ScanError::Model)
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Single-snapshot scan of a source tree.
pub fn scan_tree(root: &Path, config: &MetricsConfig) -> Result<Vec<ClassMetricsRecord>, ScanError> {
    let units = parse_tree(root)?;
    let graph = TypeGraph::build(&units)?;
    Ok(compute_snapshot(&graph, config))
}
