//! Syntactic analysis of Java reuse mechanisms and CK metrics, plus mining
//! of those metrics across a repository's commit history.

pub mod ck;
pub mod diag;
pub mod error;
pub mod format;
pub mod graph;
pub mod history;
pub mod java;
pub mod model;
pub mod reuse;
pub mod snapshot;
pub mod synthetic;

pub use ck::{compute_ck, compute_ck_with, CKVector, CkOptions};
pub use diag::{Diagnostic, Severity};
pub use error::{HistoryError, ModelError};
pub use graph::{TypeGraph, TypeRef};
pub use java::parse_compilation_unit;
pub use model::{CompilationUnitModel, TypeDecl, TypeKind};
pub use reuse::{reuse_vector, DelegationScope, MetricsConfig, ReuseVector, SpecSeed};
pub use snapshot::{compute_snapshot, scan_tree, ClassMetricsRecord, Metric, ScanError, SnapshotAggregate};
