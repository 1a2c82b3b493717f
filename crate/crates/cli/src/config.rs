use std::path::{Path, PathBuf};

use reuselens_core::history::HistoryLimits;
use reuselens_core::{DelegationScope, MetricsConfig, SpecSeed};
use reuselens_stats::{Aggregation, GlmFamily, PredictorForm};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Effective settings of one run: the config file with flag overrides
/// applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub repo_path: Option<PathBuf>,
    pub branch: String,
    pub project: Option<String>,
    /// `from..to`, either side optional.
    pub commit_range: Option<String>,
    /// Keep only the newest N commits of the range.
    pub last: Option<usize>,
    pub bug_ledger_path: Option<PathBuf>,
    pub exclusion_list_path: Option<PathBuf>,
    pub aggregation: Aggregation,
    pub predictor_form: PredictorForm,
    pub delegation_scope: DelegationScope,
    pub spec_seed: SpecSeed,
    pub glm_family: GlmFamily,
    pub vif_threshold: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Additional panel CSVs fitted together with this run's panel, with
    /// project indicator columns.
    pub pooled_panels: Vec<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            repo_path: None,
            branch: "HEAD".into(),
            project: None,
            commit_range: None,
            last: None,
            bug_ledger_path: None,
            exclusion_list_path: None,
            aggregation: Aggregation::Sum,
            predictor_form: PredictorForm::Levels,
            delegation_scope: DelegationScope::FieldsAndLocals,
            spec_seed: SpecSeed::OwnClause,
            glm_family: GlmFamily::Gaussian,
            vif_threshold: 10.0,
            output_dir: PathBuf::from("reuselens-out"),
            seed: 0,
            pooled_panels: Vec::new(),
        }
    }
}

/// Flag values that replace config-file settings when present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub repo_path: Option<PathBuf>,
    pub branch: Option<String>,
    pub project: Option<String>,
    pub commit_range: Option<String>,
    pub last: Option<usize>,
    pub bug_ledger_path: Option<PathBuf>,
    pub exclusion_list_path: Option<PathBuf>,
    pub aggregation: Option<Aggregation>,
    pub predictor_form: Option<PredictorForm>,
    pub delegation_scope: Option<DelegationScope>,
    pub glm_family: Option<GlmFamily>,
    pub vif_threshold: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set_opt {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f; } )* };
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        set_opt!(repo_path, project, commit_range, last, bug_ledger_path, exclusion_list_path);
        set!(branch, aggregation, predictor_form, delegation_scope, glm_family, vif_threshold, output_dir, seed);
    }

    /// Checks the invariants; `needs_repo` requires an existing `repo_path`.
    pub fn validate(&self, needs_repo: bool) -> Result<(), CliError> {
        if !(self.vif_threshold > 1.0) {
            return Err(CliError::Config(format!("vif_threshold must exceed 1, got {}", self.vif_threshold)));
        }
        if needs_repo {
            match &self.repo_path {
                None => return Err(CliError::Config("repo_path is required (--repo)".into())),
                Some(p) if !p.exists() => {
                    return Err(CliError::Config(format!("repo_path {} does not exist", p.display())))
                }
                _ => {}
            }
        }
        let inputs = self.bug_ledger_path.iter().chain(&self.exclusion_list_path).chain(&self.pooled_panels);
        for p in inputs {
            if !p.is_file() {
                return Err(CliError::Config(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn metrics(&self) -> MetricsConfig {
        MetricsConfig { spec_seed: self.spec_seed, delegation_scope: self.delegation_scope }
    }

    pub fn limits(&self) -> HistoryLimits {
        let mut l = self.commit_range.as_deref().map(HistoryLimits::parse_range).unwrap_or_default();
        l.last = self.last;
        l
    }

    /// Explicit project name, else the repository directory name.
    pub fn project_name(&self) -> String {
        if let Some(p) = &self.project {
            return p.clone();
        }
        self.repo_path
            .as_ref()
            .and_then(|p| p.canonicalize().ok().or_else(|| Some(p.clone())))
            .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "project".into())
    }
}
