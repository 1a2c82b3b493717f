use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reuselens_cli::{execute, Command, Overrides, RunConfig, SynthKind};
use reuselens_core::DelegationScope;
use reuselens_stats::{Aggregation, GlmFamily, PredictorForm};

#[derive(Parser)]
#[command(name = "reuselens", version, about = "Reuse-mechanism metrics and defect/churn models for Java histories")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Sub {
    /// Measure one source tree
    Scan,
    /// Walk the history and build the commit panel
    Mine,
    /// Screen collinearity and fit the bug-delta and churn models
    Fit,
    /// Trend statistics, charts and the reuse/defect co-occurrence table
    Report,
    /// mine, fit and report
    All,
    /// Generate synthetic inputs
    Synth {
        #[arg(long, value_enum, default_value = "repo")]
        kind: Kind,
        /// Panel rows for `--kind panel`
        #[arg(long, default_value_t = 5000)]
        rows: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Repo,
    Panel,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    FieldsAndLocals,
    FieldsOnly,
}

#[derive(Args)]
struct Flags {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    repo: Option<PathBuf>,
    #[arg(long, global = true)]
    branch: Option<String>,
    #[arg(long, global = true)]
    project: Option<String>,
    /// `from..to`
    #[arg(long, global = true)]
    range: Option<String>,
    /// Analyze only the newest N commits
    #[arg(long, global = true)]
    last: Option<usize>,
    #[arg(long, global = true)]
    ledger: Option<PathBuf>,
    /// Bug ids to drop from the ledger, one per line
    #[arg(long, global = true)]
    exclusions: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// sum | mean
    #[arg(long, global = true)]
    aggregation: Option<Aggregation>,
    /// levels | deltas
    #[arg(long, global = true)]
    predictor_form: Option<PredictorForm>,
    #[arg(long, global = true, value_enum)]
    delegation_scope: Option<Scope>,
    /// gaussian | poisson
    #[arg(long, global = true)]
    glm_family: Option<GlmFamily>,
    #[arg(long, global = true)]
    vif_threshold: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let f = cli.flags;
    let mut config = match &f.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error {e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    config.apply(Overrides {
        repo_path: f.repo,
        branch: f.branch,
        project: f.project,
        commit_range: f.range,
        last: f.last,
        bug_ledger_path: f.ledger,
        exclusion_list_path: f.exclusions,
        aggregation: f.aggregation,
        predictor_form: f.predictor_form,
        delegation_scope: f.delegation_scope.map(|s| match s {
            Scope::FieldsAndLocals => DelegationScope::FieldsAndLocals,
            Scope::FieldsOnly => DelegationScope::FieldsOnly,
        }),
        glm_family: f.glm_family,
        vif_threshold: f.vif_threshold,
        output_dir: f.out,
        seed: f.seed,
    });
    let command = match cli.command {
        Sub::Scan => Command::Scan,
        Sub::Mine => Command::Mine,
        Sub::Fit => Command::Fit,
        Sub::Report => Command::Report,
        Sub::All => Command::All,
        Sub::Synth { kind, rows } => Command::Synth {
            kind: match kind {
                Kind::Repo => SynthKind::Repo,
                Kind::Panel => SynthKind::Panel,
            },
            rows,
        },
    };

    let outcome = execute(command, &config);
    for d in &outcome.diagnostics {
        eprintln!("{d}");
    }
    let errors = outcome.errors().count();
    println!(
        "{}: {} error(s), {} warning(s); output in {}",
        command.name(),
        errors,
        outcome.diagnostics.len() - errors,
        outcome.output_dir.display()
    );
    ExitCode::from(outcome.exit_code)
}
