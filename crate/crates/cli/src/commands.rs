use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use reuselens_core::diag::Severity;
use reuselens_core::format::sig6;
use reuselens_core::history::{
    assemble_panel, compute_churn, mine_snapshots, read_exclusion_list, read_panel_csv, read_series_csv,
    series_rows, write_panel_csv, write_panel_jsonl, write_series_csv, BugLedger, CommitRecord, GitRepo, PanelRow,
    ResolvedLedger,
};
use reuselens_core::synthetic::{demo_ledger, demo_script, write_scripted_repo};
use reuselens_core::{scan_tree, Diagnostic, HistoryError, Metric, SnapshotAggregate};
use reuselens_stats::design::reuse_columns;
use reuselens_stats::synthetic::synthetic_panel;
use reuselens_stats::{
    fit_glm, fit_multinomial, reuse_defect_cooccurrence, rq2_design, rq3_design, screen_collinearity, trend_summary,
    Aggregation, DesignMatrix, GlmOptions, PanelDesignOptions, StatsError, TrendSummary,
};

use crate::config::RunConfig;
use crate::manifest::write_manifest;
use crate::svg::line_chart;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// The scripted demo repository plus its bug ledger.
    Repo,
    /// A panel drawn from the known multinomial generator.
    Panel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scan,
    Mine,
    Fit,
    Report,
    All,
    Synth { kind: SynthKind, rows: usize },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Mine => "mine",
            Command::Fit => "fit",
            Command::Report => "report",
            Command::All => "all",
            Command::Synth { kind: SynthKind::Repo, .. } => "synth-repo",
            Command::Synth { kind: SynthKind::Panel, .. } => "synth-panel",
        }
    }

    fn needs_repo(&self) -> bool {
        matches!(self, Command::Scan | Command::Mine | Command::All)
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub exit_code: u8,
    pub diagnostics: Vec<Diagnostic>,
    pub output_dir: PathBuf,
}

impl Outcome {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

struct Run<'a> {
    cfg: &'a RunConfig,
    out: PathBuf,
    diags: Vec<Diagnostic>,
}

impl Run<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let p = self.path(name);
        std::fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))
    }

    fn remove(&self, names: &[&str]) {
        for n in names {
            let _ = std::fs::remove_file(self.path(n));
        }
    }

    fn warn(&mut self, msg: impl Into<String>) {
        self.diags.push(Diagnostic::warning(None, msg));
    }

    fn error(&mut self, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(None, msg));
    }

    fn open(&self, name: &str, hint: &str) -> Result<File, CliError> {
        let p = self.path(name);
        File::open(&p).map_err(|_| CliError::Missing(format!("{} not found; {hint}", p.display())))
    }
}

/// Runs one command. Every problem ends up in `Outcome::diagnostics`; the
/// exit code is 1 iff any of them is an error.
pub fn execute(command: Command, config: &RunConfig) -> Outcome {
    let mut run = Run { cfg: config, out: config.output_dir.clone(), diags: Vec::new() };
    if let Err(e) = dispatch(command, &mut run) {
        run.error(e.to_string());
    }
    if run.out.is_dir() {
        let log: String = run.diags.iter().map(|d| format!("{d}\n")).collect();
        let finish = run
            .write(&format!("diagnostics_{}.log", command.name()), log)
            .and_then(|_| write_manifest(&run.out, command.name(), &config.to_toml()));
        if let Err(e) = finish {
            run.error(e.to_string());
        }
    }
    let failed = run.diags.iter().any(|d| d.severity == Severity::Error);
    Outcome { exit_code: u8::from(failed), diagnostics: run.diags, output_dir: run.out }
}

fn dispatch(command: Command, run: &mut Run) -> Result<(), CliError> {
    run.cfg.validate(command.needs_repo())?;
    std::fs::create_dir_all(&run.out).map_err(|e| CliError::io(&run.out, e))?;
    match command {
        Command::Scan => scan(run),
        Command::Mine => mine(run),
        Command::Fit => fit(run),
        Command::Report => report(run),
        Command::All => {
            mine(run)?;
            if let Err(e) = fit(run) {
                run.error(e.to_string());
            }
            report(run)
        }
        Command::Synth { kind: SynthKind::Repo, .. } => synth_repo(run),
        Command::Synth { kind: SynthKind::Panel, rows } => synth_panel(run, rows),
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| CliError::Missing(e.to_string()))
}

fn repo_path(run: &Run) -> Result<PathBuf, CliError> {
    run.cfg.repo_path.clone().ok_or_else(|| CliError::Config("repo_path is required (--repo)".into()))
}

fn scan(run: &mut Run) -> Result<(), CliError> {
    let root = repo_path(run)?;
    let records = scan_tree(&root, &run.cfg.metrics())?;
    if records.is_empty() {
        run.warn(format!("no Java types found under {}", root.display()));
    }
    let mut header = vec!["class", "path", "kind"];
    header.extend(Metric::ALL.iter().map(|m| m.name()));
    let rows = records.iter().map(|r| {
        let mut row = vec![r.class_name.clone(), r.path.clone(), r.kind.to_string()];
        row.extend(Metric::ALL.iter().map(|&m| r.value(m).to_string()));
        row
    });
    run.write("classes.csv", csv_bytes(&header, rows)?)?;

    let agg = SnapshotAggregate::from_records(&records);
    let mut s = format!("classes: {}\n\n{:<18}{:>12}{:>12}\n", agg.n_classes, "metric", "sum", "mean");
    for m in Metric::ALL {
        let _ = writeln!(s, "{:<18}{:>12}{:>12}", m.name(), agg.sum(m), sig6(agg.mean(m)));
    }
    run.write("scan_summary.txt", s)
}

fn mine(run: &mut Run) -> Result<(), CliError> {
    let path = repo_path(run)?;
    let project = run.cfg.project_name();
    let repo = GitRepo::open(&path)?;
    let commits = repo.walk_history(&run.cfg.branch, &run.cfg.limits())?;
    if commits.is_empty() {
        return Err(HistoryError::EmptyHistory(run.cfg.branch.clone()).into());
    }
    let mut ledger = match &run.cfg.bug_ledger_path {
        Some(p) => BugLedger::from_path(p)?,
        None => {
            run.warn("no bug ledger configured; every bug count is 0");
            BugLedger::default()
        }
    };
    if let Some(p) = &run.cfg.exclusion_list_path {
        ledger = ledger.without(&read_exclusion_list(p)?);
    }
    let (resolved, d) = ledger.resolve(&commits)?;
    run.diags.extend(d);

    let (snapshots, d) = mine_snapshots(&repo, &commits, &run.cfg.metrics());
    run.diags.extend(d);
    let (rows, d) = assemble_panel(&project, &commits, &snapshots, &resolved);
    run.diags.extend(d);
    if rows.is_empty() {
        run.warn("panel is empty: fewer than two measurable commits");
    }
    let series = series_rows(&commits, &snapshots, &resolved);

    let mut buf = Vec::new();
    write_panel_csv(&rows, &mut buf)?;
    run.write("panel.csv", &buf)?;
    buf.clear();
    write_panel_jsonl(&rows, &mut buf)?;
    run.write("panel.jsonl", &buf)?;
    buf.clear();
    write_series_csv(&series, &mut buf)?;
    run.write("series.csv", &buf)?;
    buf.clear();
    ledger.write_csv(&mut buf)?;
    run.write("ledger.csv", &buf)?;

    let commit_rows = commits.iter().map(|c| {
        vec![
            c.order_index.to_string(),
            c.commit_id.clone(),
            c.timestamp.to_string(),
            c.lines_added.to_string(),
            c.lines_deleted.to_string(),
            compute_churn(c).to_string(),
        ]
    });
    let header = ["order_index", "commit_id", "timestamp", "lines_added", "lines_deleted", "churn"];
    run.write("commits.csv", csv_bytes(&header, commit_rows)?)
}

fn read_panel(path: &Path) -> Result<Vec<PanelRow>, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(read_panel_csv(f)?)
}

fn separation_hint(e: &StatsError) -> String {
    match e {
        StatsError::Separation(_) => format!(
            "{e}; some predictor perfectly splits the bug-delta classes. \
             Widen the commit range, add projects via pooled_panels, or switch \
             --aggregation / --predictor-form"
        ),
        StatsError::InsufficientData(_) => {
            format!("{e}; the panel needs more transitions in every bug-delta class")
        }
        _ => e.to_string(),
    }
}

/// Drops constant columns and screens collinearity, writing the log to
/// `vif_name`.
fn prepare(run: &mut Run, label: &str, design: DesignMatrix, vif_name: &str) -> Result<DesignMatrix, CliError> {
    let (design, dropped) = design.drop_constant_columns();
    for c in &dropped {
        run.warn(format!("{label}: dropped constant column {c}"));
    }
    let protected = reuse_columns(run.cfg.predictor_form);
    let (screened, log) = screen_collinearity(&design, run.cfg.vif_threshold, &protected)
        .map_err(|e| CliError::Stats { context: format!("{label} vif"), source: e })?;
    for c in &log.kept_above_threshold {
        run.warn(format!("{label}: protected column {c} kept above the VIF threshold"));
    }
    let mut text = String::new();
    if !dropped.is_empty() {
        let _ = writeln!(text, "constant columns dropped: {}", dropped.join(", "));
    }
    text += &log.to_text();
    run.write(vif_name, text)?;
    Ok(screened)
}

fn fit(run: &mut Run) -> Result<(), CliError> {
    let p = run.path("panel.csv");
    if !p.is_file() {
        return Err(CliError::Missing(format!("{} not found; run `mine` first", p.display())));
    }
    let mut rows = read_panel(&p)?;
    for extra in &run.cfg.pooled_panels {
        rows.extend(read_panel(extra)?);
    }
    let opts = PanelDesignOptions {
        aggregation: run.cfg.aggregation,
        form: run.cfg.predictor_form,
        pooled: !run.cfg.pooled_panels.is_empty(),
    };

    let rq2 = rq2_design(&rows, &opts)
        .map_err(|e| CliError::Stats { context: "rq2 design".into(), source: e })
        .and_then(|d| prepare(run, "rq2", d, "vif_rq2.txt"));
    match rq2.and_then(|d| {
        fit_multinomial(&d).map_err(|e| CliError::Stats { context: "rq2 multinomial".into(), source: e })
    }) {
        Ok(f) => {
            run.write("rq2_multinomial.json", f.to_json())?;
            run.write("rq2_multinomial.txt", f.to_text())?;
        }
        Err(e) => {
            run.remove(&["rq2_multinomial.json", "rq2_multinomial.txt"]);
            match e {
                CliError::Stats { context, source } => run.error(format!("{context}: {}", separation_hint(&source))),
                e => run.error(e.to_string()),
            }
        }
    }

    let glm = GlmOptions::for_churn(run.cfg.glm_family);
    let rq3 = rq3_design(&rows, &opts)
        .map_err(|e| CliError::Stats { context: "rq3 design".into(), source: e })
        .and_then(|d| prepare(run, "rq3", d, "vif_rq3.txt"))
        .and_then(|d| fit_glm(&d, &glm).map_err(|e| CliError::Stats { context: "rq3 glm".into(), source: e }));
    match rq3 {
        Ok(f) => {
            run.write("rq3_glm.json", f.to_json())?;
            run.write("rq3_glm.txt", f.to_text())?;
        }
        Err(e) => {
            run.remove(&["rq3_glm.json", "rq3_glm.txt"]);
            run.error(e.to_string());
        }
    }
    Ok(())
}

const TREND_HEADER: [&str; 13] = [
    "metric",
    "aggregation",
    "n",
    "spearman_rho",
    "mann_kendall_s",
    "mann_kendall_var",
    "mann_kendall_z",
    "p_value",
    "direction",
    "min",
    "max",
    "mean",
    "median",
];

fn trend_row(metric: Metric, agg: Aggregation, t: &TrendSummary) -> Vec<String> {
    vec![
        metric.name().into(),
        agg.to_string(),
        t.n.to_string(),
        sig6(t.spearman_rho),
        t.mann_kendall_s.to_string(),
        sig6(t.mann_kendall_var),
        sig6(t.mann_kendall_z),
        sig6(t.p_value),
        t.direction.as_str().into(),
        sig6(t.min),
        sig6(t.max),
        sig6(t.mean),
        sig6(t.median),
    ]
}

/// Rebuilds the resolved ledger from `commits.csv` and `ledger.csv`.
fn stored_ledger(run: &mut Run) -> Result<ResolvedLedger, CliError> {
    let ledger_path = run.path("ledger.csv");
    if !ledger_path.is_file() {
        run.warn("ledger.csv not found; co-occurrence uses an empty ledger");
        return Ok(ResolvedLedger::default());
    }
    let mut reader = csv::Reader::from_reader(run.open("commits.csv", "run `mine` first")?);
    let mut commits = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("").to_string();
        let bad = |what: &str| CliError::Missing(format!("commits.csv: bad {what} in row {}", commits.len() + 1));
        commits.push(CommitRecord {
            order_index: field(0).parse().map_err(|_| bad("order_index"))?,
            commit_id: field(1),
            timestamp: field(2).parse().map_err(|_| bad("timestamp"))?,
            files_changed: Vec::new(),
            lines_added: field(3).parse().map_err(|_| bad("lines_added"))?,
            lines_deleted: field(4).parse().map_err(|_| bad("lines_deleted"))?,
        });
    }
    let (resolved, d) = BugLedger::from_path(&ledger_path)?.resolve(&commits)?;
    run.diags.extend(d);
    Ok(resolved)
}

fn report(run: &mut Run) -> Result<(), CliError> {
    let series = read_series_csv(run.open("series.csv", "run `mine` first")?)?;
    let agg = run.cfg.aggregation;
    let mean = agg == Aggregation::Mean;
    let mut csv_rows = Vec::new();
    let mut text = format!(
        "{:<18}{:>6}{:>12}{:>8}{:>12}{:>12}  {}\n",
        "metric", "n", "spearman", "S", "z", "p", "direction"
    );
    for m in Metric::REUSE {
        let xs: Vec<f64> = series.iter().map(|r| r.order_index as f64).collect();
        let ys: Vec<f64> = series.iter().map(|r| r.value(m, mean)).collect();
        let title = format!("{} ({agg})", m.name());
        run.write(&format!("trend_{}.svg", m.name()), line_chart(&title, "commit order", m.name(), &xs, &ys))?;
        match trend_summary(&ys) {
            Ok(t) => {
                let _ = writeln!(
                    text,
                    "{:<18}{:>6}{:>12}{:>8}{:>12}{:>12}  {}",
                    m.name(),
                    t.n,
                    sig6(t.spearman_rho),
                    t.mann_kendall_s,
                    sig6(t.mann_kendall_z),
                    sig6(t.p_value),
                    t.direction.as_str()
                );
                csv_rows.push(trend_row(m, agg, &t));
            }
            Err(e) => run.error(format!("trend {}: {e}", m.name())),
        }
    }
    run.write("trends.csv", csv_bytes(&TREND_HEADER, csv_rows)?)?;
    run.write("trends.txt", text)?;

    let rows = read_panel_csv(run.open("panel.csv", "run `mine` first")?)?;
    let ledger = stored_ledger(run)?;
    let co = reuse_defect_cooccurrence(&rows, &ledger);
    run.write("cooccurrence.json", co.to_json())?;
    run.write("cooccurrence.txt", co.to_text())?;
    let mut buf = Vec::new();
    co.write_candidates_csv(&mut buf)?;
    run.write("candidates.csv", buf)
}

fn synth_repo(run: &mut Run) -> Result<(), CliError> {
    let dir = repo_path(run)?;
    if dir.join(".git").exists() {
        return Err(CliError::Config(format!("{} already holds a repository", dir.display())));
    }
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let ids = write_scripted_repo(&dir, &demo_script())?;
    let mut buf = Vec::new();
    demo_ledger(&ids).write_csv(&mut buf)?;
    run.write("synthetic_ledger.csv", buf)
}

fn synth_panel(run: &mut Run, rows: usize) -> Result<(), CliError> {
    let panel = synthetic_panel(rows, run.cfg.seed);
    let mut buf = Vec::new();
    write_panel_csv(&panel, &mut buf)?;
    run.write("panel.csv", &buf)?;
    buf.clear();
    write_panel_jsonl(&panel, &mut buf)?;
    run.write("panel.jsonl", buf)
}
