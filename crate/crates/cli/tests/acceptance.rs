//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use reuselens_cli::{execute, Command, RunConfig};
use reuselens_core::synthetic::{demo_ledger, demo_script, write_scripted_repo, FileEdit, ScriptedCommit};
use reuselens_core::{reuse_vector, MetricsConfig, TypeGraph};
use reuselens_stats::design::{with_intercept, DesignMatrix, Response};
use reuselens_stats::multinomial::MultinomialObjective;
use reuselens_stats::synthetic::{equicorrelated, multinomial_sample, poisson_sample};
use reuselens_stats::trend::mann_kendall_s;
use reuselens_stats::{
    compute_vif, fit_glm, fit_multinomial, screen_collinearity, trend_summary, GlmFamily, GlmOptions,
};
use support::fixtures::{load_fixtures, write_fixture, Fixture, METRICS};
use support::oracle::oracle_metrics;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn graph_of(fixture: &Fixture) -> TypeGraph {
    let units: Vec<_> = fixture
        .files
        .iter()
        .map(|(p, s)| reuselens_core::parse_compilation_unit(s, p).expect("fixture parses"))
        .collect();
    TypeGraph::build(&units).expect("fixture graph")
}

fn fixture(name: &str) -> Fixture {
    load_fixtures().into_iter().find(|f| f.name == name).unwrap_or_else(|| panic!("fixture {name}"))
}

fn worked_examples() -> Outcome {
    let start = Instant::now();
    let cfg = MetricsConfig::default();

    let f = fixture("01_spec_composite");
    let g = graph_of(&f);
    let spec = reuse_vector(g.get("A").unwrap(), &g, &cfg).spec_inheritance;
    ensure!(spec == 3, "interface composite: spec_inheritance(A) = {spec}, want 3");

    let f = fixture("02_impl_bar");
    let g = graph_of(&f);
    let imp = reuse_vector(g.get("A").unwrap(), &g, &cfg).impl_inheritance;
    ensure!(imp == 1, "bar() example: impl_inheritance(A) = {imp}, want 1");

    let f = fixture("03_delegation_external");
    let g = graph_of(&f);
    let form = g.get("Form").unwrap();
    let deleg = reuse_vector(form, &g, &cfg).delegation;
    ensure!(deleg == 1, "Checkbox example: delegation(Form) = {deleg}, want 1 (validator only)");
    ensure!(g.resolve("Form", "Checkbox").is_none(), "Checkbox must stay external");

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("spec=3 impl=1 deleg=1 in {elapsed:?}"))
}

fn tool_rows(fixture: &Fixture) -> BTreeMap<String, [usize; 10]> {
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("src");
    write_fixture(fixture, &src);
    let out = tmp.path().join("out");
    let cfg = RunConfig { repo_path: Some(src), output_dir: out.clone(), ..Default::default() };
    let outcome = execute(Command::Scan, &cfg);
    assert_eq!(outcome.exit_code, 0, "{}: {:?}", fixture.name, outcome.diagnostics);
    let mut reader = csv::Reader::from_path(out.join("classes.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(str::to_string).collect();
    let columns = [
        "spec_inheritance",
        "impl_inheritance",
        "delegation",
        "dit",
        "noc",
        "loc",
        "lcom",
        "wmc",
        "rfc",
        "cbo",
    ]
    .map(|c| header.iter().position(|h| h == c).unwrap());
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), columns.map(|i| r[i].parse().unwrap()))
        })
        .collect()
}

fn describe(row: &[usize; 10]) -> String {
    METRICS.iter().zip(row).map(|(m, v)| format!("{m}={v}")).collect::<Vec<_>>().join(" ")
}

fn metric_oracle_suite() -> Outcome {
    let fixtures = load_fixtures();
    ensure!(fixtures.len() >= 20, "only {} fixtures", fixtures.len());
    let mut covered = [false; 10];
    let mut classes = 0;
    for f in &fixtures {
        let tool = tool_rows(f);
        let oracle = oracle_metrics(&f.files);
        ensure!(tool.len() <= 6, "{}: more than 6 types", f.name);
        ensure!(
            tool.keys().collect::<Vec<_>>() == oracle.keys().collect::<Vec<_>>(),
            "{}: class sets differ: tool {:?} oracle {:?}",
            f.name,
            tool.keys(),
            oracle.keys()
        );
        for (class, t) in &tool {
            let o = &oracle[class];
            ensure!(t == o, "{} {class}: tool [{}] oracle [{}]", f.name, describe(t), describe(o));
        }
        ensure!(f.expected.len() == tool.len(), "{}: expectations missing for some classes", f.name);
        for (class, want) in &f.expected {
            let got = tool.get(class).ok_or_else(|| format!("{}: no class {class}", f.name))?;
            ensure!(got == want, "{} {class}: got [{}] hand [{}]", f.name, describe(got), describe(want));
            for (i, v) in want.iter().enumerate() {
                covered[i] |= *v > 0;
            }
            classes += 1;
        }
    }
    let missing: Vec<&str> = METRICS.iter().zip(covered).filter(|(_, c)| !c).map(|(m, _)| *m).collect();
    ensure!(missing.is_empty(), "metrics never exercised with a nonzero value: {missing:?}");
    Ok(format!("{} fixtures, {classes} classes, tool = oracle = hand values", fixtures.len()))
}

fn multinomial_recovery() -> Outcome {
    let truth = DMatrix::from_row_slice(3, 4, &[0.4, 0.7, -0.6, 0.3, 0.0, 0.0, 0.0, 0.0, -0.3, -0.5, 0.8, 0.9]);
    let start = Instant::now();
    let data = multinomial_sample(10_000, &truth, 1, 2024);
    let fit = fit_multinomial(&data).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure!(fit.converged, "did not converge");
    let mut worst: f64 = 0.0;
    for (c, block) in fit.blocks.iter().enumerate() {
        if block.reference {
            continue;
        }
        for (j, term) in block.terms.iter().enumerate() {
            let dev = (term.estimate - truth[(c, j)]).abs() / term.std_error;
            worst = worst.max(dev);
            ensure!(dev <= 3.0, "{} {}: {} vs {} ({dev:.2} SE)", block.label, term.name, term.estimate, truth[(c, j)]);
        }
    }
    for row in &fit.fitted {
        let s: f64 = row.iter().sum();
        ensure!((s - 1.0).abs() <= 1e-12, "fitted probabilities sum to {s}");
    }

    let Response::Categorical { labels, classes, reference } = data.response().clone() else {
        return Err("categorical response expected".into());
    };
    let obj = MultinomialObjective::new(with_intercept(data.x()), labels, classes.len(), reference);
    let theta = DVector::from_fn(obj.n_params(), |i, _| 0.25 * ((i as f64) * 1.7).sin());
    let g = obj.gradient(&theta);
    let h = 1e-5;
    for i in 0..theta.len() {
        let mut up = theta.clone();
        let mut down = theta.clone();
        up[i] += h;
        down[i] -= h;
        let fd = (obj.log_likelihood(&up) - obj.log_likelihood(&down)) / (2.0 * h);
        let rel = (g[i] - fd).abs() / g[i].abs().max(1.0);
        ensure!(rel <= 1e-5, "gradient[{i}] = {} vs finite difference {fd}", g[i]);
    }
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("max deviation {worst:.2} SE, fit in {elapsed:?}"))
}

fn glm_exactness() -> Outcome {
    let n = 50;
    let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.37 - 4.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v).collect();
    let d = DesignMatrix::new(DMatrix::from_column_slice(n, 1, &x), vec!["x".into()], Response::Numeric(y.clone()))
        .map_err(|e| e.to_string())?;
    let fit = fit_glm(&d, &GlmOptions::new(GlmFamily::Gaussian)).map_err(|e| e.to_string())?;
    let b = &fit.blocks[0].terms;
    let (b0, b1) = (b[0].estimate, b[1].estimate);
    ensure!((b0 - 1.0).abs() <= 1e-8 && (b1 - 2.0).abs() <= 1e-8, "noiseless fit gave ({b0}, {b1})");

    let nf = n as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    let intercept = (sy - slope * sx) / nf;
    ensure!(
        (b0 - intercept).abs() <= 1e-10 && (b1 - slope).abs() <= 1e-10,
        "closed form ({intercept}, {slope}) vs fit ({b0}, {b1})"
    );

    let (a, slopes) = (0.5, [0.3, -0.2]);
    let pd = poisson_sample(20_000, a, &slopes, 77);
    let pf = fit_glm(&pd, &GlmOptions::new(GlmFamily::Poisson)).map_err(|e| e.to_string())?;
    let want = [a, slopes[0], slopes[1]];
    let mut worst: f64 = 0.0;
    for (t, w) in pf.blocks[0].terms.iter().zip(want) {
        let dev = (t.estimate - w).abs() / t.std_error;
        worst = worst.max(dev);
        ensure!(dev <= 3.0, "poisson {}: {} vs {w}", t.name, t.estimate);
    }
    Ok(format!("gaussian exact, poisson max deviation {worst:.2} SE"))
}

fn vif_correctness() -> Outcome {
    let d = equicorrelated(50_000, 3, 0.5, 11);
    let vifs = compute_vif(&d).map_err(|e| e.to_string())?;
    for v in &vifs {
        ensure!((v.value - 1.5).abs() <= 0.05, "{}: VIF {}", v.column, v.value);
    }

    let n = 200;
    let mut rng_state = 12345u64;
    let mut next = || {
        rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((rng_state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let base: Vec<[f64; 4]> = (0..n).map(|_| [next(), next(), next(), next()]).collect();
    let names = ["spec_inheritance", "impl_inheritance", "delegation", "wmc", "rfc", "cbo"];
    // rfc duplicates wmc; cbo duplicates delegation.
    let x = DMatrix::from_fn(n, 6, |i, j| match j {
        0..=3 => base[i][j],
        4 => base[i][3],
        _ => base[i][2],
    });
    let d = DesignMatrix::new(x, names.iter().map(|s| s.to_string()).collect(), Response::Numeric(vec![0.0; n]))
        .map_err(|e| e.to_string())?;
    let flagged: BTreeSet<String> =
        compute_vif(&d).map_err(|e| e.to_string())?.into_iter().filter(|v| v.exact_collinear).map(|v| v.column).collect();
    let want: BTreeSet<String> = ["delegation", "wmc", "rfc", "cbo"].iter().map(|s| s.to_string()).collect();
    ensure!(flagged == want, "exact-collinear flags {flagged:?}");

    let protected: Vec<String> = names[..3].iter().map(|s| s.to_string()).collect();
    let (kept, log) = screen_collinearity(&d, 10.0, &protected).map_err(|e| e.to_string())?;
    let removed: Vec<&str> = log.removals.iter().map(|r| r.column.as_str()).collect();
    ensure!(removed.len() == 2, "removed {removed:?}");
    ensure!(removed.contains(&"cbo"), "copy of delegation not removed: {removed:?}");
    ensure!(removed.iter().filter(|c| **c == "wmc" || **c == "rfc").count() == 1, "removed {removed:?}");
    for p in &protected {
        ensure!(kept.column_index(p).is_some(), "protected {p} dropped");
    }
    Ok(format!("VIF {:.3}/{:.3}/{:.3}, removed {removed:?}", vifs[0].value, vifs[1].value, vifs[2].value))
}

fn lcs_churn(old: &str, new: &str) -> u64 {
    let a: Vec<&str> = old.lines().collect();
    let b: Vec<&str> = new.lines().collect();
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            t[i][j] = if a[i] == b[j] { t[i + 1][j + 1] + 1 } else { t[i + 1][j].max(t[i][j + 1]) };
        }
    }
    (a.len() + b.len() - 2 * t[0][0]) as u64
}

fn scripted_churn(script: &[ScriptedCommit]) -> Vec<u64> {
    let mut files: BTreeMap<String, String> = BTreeMap::new();
    script
        .iter()
        .map(|step| {
            let mut churn = 0;
            for edit in &step.edits {
                let (path, new) = match edit {
                    FileEdit::Write { path, content } => (path.clone(), content.clone()),
                    FileEdit::Delete { path } => (path.clone(), String::new()),
                };
                let old = files.get(&path).cloned().unwrap_or_default();
                if path.ends_with(".java") {
                    churn += lcs_churn(&old, &new);
                }
                match edit {
                    FileEdit::Write { .. } => files.insert(path, new),
                    FileEdit::Delete { .. } => files.remove(&path),
                };
            }
            churn
        })
        .collect()
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().iter().map(str::to_string).collect();
    (h, r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect())
}

fn dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().unwrap().is_file())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect()
}

fn end_to_end_mining() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let script = demo_script();
    ensure!(script.len() == 20, "script has {} commits", script.len());
    let repo = tmp.path().join("repo");
    let ids = write_scripted_repo(&repo, &script).map_err(|e| e.to_string())?;
    let ledger = tmp.path().join("bugs.csv");
    demo_ledger(&ids).write_csv(std::fs::File::create(&ledger).unwrap()).map_err(|e| e.to_string())?;
    let out = tmp.path().join("out");
    let cfg = RunConfig {
        repo_path: Some(repo),
        branch: "main".into(),
        bug_ledger_path: Some(ledger),
        output_dir: out.clone(),
        ..Default::default()
    };

    let o = execute(Command::Mine, &cfg);
    ensure!(o.exit_code == 0, "mine failed: {:?}", o.diagnostics);
    let o = execute(Command::Report, &cfg);
    ensure!(o.exit_code == 0, "report failed: {:?}", o.diagnostics);
    let first = dir_bytes(&out);

    let (h, rows) = read_table(&out.join("panel.csv"));
    ensure!(rows.len() == 19, "panel has {} rows", rows.len());
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let churn = scripted_churn(&script);
    // Bug intervals [introduced, fixed): BUG-1 [3, 7), BUG-2 [5, 12),
    // BUG-3 [0, 10).
    let intervals = [(3usize, 7usize), (5, 12), (0, 10)];
    let active = |i: usize| intervals.iter().filter(|(a, b)| *a <= i && i < *b).count();
    let inducing: BTreeSet<usize> = [3, 5].into();
    let mut cells: BTreeMap<(bool, usize), usize> = BTreeMap::new();
    for r in &rows {
        let to: usize = r[col("to_index")].parse().unwrap();
        let got: u64 = r[col("churn")].parse().unwrap();
        ensure!(got == churn[to], "commit {to}: churn {got}, scripted {}", churn[to]);
        let want = match active(to).cmp(&active(to - 1)) {
            std::cmp::Ordering::Less => "decrease",
            std::cmp::Ordering::Equal => "stable",
            std::cmp::Ordering::Greater => "increase",
        };
        ensure!(r[col("bug_delta")] == want, "commit {to}: label {} want {want}", r[col("bug_delta")]);
        let mask = ["spec_inheritance", "impl_inheritance", "delegation"]
            .iter()
            .enumerate()
            .filter(|(_, m)| r[col(&format!("d_{m}_sum"))].parse::<f64>().unwrap() != 0.0)
            .fold(0, |acc, (b, _)| acc | (1 << b));
        *cells.entry((inducing.contains(&to), mask)).or_default() += 1;
    }

    let co: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("cooccurrence.json")).unwrap()).unwrap();
    let json_cells = co["cells"].as_array().unwrap();
    ensure!(json_cells.len() == 16, "{} cells", json_cells.len());
    let total: u64 = json_cells.iter().map(|c| c["count"].as_u64().unwrap()).sum();
    ensure!(total == 19 && co["total_commits"] == 19, "cells cover {total} of 19 commits");
    for (k, c) in json_cells.iter().enumerate() {
        let key = (c["inducing"].as_bool().unwrap(), k % 8);
        let want = cells.get(&key).copied().unwrap_or(0) as u64;
        ensure!(c["count"].as_u64().unwrap() == want, "cell {} {}: {} want {want}", key.0, c["pattern"], c["count"]);
    }

    let o = execute(Command::Mine, &cfg);
    ensure!(o.exit_code == 0, "second mine failed");
    let o = execute(Command::Report, &cfg);
    ensure!(o.exit_code == 0, "second report failed");
    ensure!(dir_bytes(&out) == first, "second run differs");
    Ok(format!("19 rows, churn/labels exact, 16 cells partition 19 commits, {} files identical", first.len()))
}

fn trend_statistics() -> Outcome {
    let mono: Vec<f64> = (1..=10).map(|v| v as f64 * 1.5).collect();
    let t = trend_summary(&mono).map_err(|e| e.to_string())?;
    ensure!(t.spearman_rho == 1.0, "rho = {}", t.spearman_rho);
    ensure!(t.mann_kendall_s == 45, "S = {}", t.mann_kendall_s);

    let fx: [f64; 4] = [1.0, 3.0, 2.0, 4.0];
    let mut by_hand = 0i64;
    for i in 0..fx.len() {
        for j in i + 1..fx.len() {
            by_hand += (fx[j] > fx[i]) as i64 - (fx[j] < fx[i]) as i64;
        }
    }
    let s = mann_kendall_s(&fx);
    ensure!(by_hand == 4 && s == 4, "S = {s}, pair enumeration {by_hand}");
    Ok("rho = 1, S = 45; [1,3,2,4] S = 4".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("worked examples", worked_examples),
        ("metric oracle suite", metric_oracle_suite),
        ("multinomial recovery", multinomial_recovery),
        ("GLM exactness", glm_exactness),
        ("VIF correctness", vif_correctness),
        ("end-to-end mining", end_to_end_mining),
        ("trend statistics", trend_statistics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
