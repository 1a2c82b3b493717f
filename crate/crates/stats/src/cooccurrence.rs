use std::fmt::Write as _;

use reuselens_core::history::{PanelRow, ResolvedLedger};
use reuselens_core::Metric;
use serde::{Deserialize, Serialize};

/// Commits with one combination of inducing status and changed reuse
/// metrics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCell {
    pub inducing: bool,
    /// Changed metrics joined by `+`, or `none`.
    pub pattern: String,
    pub count: usize,
}

/// 2 × 2 table of inducing status against variation of one metric, or of
/// any / all three metrics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricCounts {
    pub metric: String,
    pub inducing_changed: usize,
    pub inducing_unchanged: usize,
    pub non_inducing_changed: usize,
    pub non_inducing_unchanged: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub commit: String,
    pub order_index: usize,
    pub deltas: [i64; 3],
    pub bug_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cooccurrence {
    pub total_commits: usize,
    pub inducing_commits: usize,
    pub cells: Vec<PatternCell>,
    pub marginals: Vec<MetricCounts>,
    pub candidates: Vec<Candidate>,
}

fn pattern_name(mask: usize) -> String {
    let names: Vec<&str> = (0..3).filter(|b| mask & (1 << b) != 0).map(|b| Metric::REUSE[b].name()).collect();
    if names.is_empty() {
        "none".into()
    } else {
        names.join("+")
    }
}

/// Cross-tabulates the destination commit of every panel row by whether
/// it introduced a bug and which reuse-metric sums changed.
pub fn reuse_defect_cooccurrence(rows: &[PanelRow], ledger: &ResolvedLedger) -> Cooccurrence {
    let mut counts = [[0usize; 8]; 2];
    let mut candidates = Vec::new();
    for r in rows {
        let bugs: Vec<String> = ledger.introduced_at(r.to_index).into_iter().map(str::to_string).collect();
        let inducing = !bugs.is_empty();
        let mask = (0..3).filter(|&b| r.reuse_delta_sum[b] != 0).fold(0, |m, b| m | (1 << b));
        counts[usize::from(inducing)][mask] += 1;
        if inducing && mask != 0 {
            candidates.push(Candidate {
                commit: r.to_commit.clone(),
                order_index: r.to_index,
                deltas: r.reuse_delta_sum,
                bug_ids: bugs,
            });
        }
    }

    let mut cells = Vec::with_capacity(16);
    for inducing in [true, false] {
        for mask in 0..8 {
            cells.push(PatternCell { inducing, pattern: pattern_name(mask), count: counts[usize::from(inducing)][mask] });
        }
    }

    let marginal = |name: &str, changed: &dyn Fn(usize) -> bool| {
        let side = |ind: usize, want: bool| (0..8).filter(|&m| changed(m) == want).map(|m| counts[ind][m]).sum();
        MetricCounts {
            metric: name.to_string(),
            inducing_changed: side(1, true),
            inducing_unchanged: side(1, false),
            non_inducing_changed: side(0, true),
            non_inducing_unchanged: side(0, false),
        }
    };
    let mut marginals: Vec<MetricCounts> =
        (0..3).map(|b| marginal(Metric::REUSE[b].name(), &|m| m & (1 << b) != 0)).collect();
    marginals.push(marginal("any", &|m| m != 0));
    marginals.push(marginal("all", &|m| m == 7));

    Cooccurrence {
        total_commits: rows.len(),
        inducing_commits: counts[1].iter().sum(),
        cells,
        marginals,
        candidates,
    }
}

impl Cooccurrence {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default() + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "commits analyzed: {}", self.total_commits);
        let _ = writeln!(out, "defect-inducing commits: {}", self.inducing_commits);
        let _ = writeln!(out);
        let w = self.cells.iter().map(|c| c.pattern.len()).max().unwrap_or(0).max(7);
        let _ = writeln!(out, "{:<w$}  {:>8}  {:>12}", "changed", "inducing", "non-inducing");
        for (a, b) in self.cells[..8].iter().zip(&self.cells[8..]) {
            let _ = writeln!(out, "{:<w$}  {:>8}  {:>12}", a.pattern, a.count, b.count);
        }
        let _ = writeln!(out);
        let w = self.marginals.iter().map(|m| m.metric.len()).max().unwrap_or(0);
        let _ = writeln!(
            out,
            "{:<w$}  {:>16}  {:>18}  {:>20}  {:>22}",
            "metric", "inducing+changed", "inducing+unchanged", "non-inducing+changed", "non-inducing+unchanged"
        );
        for m in &self.marginals {
            let _ = writeln!(
                out,
                "{:<w$}  {:>16}  {:>18}  {:>20}  {:>22}",
                m.metric, m.inducing_changed, m.inducing_unchanged, m.non_inducing_changed, m.non_inducing_unchanged
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "review candidates: {}", self.candidates.len());
        out
    }

    pub fn write_candidates_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["commit".to_string(), "order_index".to_string()];
        header.extend(Metric::REUSE.iter().map(|m| format!("d_{m}")));
        header.push("bug_ids".into());
        w.write_record(&header)?;
        for c in &self.candidates {
            let mut rec = vec![c.commit.clone(), c.order_index.to_string()];
            rec.extend(c.deltas.iter().map(i64::to_string));
            rec.push(c.bug_ids.join(";"));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
