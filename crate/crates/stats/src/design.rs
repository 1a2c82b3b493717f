use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use reuselens_core::history::{BugDelta, PanelRow};
use reuselens_core::Metric;
use serde::{Deserialize, Serialize};

use crate::error::StatsError;

#[derive(Debug, Clone, PartialEq)]
pub enum Response {
    /// Class index per row into `classes`; `reference` is the baseline class.
    Categorical { labels: Vec<usize>, classes: Vec<String>, reference: usize },
    Numeric(Vec<f64>),
}

impl Response {
    pub fn len(&self) -> usize {
        match self {
            Response::Categorical { labels, .. } => labels.len(),
            Response::Numeric(y) => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Three-class bug-delta response with `stable` as reference.
    pub fn bug_delta(labels: impl IntoIterator<Item = BugDelta>) -> Self {
        let classes = BugDelta::ALL.iter().map(|d| d.as_str().to_string()).collect();
        let labels = labels.into_iter().map(|l| BugDelta::ALL.iter().position(|&d| d == l).unwrap_or(1)).collect();
        Response::Categorical { labels, classes, reference: 1 }
    }
}

/// Predictor matrix (without intercept) plus response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
    column_names: Vec<String>,
    response: Response,
}

impl DesignMatrix {
    pub fn new(x: DMatrix<f64>, column_names: Vec<String>, response: Response) -> Result<Self, StatsError> {
        let (n, p) = x.shape();
        if column_names.len() != p {
            return Err(StatsError::Invalid(format!("{} column names for {p} columns", column_names.len())));
        }
        if response.len() != n {
            return Err(StatsError::Invalid(format!("response has {} rows, matrix has {n}", response.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::Invalid("matrix contains missing or non-finite values".into()));
        }
        match &response {
            Response::Numeric(y) if y.iter().any(|v| !v.is_finite()) => {
                return Err(StatsError::Invalid("response contains missing or non-finite values".into()))
            }
            Response::Categorical { labels, classes, reference } => {
                if *reference >= classes.len() || labels.iter().any(|&l| l >= classes.len()) {
                    return Err(StatsError::Invalid("class label out of range".into()));
                }
            }
            _ => {}
        }
        if n <= p {
            return Err(StatsError::InsufficientData(format!(
                "need more rows than predictors (n > p), got n = {n}, p = {p}"
            )));
        }
        Ok(Self { x, column_names, response })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn response(&self) -> &Response {
        &self.response
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn without_column(&self, j: usize) -> Self {
        let mut names = self.column_names.clone();
        names.remove(j);
        Self { x: self.x.clone().remove_column(j), column_names: names, response: self.response.clone() }
    }

    pub fn with_response(&self, response: Response) -> Result<Self, StatsError> {
        Self::new(self.x.clone(), self.column_names.clone(), response)
    }

    pub fn is_constant(&self, j: usize) -> bool {
        let c = self.x.column(j);
        c.iter().all(|&v| v == c[0])
    }

    /// Removes constant columns, returning their names.
    pub fn drop_constant_columns(&self) -> (Self, Vec<String>) {
        let mut out = self.clone();
        let mut dropped = Vec::new();
        for j in (0..self.n_cols()).rev() {
            if self.is_constant(j) {
                dropped.push(self.column_names[j].clone());
                out = out.without_column(j);
            }
        }
        dropped.reverse();
        (out, dropped)
    }

    pub fn ensure_no_constant_columns(&self) -> Result<(), StatsError> {
        match (0..self.n_cols()).find(|&j| self.is_constant(j)) {
            Some(j) => Err(StatsError::DegenerateMatrix(format!("column {} is constant", self.column_names[j]))),
            None => Ok(()),
        }
    }

    pub fn standardization(&self) -> Standardization {
        let n = self.n_rows() as f64;
        let mut means = Vec::with_capacity(self.n_cols());
        let mut sds = Vec::with_capacity(self.n_cols());
        for c in self.x.column_iter() {
            let m = c.sum() / n;
            let var = c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            means.push(m);
            sds.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        Standardization { means, sds }
    }
}

/// Per-column centering and scaling of a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardization {
    /// `[1 | (x − mean) / sd]`.
    pub fn standardized_with_intercept(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (n, p) = x.shape();
        DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { (x[(i, j - 1)] - self.means[j - 1]) / self.sds[j - 1] })
    }

    /// Maps coefficients on the standardized scale (intercept first) to the
    /// raw scale: `beta_raw = A · beta_std`.
    pub fn back_transform(&self) -> DMatrix<f64> {
        let q = self.means.len() + 1;
        let mut a = DMatrix::zeros(q, q);
        a[(0, 0)] = 1.0;
        for j in 1..q {
            a[(0, j)] = -self.means[j - 1] / self.sds[j - 1];
            a[(j, j)] = 1.0 / self.sds[j - 1];
        }
        a
    }
}

pub fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = x.shape();
    DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Sum,
    Mean,
}

impl FromStr for Aggregation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(Aggregation::Sum),
            "mean" => Ok(Aggregation::Mean),
            other => Err(format!("unknown aggregation {other:?} (expected sum or mean)")),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Sum => "sum",
            Aggregation::Mean => "mean",
        })
    }
}

/// Whether reuse predictors enter as destination-commit levels or as
/// deltas from the previous commit. CK controls always enter as levels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorForm {
    #[default]
    Levels,
    Deltas,
}

impl FromStr for PredictorForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "levels" => Ok(PredictorForm::Levels),
            "deltas" => Ok(PredictorForm::Deltas),
            other => Err(format!("unknown predictor form {other:?} (expected levels or deltas)")),
        }
    }
}

impl fmt::Display for PredictorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictorForm::Levels => "levels",
            PredictorForm::Deltas => "deltas",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelDesignOptions {
    pub aggregation: Aggregation,
    pub form: PredictorForm,
    /// Add one indicator column per project beyond the first (sorted by name).
    pub pooled: bool,
}

/// Names of the reuse predictor columns for a predictor form.
pub fn reuse_columns(form: PredictorForm) -> Vec<String> {
    Metric::REUSE
        .iter()
        .map(|m| match form {
            PredictorForm::Levels => m.name().to_string(),
            PredictorForm::Deltas => format!("d_{}", m.name()),
        })
        .collect()
}

fn panel_columns(rows: &[PanelRow], opts: &PanelDesignOptions, with_churn: bool) -> (DMatrix<f64>, Vec<String>) {
    let mean = opts.aggregation == Aggregation::Mean;
    let mut names = reuse_columns(opts.form);
    names.extend(Metric::ALL.iter().filter(|m| !m.is_reuse()).map(|m| m.name().to_string()));
    if with_churn {
        names.push("churn".into());
    }
    let projects: Vec<&str> =
        rows.iter().map(|r| r.project.as_str()).collect::<BTreeSet<_>>().into_iter().collect();
    let indicators: &[&str] = if opts.pooled && projects.len() > 1 { &projects[1..] } else { &[] };
    names.extend(indicators.iter().map(|p| format!("project={p}")));

    let x = DMatrix::from_fn(rows.len(), names.len(), |i, j| {
        let r = &rows[i];
        if j < 3 {
            let m = Metric::REUSE[j];
            return match opts.form {
                PredictorForm::Levels => r.level(m, mean),
                PredictorForm::Deltas => r.reuse_delta(m, mean).unwrap_or(0.0),
            };
        }
        let controls: Vec<Metric> = Metric::ALL.iter().copied().filter(|m| !m.is_reuse()).collect();
        if j < 3 + controls.len() {
            return r.level(controls[j - 3], mean);
        }
        let mut k = j - 3 - controls.len();
        if with_churn {
            if k == 0 {
                return r.churn as f64;
            }
            k -= 1;
        }
        if r.project == indicators[k] {
            1.0
        } else {
            0.0
        }
    });
    (x, names)
}

/// Bug-delta design: reuse predictors, seven CK controls and churn.
pub fn rq2_design(rows: &[PanelRow], opts: &PanelDesignOptions) -> Result<DesignMatrix, StatsError> {
    let (x, names) = panel_columns(rows, opts, true);
    DesignMatrix::new(x, names, Response::bug_delta(rows.iter().map(|r| r.label)))
}

/// Churn design: the same predictors without churn; raw churn as response.
pub fn rq3_design(rows: &[PanelRow], opts: &PanelDesignOptions) -> Result<DesignMatrix, StatsError> {
    let (x, names) = panel_columns(rows, opts, false);
    DesignMatrix::new(x, names, Response::Numeric(rows.iter().map(|r| r.churn as f64).collect()))
}
