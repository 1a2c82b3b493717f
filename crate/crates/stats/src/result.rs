use std::fmt::Write as _;

use reuselens_core::format::sig6;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Multinomial,
    GlmGaussian,
    GlmPoisson,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Multinomial => "multinomial",
            Family::GlmGaussian => "glm_gaussian",
            Family::GlmPoisson => "glm_poisson",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// Wald statistic: z for multinomial and Poisson fits, t for Gaussian.
    pub z_value: f64,
    pub p_value: f64,
}

/// Coefficients of one response class (multinomial) or of the single GLM
/// linear predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBlock {
    pub label: String,
    pub reference: bool,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub response: String,
    pub statistic: String,
    pub n_obs: usize,
    pub n_params: usize,
    pub blocks: Vec<CoefficientBlock>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub pseudo_r2: Option<f64>,
    pub dispersion: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Max-norm of the per-observation mean score on the standardized
    /// design at the returned point.
    pub gradient_max_norm: f64,
    /// Fitted class probabilities (multinomial, one row per observation
    /// with one entry per class) or fitted means (GLM, one entry per row).
    #[serde(skip)]
    pub fitted: Vec<Vec<f64>>,
    #[serde(skip)]
    pub log_likelihood_trace: Vec<f64>,
}

impl FitResult {
    pub fn block(&self, label: &str) -> Option<&CoefficientBlock> {
        self.blocks.iter().find(|b| b.label == label)
    }

    pub fn term(&self, block: &str, name: &str) -> Option<&Term> {
        self.block(block)?.terms.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_default() + "\n"
    }

    /// Aligned plain-text coefficient tables.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "family: {}", self.family.as_str());
        let _ = writeln!(out, "response: {}", self.response);
        let _ = writeln!(out, "observations: {}", self.n_obs);
        let _ = writeln!(out, "parameters: {}", self.n_params);
        let _ = writeln!(out, "log-likelihood: {}", num(self.log_likelihood));
        let _ = writeln!(out, "AIC: {}", num(self.aic));
        if let Some(r2) = self.pseudo_r2 {
            let _ = writeln!(out, "McFadden pseudo-R2: {}", num(r2));
        }
        if let Some(d) = self.dispersion {
            let _ = writeln!(out, "dispersion: {}", num(d));
        }
        let _ = writeln!(out, "converged: {} ({} iterations)", self.converged, self.iterations);

        let stat_header = format!("{} value", self.statistic);
        let p_header = format!("Pr(>|{}|)", self.statistic);
        for block in &self.blocks {
            let _ = writeln!(out);
            let suffix = if block.reference { " (reference)" } else { "" };
            let _ = writeln!(out, "[{}]{suffix}", block.label);
            let mut rows = vec![[
                "term".to_string(),
                "estimate".to_string(),
                "std.error".to_string(),
                stat_header.clone(),
                p_header.clone(),
            ]];
            for t in &block.terms {
                rows.push([t.name.clone(), num(t.estimate), num(t.std_error), num(t.z_value), num(t.p_value)]);
            }
            let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
            for r in &rows {
                let mut line = format!("{:<w$}", r[0], w = widths[0]);
                for c in 1..5 {
                    let _ = write!(line, "  {:>w$}", r[c], w = widths[c]);
                }
                let _ = writeln!(out, "{}", line.trim_end());
            }
        }
        out
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else {
        sig6(x)
    }
}

/// Two-sided normal tail probability.
pub(crate) fn normal_two_sided(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Two-sided Student t tail probability.
pub(crate) fn t_two_sided(t: f64, df: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    match StudentsT::new(0.0, 1.0, df) {
        Ok(dist) => 2.0 * dist.sf(t.abs()),
        Err(_) => f64::NAN,
    }
}
