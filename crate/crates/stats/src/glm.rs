use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::design::{DesignMatrix, Response};
use crate::error::StatsError;
use crate::multinomial::INTERCEPT;
use crate::result::{normal_two_sided, t_two_sided, CoefficientBlock, Family, FitResult, Term};
use crate::vif::least_squares;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GlmFamily {
    /// Normal errors, identity link.
    #[default]
    Gaussian,
    /// Poisson counts, log link.
    Poisson,
}

impl FromStr for GlmFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(GlmFamily::Gaussian),
            "poisson" => Ok(GlmFamily::Poisson),
            other => Err(format!("unknown GLM family {other:?} (expected gaussian or poisson)")),
        }
    }
}

impl fmt::Display for GlmFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GlmFamily::Gaussian => "gaussian",
            GlmFamily::Poisson => "poisson",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmOptions {
    pub family: GlmFamily,
    /// Fit on `ln(1 + y)` instead of `y`.
    pub log1p_response: bool,
    pub response_name: String,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl GlmOptions {
    pub fn new(family: GlmFamily) -> Self {
        Self { family, log1p_response: false, response_name: "y".into(), max_iterations: 100, tolerance: 1e-12 }
    }

    /// Churn model defaults: Gaussian fits use `log1p(churn)`, Poisson fits
    /// the raw counts.
    pub fn for_churn(family: GlmFamily) -> Self {
        Self { log1p_response: family == GlmFamily::Gaussian, response_name: "churn".into(), ..Self::new(family) }
    }
}

/// Iteratively reweighted least squares on a standardized copy of the
/// design; estimates are reported on the raw scale.
pub fn fit_glm(matrix: &DesignMatrix, options: &GlmOptions) -> Result<FitResult, StatsError> {
    let Response::Numeric(raw) = matrix.response() else {
        return Err(StatsError::Invalid("GLM fit needs a numeric response".into()));
    };
    if (options.family == GlmFamily::Poisson || options.log1p_response) && raw.iter().any(|&v| v < 0.0) {
        return Err(StatsError::Invalid(format!("{} must be non-negative", options.response_name)));
    }
    let y = DVector::from_iterator(raw.len(), raw.iter().map(|&v| if options.log1p_response { v.ln_1p() } else { v }));
    if y.iter().all(|&v| v == y[0]) {
        return Err(StatsError::DegenerateMatrix(format!("response {} is constant", options.response_name)));
    }
    matrix.ensure_no_constant_columns()?;

    let n = matrix.n_rows();
    let std = matrix.standardization();
    let z = std.standardized_with_intercept(matrix.x());
    let q = z.ncols();
    let fam = options.family;

    let mut mu = match fam {
        GlmFamily::Gaussian => y.clone(),
        GlmFamily::Poisson => y.map(|v| v + 0.5),
    };
    let mut eta = mu.map(|m| link(fam, m));
    let mut dev = deviance(fam, &y, &mu);
    let mut iterations = 0;
    let beta = loop {
        if iterations >= options.max_iterations {
            return Err(StatsError::NonConvergence { iterations });
        }
        iterations += 1;
        let w = mu.map(|m| weight(fam, m));
        let work = DVector::from_fn(n, |i, _| eta[i] + (y[i] - mu[i]) * link_derivative(fam, mu[i]));
        let sw = w.map(f64::sqrt);
        let zw = DMatrix::from_fn(n, q, |i, j| z[(i, j)] * sw[i]);
        let b = least_squares(&zw, &work.component_mul(&sw));
        eta = &z * &b;
        mu = eta.map(|e| inverse_link(fam, e));
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(StatsError::NonConvergence { iterations });
        }
        let next = deviance(fam, &y, &mu);
        let change = (next - dev).abs() / (next.abs() + 0.1);
        dev = next;
        if change < options.tolerance || dev == 0.0 {
            break b;
        }
    };

    let w = mu.map(|m| weight(fam, m));
    let zw = DMatrix::from_fn(n, q, |i, j| z[(i, j)] * w[i]);
    let info = z.transpose() * zw;
    let unscaled = info
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| StatsError::DegenerateMatrix("weighted cross-product matrix is singular".into()))?;
    let score = z.transpose()
        * DVector::from_fn(n, |i, _| (y[i] - mu[i]) * weight(fam, mu[i]) * link_derivative(fam, mu[i]));

    let df_resid = (n - q) as f64;
    let (dispersion, ll, extra_params) = match fam {
        GlmFamily::Gaussian => {
            let rss = dev;
            let ll = -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * rss / n as f64).ln() + 1.0);
            (rss / df_resid, ll, 1)
        }
        GlmFamily::Poisson => {
            let ll = y.iter().zip(mu.iter()).map(|(&yi, &m)| yi * m.ln() - m - ln_gamma(yi + 1.0)).sum();
            (1.0, ll, 0)
        }
    };

    let a = std.back_transform();
    let beta_raw = &a * &beta;
    let cov = &a * unscaled * a.transpose() * dispersion;
    let mut names = vec![INTERCEPT.to_string()];
    names.extend(matrix.column_names().iter().cloned());
    let terms = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let se = cov[(j, j)].max(0.0).sqrt();
            let stat = beta_raw[j] / se;
            let p = match fam {
                GlmFamily::Gaussian => t_two_sided(stat, df_resid),
                GlmFamily::Poisson => normal_two_sided(stat),
            };
            Term { name, estimate: beta_raw[j], std_error: se, z_value: stat, p_value: p }
        })
        .collect();

    let response = if options.log1p_response {
        format!("log1p({})", options.response_name)
    } else {
        options.response_name.clone()
    };
    Ok(FitResult {
        family: match fam {
            GlmFamily::Gaussian => Family::GlmGaussian,
            GlmFamily::Poisson => Family::GlmPoisson,
        },
        response: response.clone(),
        statistic: if fam == GlmFamily::Gaussian { "t".into() } else { "z".into() },
        n_obs: n,
        n_params: q,
        blocks: vec![CoefficientBlock { label: response, reference: false, terms }],
        log_likelihood: ll,
        aic: -2.0 * ll + 2.0 * (q + extra_params) as f64,
        pseudo_r2: None,
        dispersion: Some(dispersion),
        converged: true,
        iterations,
        gradient_max_norm: score.amax() / n as f64,
        fitted: mu.iter().map(|&m| vec![m]).collect(),
        log_likelihood_trace: Vec::new(),
    })
}

fn link(fam: GlmFamily, mu: f64) -> f64 {
    match fam {
        GlmFamily::Gaussian => mu,
        GlmFamily::Poisson => mu.ln(),
    }
}

fn inverse_link(fam: GlmFamily, eta: f64) -> f64 {
    match fam {
        GlmFamily::Gaussian => eta,
        GlmFamily::Poisson => eta.exp(),
    }
}

fn link_derivative(fam: GlmFamily, mu: f64) -> f64 {
    match fam {
        GlmFamily::Gaussian => 1.0,
        GlmFamily::Poisson => 1.0 / mu,
    }
}

/// IRLS weight `1 / (V(mu) g'(mu)^2)`.
fn weight(fam: GlmFamily, mu: f64) -> f64 {
    match fam {
        GlmFamily::Gaussian => 1.0,
        GlmFamily::Poisson => mu,
    }
}

fn deviance(fam: GlmFamily, y: &DVector<f64>, mu: &DVector<f64>) -> f64 {
    y.iter()
        .zip(mu.iter())
        .map(|(&yi, &m)| match fam {
            GlmFamily::Gaussian => (yi - m).powi(2),
            GlmFamily::Poisson => 2.0 * (if yi > 0.0 { yi * (yi / m).ln() } else { 0.0 } - (yi - m)),
        })
        .sum()
}
