use nalgebra::{DMatrix, DVector};

use crate::design::{DesignMatrix, Response};
use crate::error::StatsError;
use crate::result::{normal_two_sided, CoefficientBlock, Family, FitResult, Term};

pub const INTERCEPT: &str = "(intercept)";

/// Multinomial logit log-likelihood over a fixed design `z` (intercept
/// included). Parameters are stacked per non-reference class, in class
/// order, each block holding one coefficient per column of `z`.
#[derive(Debug, Clone)]
pub struct MultinomialObjective {
    z: DMatrix<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    reference: usize,
}

impl MultinomialObjective {
    pub fn new(z: DMatrix<f64>, labels: Vec<usize>, n_classes: usize, reference: usize) -> Self {
        Self { z, labels, n_classes, reference }
    }

    pub fn n_params(&self) -> usize {
        (self.n_classes - 1) * self.z.ncols()
    }

    fn free_classes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_classes).filter(move |&k| k != self.reference)
    }

    /// n × K matrix of linear predictors; the reference column is zero.
    fn linear(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let q = self.z.ncols();
        let mut eta = DMatrix::zeros(self.z.nrows(), self.n_classes);
        for (b, k) in self.free_classes().enumerate() {
            let beta = theta.rows(b * q, q);
            eta.set_column(k, &(&self.z * beta));
        }
        eta
    }

    /// Softmax class probabilities, n × K.
    pub fn probabilities(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let mut p = self.linear(theta);
        for mut row in p.row_iter_mut() {
            let m = row.max();
            row.apply(|v| *v = (*v - m).exp());
            let s = row.sum();
            row /= s;
        }
        p
    }

    pub fn log_likelihood(&self, theta: &DVector<f64>) -> f64 {
        let eta = self.linear(theta);
        eta.row_iter()
            .zip(&self.labels)
            .map(|(row, &y)| {
                let m = row.max();
                row[y] - m - row.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
            })
            .sum()
    }

    pub fn gradient(&self, theta: &DVector<f64>) -> DVector<f64> {
        let p = self.probabilities(theta);
        let q = self.z.ncols();
        let mut g = DVector::zeros(self.n_params());
        for (b, k) in self.free_classes().enumerate() {
            let resid = DVector::from_fn(self.z.nrows(), |i, _| f64::from(self.labels[i] == k) - p[(i, k)]);
            g.rows_mut(b * q, q).copy_from(&(self.z.transpose() * resid));
        }
        g
    }

    pub fn hessian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let p = self.probabilities(theta);
        self.hessian_at(&p)
    }

    fn hessian_at(&self, p: &DMatrix<f64>) -> DMatrix<f64> {
        let q = self.z.ncols();
        let free: Vec<usize> = self.free_classes().collect();
        let mut h = DMatrix::zeros(self.n_params(), self.n_params());
        let zt = self.z.transpose();
        for (a, &ka) in free.iter().enumerate() {
            for (b, &kb) in free.iter().enumerate().skip(a) {
                let mut zw = self.z.clone();
                for (i, mut row) in zw.row_iter_mut().enumerate() {
                    let w = p[(i, ka)] * (f64::from(ka == kb) - p[(i, kb)]);
                    row *= -w;
                }
                let block = &zt * zw;
                h.view_mut((a * q, b * q), (q, q)).copy_from(&block);
                if a != b {
                    h.view_mut((b * q, a * q), (q, q)).copy_from(&block.transpose());
                }
            }
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultinomialOptions {
    pub max_iterations: usize,
    /// Bound on the max-norm of the mean score on the standardized design.
    pub tolerance: f64,
    /// Standardized slope magnitude taken as evidence of separation.
    pub divergence_bound: f64,
}

impl Default for MultinomialOptions {
    fn default() -> Self {
        Self { max_iterations: 500, tolerance: 1e-8, divergence_bound: 30.0 }
    }
}

pub fn fit_multinomial(matrix: &DesignMatrix) -> Result<FitResult, StatsError> {
    fit_multinomial_with(matrix, &MultinomialOptions::default())
}

/// Maximum-likelihood softmax regression by damped Newton iterations on a
/// standardized copy of the design; estimates are reported on the raw
/// scale.
pub fn fit_multinomial_with(matrix: &DesignMatrix, options: &MultinomialOptions) -> Result<FitResult, StatsError> {
    let Response::Categorical { labels, classes, reference } = matrix.response() else {
        return Err(StatsError::Invalid("multinomial fit needs a categorical response".into()));
    };
    matrix.ensure_no_constant_columns()?;
    let n = matrix.n_rows();
    let p = matrix.n_cols();
    let k = classes.len();
    let counts: Vec<usize> = (0..k).map(|c| labels.iter().filter(|&&l| l == c).count()).collect();
    for (c, &count) in counts.iter().enumerate() {
        if count < p + 1 {
            return Err(StatsError::InsufficientData(format!(
                "class {} has {count} observations, need at least {}",
                classes[c],
                p + 1
            )));
        }
    }

    let std = matrix.standardization();
    let z = std.standardized_with_intercept(matrix.x());
    let q = p + 1;
    let obj = MultinomialObjective::new(z, labels.clone(), k, *reference);
    let free: Vec<usize> = (0..k).filter(|&c| c != *reference).collect();

    let mut theta = DVector::zeros(obj.n_params());
    for (b, &c) in free.iter().enumerate() {
        theta[b * q] = (counts[c] as f64 / counts[*reference] as f64).ln();
    }

    let mut ll = obj.log_likelihood(&theta);
    let mut trace = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    let mut grad = obj.gradient(&theta);
    loop {
        if grad.amax() / n as f64 <= options.tolerance {
            converged = true;
            break;
        }
        if iterations >= options.max_iterations {
            break;
        }
        iterations += 1;
        let info = -obj.hessian(&theta);
        let Some(chol) = info.clone().cholesky() else {
            return Err(StatsError::Separation("information matrix is singular".into()));
        };
        let step = chol.solve(&grad);
        let mut t = 1.0;
        let mut next = &theta + &step;
        let mut next_ll = obj.log_likelihood(&next);
        let mut halvings = 0;
        while !(next_ll >= ll) && halvings < 40 {
            t *= 0.5;
            halvings += 1;
            next = &theta + &step * t;
            next_ll = obj.log_likelihood(&next);
        }
        if !(next_ll >= ll) {
            break;
        }
        theta = next;
        ll = next_ll;
        trace.push(ll);
        grad = obj.gradient(&theta);
        check_separation(&obj, &theta, q, options)?;
    }

    let probs = obj.probabilities(&theta);
    let info = -obj.hessian_at(&probs);
    let cov = info
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| StatsError::Separation("information matrix is singular at the optimum".into()))?;
    let max_se = (0..obj.n_params()).map(|i| cov[(i, i)].sqrt()).fold(0.0, f64::max);
    if !max_se.is_finite() || max_se > 1e4 {
        return Err(StatsError::Separation(format!("standard errors diverge (max {max_se:.3e} on standardized scale)")));
    }

    let a = std.back_transform();
    let mut names = vec![INTERCEPT.to_string()];
    names.extend(matrix.column_names().iter().cloned());
    let mut blocks = Vec::with_capacity(k);
    for c in 0..k {
        let Some(b) = free.iter().position(|&f| f == c) else {
            let terms = names
                .iter()
                .map(|nm| Term { name: nm.clone(), estimate: 0.0, std_error: f64::NAN, z_value: f64::NAN, p_value: f64::NAN })
                .collect();
            blocks.push(CoefficientBlock { label: classes[c].clone(), reference: true, terms });
            continue;
        };
        let beta = &a * theta.rows(b * q, q);
        let cov_raw = &a * cov.view((b * q, b * q), (q, q)) * a.transpose();
        let terms = names
            .iter()
            .enumerate()
            .map(|(j, nm)| {
                let se = cov_raw[(j, j)].sqrt();
                let zv = beta[j] / se;
                Term { name: nm.clone(), estimate: beta[j], std_error: se, z_value: zv, p_value: normal_two_sided(zv) }
            })
            .collect();
        blocks.push(CoefficientBlock { label: classes[c].clone(), reference: false, terms });
    }

    let ll0: f64 = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 * (c as f64 / n as f64).ln()).sum();
    let n_params = obj.n_params();
    Ok(FitResult {
        family: Family::Multinomial,
        response: "bug_delta".into(),
        statistic: "z".into(),
        n_obs: n,
        n_params,
        blocks,
        log_likelihood: ll,
        aic: -2.0 * ll + 2.0 * n_params as f64,
        pseudo_r2: Some(if ll0 < 0.0 { 1.0 - ll / ll0 } else { f64::NAN }),
        dispersion: None,
        converged,
        iterations,
        gradient_max_norm: grad.amax() / n as f64,
        fitted: probs.row_iter().map(|r| r.iter().copied().collect()).collect(),
        log_likelihood_trace: trace,
    })
}

fn check_separation(
    obj: &MultinomialObjective,
    theta: &DVector<f64>,
    q: usize,
    options: &MultinomialOptions,
) -> Result<(), StatsError> {
    let slope_max =
        theta.iter().enumerate().filter(|(i, _)| i % q != 0).map(|(_, v)| v.abs()).fold(0.0, f64::max);
    if slope_max > options.divergence_bound {
        return Err(StatsError::Separation(format!(
            "standardized coefficient norm diverging ({slope_max:.1})"
        )));
    }
    let p = obj.probabilities(theta);
    let worst = obj.labels.iter().enumerate().map(|(i, &y)| p[(i, y)]).fold(1.0, f64::min);
    if worst > 1.0 - 1e-8 {
        return Err(StatsError::Separation("every observation is fitted with probability one".into()));
    }
    Ok(())
}
