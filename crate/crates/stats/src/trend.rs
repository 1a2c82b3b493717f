use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::result::normal_two_sided;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
    Flat,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub n: usize,
    /// Spearman correlation between the values and their position.
    pub spearman_rho: f64,
    pub mann_kendall_s: i64,
    /// Tie-corrected variance of S.
    pub mann_kendall_var: f64,
    pub mann_kendall_z: f64,
    pub p_value: f64,
    pub direction: Direction,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

/// Spearman rho of `values` against 0, 1, 2, …; 0 for a constant series.
pub fn spearman_vs_index(values: &[f64]) -> f64 {
    let idx: Vec<f64> = (1..=values.len()).map(|i| i as f64).collect();
    pearson(&average_ranks(values), &idx)
}

/// Sum of `sign(x_j − x_i)` over all `i < j`.
pub fn mann_kendall_s(values: &[f64]) -> i64 {
    let mut s = 0i64;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            s += match values[j].partial_cmp(&values[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    s
}

fn mann_kendall_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        ties += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j + 1;
    }
    (n * (n - 1.0) * (2.0 * n + 5.0) - ties) / 18.0
}

pub fn trend_summary(values: &[f64]) -> Result<TrendSummary, StatsError> {
    let n = values.len();
    if n < 3 {
        return Err(StatsError::SeriesTooShort { len: n });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::Invalid("series contains non-finite values".into()));
    }
    let s = mann_kendall_s(values);
    let var = mann_kendall_variance(values);
    let z = if var <= 0.0 || s == 0 {
        0.0
    } else if s > 0 {
        (s as f64 - 1.0) / var.sqrt()
    } else {
        (s as f64 + 1.0) / var.sqrt()
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
    Ok(TrendSummary {
        n,
        spearman_rho: spearman_vs_index(values),
        mann_kendall_s: s,
        mann_kendall_var: var,
        mann_kendall_z: z,
        p_value: normal_two_sided(z),
        direction: match s.signum() {
            1 => Direction::Increasing,
            -1 => Direction::Decreasing,
            _ => Direction::Flat,
        },
        min: sorted[0],
        max: sorted[n - 1],
        mean: values.iter().sum::<f64>() / n as f64,
        median,
    })
}
