//! Seeded data generators with known parameters.

use nalgebra::DMatrix;
use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, Poisson, StandardNormal};
use reuselens_core::history::{classify_bug_delta, PanelRow};
use reuselens_core::Metric;

use crate::design::{DesignMatrix, Response};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sample_class(rng: &mut ChaCha8Rng, eta: &[f64]) -> usize {
    let m = eta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = eta.iter().map(|e| (e - m).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (k, wk) in w.iter().enumerate() {
        if u < *wk {
            return k;
        }
        u -= wk;
    }
    w.len() - 1
}

/// `n` rows of standard-normal predictors with a categorical response drawn
/// from the softmax of `coefficients` (one row per class, intercept first;
/// the `reference` row should be zero).
pub fn multinomial_sample(n: usize, coefficients: &DMatrix<f64>, reference: usize, seed: u64) -> DesignMatrix {
    let mut r = rng(seed);
    let (k, q) = coefficients.shape();
    let p = q - 1;
    let x = DMatrix::from_fn(n, p, |_, _| r.sample::<f64, _>(StandardNormal));
    let labels = (0..n)
        .map(|i| {
            let eta: Vec<f64> = (0..k)
                .map(|c| coefficients[(c, 0)] + (0..p).map(|j| coefficients[(c, j + 1)] * x[(i, j)]).sum::<f64>())
                .collect();
            sample_class(&mut r, &eta)
        })
        .collect();
    let classes = (0..k).map(|c| format!("class{c}")).collect();
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    DesignMatrix::new(x, names, Response::Categorical { labels, classes, reference })
        .expect("generated design is valid")
}

/// Poisson counts with `log E[y] = intercept + slopes · x`, x standard normal.
pub fn poisson_sample(n: usize, intercept: f64, slopes: &[f64], seed: u64) -> DesignMatrix {
    let mut r = rng(seed);
    let p = slopes.len();
    let x = DMatrix::from_fn(n, p, |_, _| r.sample::<f64, _>(StandardNormal));
    let y = (0..n)
        .map(|i| {
            let rate = (intercept + (0..p).map(|j| slopes[j] * x[(i, j)]).sum::<f64>()).exp();
            Poisson::new(rate).expect("positive rate").sample(&mut r)
        })
        .collect();
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    DesignMatrix::new(x, names, Response::Numeric(y)).expect("generated design is valid")
}

/// Standard-normal columns with common pairwise correlation `rho`.
pub fn equicorrelated(n: usize, p: usize, rho: f64, seed: u64) -> DesignMatrix {
    let mut r = rng(seed);
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let common: f64 = r.sample(StandardNormal);
        for j in 0..p {
            let own: f64 = r.sample(StandardNormal);
            x[(i, j)] = a * common + b * own;
        }
    }
    let names = (1..=p).map(|j| format!("x{j}")).collect();
    DesignMatrix::new(x, names, Response::Numeric(vec![0.0; n])).expect("generated design is valid")
}

/// Generative coefficients of [`synthetic_panel`] on the raw scale, in
/// bug-delta class order (decrease, stable, increase). Columns are the
/// intercept followed by the ten metric sums and churn.
pub fn synthetic_panel_truth() -> DMatrix<f64> {
    let mut t = DMatrix::zeros(3, 12);
    t[(0, 0)] = -0.5;
    t[(0, 1)] = 0.015;
    t[(0, 2)] = -0.02;
    t[(2, 0)] = -1.0;
    t[(2, 1)] = -0.01;
    t[(2, 2)] = 0.025;
    t[(2, 3)] = 0.02;
    t
}

/// Panel rows with independent metric levels and bug-delta labels drawn
/// from the softmax model in [`synthetic_panel_truth`].
pub fn synthetic_panel(n: usize, seed: u64) -> Vec<PanelRow> {
    let mut r = rng(seed);
    let truth = synthetic_panel_truth();
    let ranges: [(u64, u64); 10] =
        [(20, 120), (0, 60), (10, 90), (10, 60), (5, 40), (2000, 9000), (50, 400), (100, 600), (200, 1500), (30, 200)];
    let churn_dist = Normal::new(200.0, 60.0).expect("valid normal");
    let n_classes = 50usize;
    let mut prev = [0u64; 10];
    (0..n)
        .map(|i| {
            let sums: [u64; 10] = ranges.map(|(lo, hi)| r.gen_range(lo..=hi));
            let churn = f64::round(churn_dist.sample(&mut r)).max(0.0) as u64;
            let mut xs: Vec<f64> = sums.iter().map(|&s| s as f64).collect();
            xs.push(churn as f64);
            let eta: Vec<f64> =
                (0..3).map(|c| truth[(c, 0)] + xs.iter().enumerate().map(|(j, v)| truth[(c, j + 1)] * v).sum::<f64>()).collect();
            let class = sample_class(&mut r, &eta);
            let bugs_from = 5;
            let bugs_to = [4, 5, 6][class];
            let mut d = [0i64; 3];
            for (k, m) in Metric::REUSE.iter().enumerate() {
                d[k] = sums[m.index()] as i64 - prev[m.index()] as i64;
            }
            prev = sums;
            PanelRow {
                project: "synthetic".into(),
                from_commit: format!("s{:05}", i),
                to_commit: format!("s{:05}", i + 1),
                to_index: i + 1,
                n_classes,
                sums,
                means: sums.map(|s| s as f64 / n_classes as f64),
                reuse_delta_sum: d,
                reuse_delta_mean: d.map(|v| v as f64 / n_classes as f64),
                churn,
                bugs_from,
                bugs_to,
                label: classify_bug_delta(bugs_from, bugs_to),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seeded() {
        assert_eq!(equicorrelated(50, 3, 0.5, 7), equicorrelated(50, 3, 0.5, 7));
        assert_ne!(equicorrelated(50, 3, 0.5, 7), equicorrelated(50, 3, 0.5, 8));
        assert_eq!(synthetic_panel(20, 1), synthetic_panel(20, 1));
    }

    #[test]
    fn panel_labels_follow_bug_counts() {
        for row in synthetic_panel(200, 3) {
            assert_eq!(row.label, classify_bug_delta(row.bugs_from, row.bugs_to));
        }
    }
}
