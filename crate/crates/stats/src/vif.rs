use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::design::{with_intercept, DesignMatrix};
use crate::error::StatsError;

/// `1 − R²` below this is treated as exact collinearity.
const EXACT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vif {
    pub column: String,
    /// `f64::INFINITY` when the column is exactly collinear with others.
    pub value: f64,
    pub exact_collinear: bool,
}

/// Least-squares solution through the SVD pseudo-inverse.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let tol = svd.singular_values.max() * a.nrows().max(a.ncols()) as f64 * f64::EPSILON;
    svd.solve(b, tol).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// R² of regressing `y` on `[1 | x]`.
pub fn r_squared(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let a = with_intercept(x);
    let beta = least_squares(&a, y);
    let resid = y - &a * beta;
    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    1.0 - resid.norm_squared() / tss
}

/// Variance inflation factor of every column, regressing each
/// standardized column on all the others.
pub fn compute_vif(matrix: &DesignMatrix) -> Result<Vec<Vif>, StatsError> {
    matrix.ensure_no_constant_columns()?;
    let p = matrix.n_cols();
    let s = matrix.standardization();
    let z = s.standardized_with_intercept(matrix.x()).remove_column(0);
    (0..p)
        .map(|j| {
            let name = matrix.column_names()[j].clone();
            if p == 1 {
                return Ok(Vif { column: name, value: 1.0, exact_collinear: false });
            }
            let y: DVector<f64> = z.column(j).into();
            let others = z.clone().remove_column(j);
            let tolerance = 1.0 - r_squared(&others, &y);
            if !tolerance.is_finite() {
                return Err(StatsError::DegenerateMatrix(format!("cannot regress column {name}")));
            }
            Ok(if tolerance < EXACT_TOLERANCE {
                Vif { column: name, value: f64::INFINITY, exact_collinear: true }
            } else {
                Vif { column: name, value: 1.0 / tolerance, exact_collinear: false }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub round: usize,
    pub column: String,
    pub vif: f64,
    pub exact_collinear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningLog {
    pub threshold: f64,
    pub removals: Vec<Removal>,
    /// VIFs of the retained columns after screening.
    pub final_vif: Vec<Vif>,
    /// Protected columns left above the threshold because they were not
    /// exactly collinear.
    pub kept_above_threshold: Vec<String>,
}

impl ScreeningLog {
    pub fn to_text(&self) -> String {
        let mut out = format!("vif threshold: {}\n", self.threshold);
        if self.removals.is_empty() {
            out += "no columns removed\n";
        }
        for r in &self.removals {
            let v = if r.exact_collinear { "inf (exact collinearity)".to_string() } else { format!("{:.4}", r.vif) };
            out += &format!("round {}: removed {} (vif {v})\n", r.round, r.column);
        }
        out += "final:\n";
        for v in &self.final_vif {
            out += &format!("  {} {}\n", v.column, if v.exact_collinear { "inf".into() } else { format!("{:.4}", v.value) });
        }
        for c in &self.kept_above_threshold {
            out += &format!("kept protected column {c} above threshold\n");
        }
        out
    }
}

/// Iteratively drops the highest-VIF column while the maximum VIF exceeds
/// `threshold`. Columns named in `protected` are dropped only when exactly
/// collinear. Ties go to the later column.
pub fn screen_collinearity(
    matrix: &DesignMatrix,
    threshold: f64,
    protected: &[String],
) -> Result<(DesignMatrix, ScreeningLog), StatsError> {
    let mut current = matrix.clone();
    let mut removals = Vec::new();
    loop {
        let vifs = if current.n_cols() == 0 { Vec::new() } else { compute_vif(&current)? };
        let is_protected = |v: &Vif| protected.contains(&v.column);
        let worst = |pred: &dyn Fn(&Vif) -> bool| {
            vifs.iter()
                .enumerate()
                .filter(|(_, v)| pred(v))
                .max_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
                .map(|(i, v)| (i, v.clone()))
        };
        let pick = worst(&|v: &Vif| !is_protected(v) && v.value > threshold)
            .or_else(|| worst(&|v: &Vif| is_protected(v) && v.exact_collinear));
        match pick {
            Some((j, v)) => {
                removals.push(Removal {
                    round: removals.len() + 1,
                    column: v.column,
                    vif: v.value,
                    exact_collinear: v.exact_collinear,
                });
                current = current.without_column(j);
            }
            None => {
                let kept_above_threshold =
                    vifs.iter().filter(|v| v.value > threshold).map(|v| v.column.clone()).collect();
                let log = ScreeningLog { threshold, removals, final_vif: vifs, kept_above_threshold };
                return Ok((current, log));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::Response;

    fn design(cols: &[&[f64]], names: &[&str]) -> DesignMatrix {
        let n = cols[0].len();
        let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        DesignMatrix::new(x, names.iter().map(|s| s.to_string()).collect(), Response::Numeric(vec![0.0; n])).unwrap()
    }

    #[test]
    fn orthogonal_columns_have_unit_vif() {
        let d = design(&[&[1.0, -1.0, 1.0, -1.0], &[1.0, 1.0, -1.0, -1.0]], &["a", "b"]);
        for v in compute_vif(&d).unwrap() {
            assert!((v.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_copy_is_flagged() {
        let d = design(&[&[1.0, 2.0, 4.0, 3.0], &[2.0, 4.0, 8.0, 6.0], &[0.0, 1.0, 0.0, 2.0]], &["a", "b", "c"]);
        let v = compute_vif(&d).unwrap();
        assert!(v[0].exact_collinear && v[1].exact_collinear && !v[2].exact_collinear);
        assert!(v[0].value.is_infinite());
    }

    #[test]
    fn below_threshold_is_unchanged() {
        let d = design(&[&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 6.0]], &["a", "b"]);
        let (kept, log) = screen_collinearity(&d, 10.0, &[]).unwrap();
        assert_eq!(kept, d);
        assert!(log.removals.is_empty());
    }

    #[test]
    fn duplicate_control_removed_once() {
        let a = [1.0, 2.0, 0.0, 5.0, 3.0, 1.0];
        let b = [0.0, 1.0, 1.0, 0.0, 2.0, 7.0];
        let d = design(&[&b, &a, &a], &["spec_inheritance", "loc", "loc_copy"]);
        let (kept, log) = screen_collinearity(&d, 10.0, &["spec_inheritance".to_string()]).unwrap();
        assert_eq!(kept.column_names(), ["spec_inheritance".to_string(), "loc".to_string()]);
        assert_eq!(log.removals.len(), 1);
        assert!(log.removals[0].exact_collinear);
    }

    #[test]
    fn protected_column_kept_unless_exact() {
        let a = [1.0, 2.0, 0.0, 5.0, 3.0, 1.0];
        let b = [0.0, 1.0, 1.0, 0.0, 2.0, 7.0];
        let d = design(&[&a, &b, &a], &["spec_inheritance", "delegation", "impl_inheritance"]);
        let protected: Vec<String> = ["spec_inheritance", "impl_inheritance", "delegation"].map(String::from).to_vec();
        let (kept, log) = screen_collinearity(&d, 10.0, &protected).unwrap();
        assert_eq!(kept.column_names(), ["spec_inheritance".to_string(), "delegation".to_string()]);
        assert_eq!(log.removals[0].column, "impl_inheritance");
    }
}
