use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

use super::FeatureMatrix;

/// Pairs where both values are present.
fn complete_pairs(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    x.iter()
        .zip(y)
        .filter(|(a, b)| !a.is_nan() && !b.is_nan())
        .map(|(a, b)| (*a, *b))
        .unzip()
}

fn pearson_complete(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation under pairwise deletion of nulls (`NaN`).
/// `None` when fewer than two complete pairs remain or either side is
/// constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (x, y) = complete_pairs(x, y);
    pearson_complete(&x, &y)
}

fn has_variance(col: &[f64]) -> bool {
    let mut present = col.iter().filter(|v| !v.is_nan());
    match present.next() {
        Some(first) => present.any(|v| v != first),
        None => false,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PruneReport {
    pub kept: Vec<String>,
    pub dropped_constant: Vec<String>,
    /// (dropped column, earlier survivor it correlates with, r)
    pub dropped_correlated: Vec<(String, String, f64)>,
}

/// Drops zero-variance columns, then scans columns in order and drops any
/// column whose |r| with an earlier survivor exceeds `threshold`.
pub fn prune_correlated_detailed(matrix: &FeatureMatrix, threshold: f64) -> (FeatureMatrix, PruneReport) {
    let mut report = PruneReport::default();
    let mut survivors: Vec<usize> = Vec::new();
    'columns: for j in 0..matrix.cols() {
        let col = matrix.column(j);
        if !has_variance(col) {
            report.dropped_constant.push(matrix.names()[j].clone());
            continue;
        }
        for &k in &survivors {
            if let Some(r) = pearson(col, matrix.column(k)) {
                if r.abs() > threshold {
                    report.dropped_correlated.push((
                        matrix.names()[j].clone(),
                        matrix.names()[k].clone(),
                        r,
                    ));
                    continue 'columns;
                }
            }
        }
        survivors.push(j);
    }
    report.kept = survivors.iter().map(|&j| matrix.names()[j].clone()).collect();
    (matrix.select_columns(&survivors), report)
}

pub fn prune_correlated(matrix: &FeatureMatrix, threshold: f64) -> FeatureMatrix {
    prune_correlated_detailed(matrix, threshold).0
}

/// 1-based ranks; tied values share the mean of their positions.
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
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpearmanResult {
    pub rho: f64,
    /// Two-sided p-value from the t approximation with n − 2 degrees of
    /// freedom.
    pub p_value: f64,
    pub n: usize,
}

fn two_sided_t(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, dof).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Spearman rank correlation with average ranks for ties and pairwise
/// deletion of nulls.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<SpearmanResult> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "spearman inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let (x, y) = complete_pairs(x, y);
    let n = x.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "spearman needs at least 3 complete pairs, got {n}"
        )));
    }
    let (rx, ry) = (average_ranks(&x), average_ranks(&y));
    let rho = pearson_complete(&rx, &ry)
        .ok_or_else(|| Error::Undefined("an input column is constant".into()))?;
    // Without ties the rank-difference form is exact in floating point.
    let distinct = |r: &[f64]| r.iter().all(|v| v.fract() == 0.0) && {
        let mut seen = vec![false; n];
        r.iter().all(|&v| !std::mem::replace(&mut seen[v as usize - 1], true))
    };
    let rho = if distinct(&rx) && distinct(&ry) {
        let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
        let nf = n as f64;
        1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0))
    } else {
        rho
    };
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let dof = (n - 2) as f64;
        two_sided_t(rho * (dof / (1.0 - rho * rho)).sqrt(), dof)
    };
    Ok(SpearmanResult { rho, p_value, n })
}

/// Bonferroni flags: `p_i < alpha / m` with `m` the number of tests.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Result<Vec<bool>> {
    if p_values.is_empty() {
        return Err(Error::invalid("bonferroni correction of an empty list"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {alpha} is not in (0, 1)")));
    }
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("p-value {p} is not in [0, 1]")));
    }
    let threshold = alpha / p_values.len() as f64;
    Ok(p_values.iter().map(|&p| p < threshold).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Welch's unequal-variance two-sample t test (two-sided).
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("welch test needs two observations per sample"));
    }
    let moments = |s: &[f64]| {
        let n = s.len() as f64;
        let m = s.iter().sum::<f64>() / n;
        let v = s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (n, m, v)
    };
    let (na, ma, va) = moments(a);
    let (nb, mb, vb) = moments(b);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        let p_value = if ma == mb { 1.0 } else { 0.0 };
        let t = if ma == mb { 0.0 } else { f64::INFINITY };
        return Ok(WelchResult { t, dof: na + nb - 2.0, p_value });
    }
    let t = (ma - mb) / se2.sqrt();
    let dof = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchResult {
        t,
        dof,
        p_value: two_sided_t(t, dof),
    })
}
