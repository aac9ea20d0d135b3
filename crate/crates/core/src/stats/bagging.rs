use std::io::Write;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bonferroni, spearman, FeatureMatrix};
use crate::error::{Error, Result};
use crate::models::{fit_forest, ForestParams, Target, Task};
use crate::seed;

/// Value substituted for nulls before forest fitting. Features are
/// non-negative (frequencies, indicators, counts), so -1 sorts nulls to
/// one side of every split.
pub const NULL_FILL: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaggingParams {
    pub replicates: usize,
    /// Rows per replicate; drawn with replacement when larger than the
    /// number of usable rows.
    pub sample_size: usize,
    /// `None` picks classification for 0/1 targets, regression otherwise.
    pub task: Option<Task>,
    pub forest: ForestParams,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BaggingParams {
    fn default() -> Self {
        Self {
            replicates: 1000,
            sample_size: 5000,
            task: None,
            forest: ForestParams::default(),
            alpha: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub mean: f64,
    /// Population standard deviation over replicates.
    pub std: f64,
    /// Spearman rho against the target; `None` for constant columns.
    pub coefficient: Option<f64>,
    pub p_value: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSummary {
    pub task: Task,
    pub replicates: usize,
    pub sample_size: usize,
    pub rows: usize,
    pub alpha: f64,
    /// Number of features with a Spearman p-value (the Bonferroni m).
    pub tested: usize,
    pub features: Vec<FeatureImportance>,
}

impl ImportanceSummary {
    pub fn get(&self, feature: &str) -> Option<&FeatureImportance> {
        self.features.iter().find(|f| f.feature == feature)
    }

    /// Features ordered by decreasing mean importance.
    pub fn ranked(&self) -> Vec<&FeatureImportance> {
        let mut v: Vec<&FeatureImportance> = self.features.iter().collect();
        v.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.feature.cmp(&b.feature)));
        v
    }

    /// CSV with columns feature,mean,std,coefficient,p,significant, ranked
    /// by mean importance; untestable coefficients are empty fields.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["feature", "mean", "std", "coefficient", "p", "significant"])?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for f in self.ranked() {
            w.write_record([
                f.feature.clone(),
                f.mean.to_string(),
                f.std.to_string(),
                opt(f.coefficient),
                opt(f.p_value),
                f.significant.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Mean and spread of forest importances over bootstrap replicates, with
/// per-feature Spearman correlations and Bonferroni flags. Rows with a
/// null (NaN) target are dropped; null features are filled with
/// [`NULL_FILL`] for the forests and pairwise-deleted for Spearman.
pub fn bag_importances(
    matrix: &FeatureMatrix,
    target: &[f64],
    params: &BaggingParams,
) -> Result<ImportanceSummary> {
    if target.len() != matrix.rows() {
        return Err(Error::invalid(format!(
            "{} targets for {} rows",
            target.len(),
            matrix.rows()
        )));
    }
    if matrix.cols() == 0 {
        return Err(Error::invalid("no features to rank"));
    }
    if params.replicates == 0 || params.sample_size < 2 {
        return Err(Error::invalid("bagging needs replicates >= 1 and sample_size >= 2"));
    }
    let keep: Vec<usize> = (0..target.len()).filter(|&i| !target[i].is_nan()).collect();
    let y: Vec<f64> = keep.iter().map(|&i| target[i]).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("target contains infinite values"));
    }
    if y.len() < 2 || y.iter().all(|&v| v == y[0]) {
        return Err(Error::invalid("target is constant; nothing to rank against"));
    }
    let task = params.task.unwrap_or(if y.iter().all(|&v| v == 0.0 || v == 1.0) {
        Task::Classification
    } else {
        Task::Regression
    });
    let labels: Vec<bool> = y.iter().map(|&v| v != 0.0).collect();
    let x = matrix.select_rows(&keep).to_dense(NULL_FILL);
    let rows = x.rows();

    let runs: Vec<Vec<f64>> = (0..params.replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<f64>> {
            let rep_seed = seed::derive(params.seed, r as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
            let idx: Vec<usize> = if params.sample_size <= rows {
                sample(&mut rng, rows, params.sample_size).into_vec()
            } else {
                (0..params.sample_size).map(|_| rng.gen_range(0..rows)).collect()
            };
            let xs = x.select_rows(&idx);
            let forest_params = ForestParams {
                seed: rep_seed,
                ..params.forest
            };
            let model = match task {
                Task::Classification => {
                    let ys: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
                    fit_forest(&xs, Target::Labels(&ys), &forest_params)?
                }
                Task::Regression => {
                    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
                    fit_forest(&xs, Target::Values(&ys), &forest_params)?
                }
            };
            Ok(model.importances)
        })
        .collect::<Result<_>>()?;

    let n = runs.len() as f64;
    let mut features: Vec<FeatureImportance> = matrix
        .names()
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mean = runs.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = runs.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            let column: Vec<f64> = keep.iter().map(|&i| matrix.column(j)[i]).collect();
            let (coefficient, p_value) = match spearman(&column, &y) {
                Ok(s) => (Some(s.rho), Some(s.p_value)),
                Err(_) => (None, None),
            };
            FeatureImportance {
                feature: name.clone(),
                mean,
                std: var.sqrt(),
                coefficient,
                p_value,
                significant: false,
            }
        })
        .collect();

    let tested: Vec<usize> = (0..features.len())
        .filter(|&j| features[j].p_value.is_some())
        .collect();
    if !tested.is_empty() {
        let ps: Vec<f64> = tested.iter().map(|&j| features[j].p_value.unwrap()).collect();
        for (&j, flag) in tested.iter().zip(bonferroni(&ps, params.alpha)?) {
            features[j].significant = flag;
        }
    }
    Ok(ImportanceSummary {
        task,
        replicates: params.replicates,
        sample_size: params.sample_size,
        rows,
        alpha: params.alpha,
        tested: tested.len(),
        features,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Provenance;

    fn noise_matrix(rows: usize, cols: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = FeatureMatrix::new(rows);
        for j in 0..cols {
            let col: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.0..1.0)).collect();
            m.push_column(format!("x{j}"), Provenance::RawNumeric, col).unwrap();
        }
        m
    }

    fn small(replicates: usize) -> BaggingParams {
        BaggingParams {
            replicates,
            sample_size: 300,
            forest: ForestParams {
                n_trees: 10,
                max_samples: Some(200),
                ..ForestParams::default()
            },
            seed: 9,
            ..BaggingParams::default()
        }
    }

    #[test]
    fn copied_feature_dominates() {
        let m = noise_matrix(600, 3, 1);
        let target: Vec<f64> = m.column(1).to_vec();
        let s = bag_importances(&m, &target, &small(50)).unwrap();
        assert_eq!(s.task, Task::Regression);
        assert!(s.get("x1").unwrap().mean > 0.9, "{:?}", s.features);
        assert!(s.get("x1").unwrap().significant);
        assert_eq!(s.ranked()[0].feature, "x1");
    }

    #[test]
    fn pure_noise_shares_importance() {
        let m = noise_matrix(600, 3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let target: Vec<f64> = (0..600).map(|_| f64::from(u8::from(rng.gen_bool(0.5)))).collect();
        let s = bag_importances(&m, &target, &small(50)).unwrap();
        assert_eq!(s.task, Task::Classification);
        for f in &s.features {
            assert!((f.mean - 1.0 / 3.0).abs() < 0.1, "{f:?}");
        }
        let total: f64 = s.features.iter().map(|f| f.mean).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_replicate_has_zero_spread() {
        let m = noise_matrix(200, 2, 4);
        let target: Vec<f64> = m.column(0).iter().map(|v| v * 2.0).collect();
        let s = bag_importances(&m, &target, &small(1)).unwrap();
        assert!(s.features.iter().all(|f| f.std == 0.0));
    }

    #[test]
    fn constant_target_is_error() {
        let m = noise_matrix(50, 2, 5);
        assert!(bag_importances(&m, &[1.0; 50], &small(2)).is_err());
    }

    #[test]
    fn seeded_and_csv_shaped() {
        let m = noise_matrix(200, 3, 6);
        let target: Vec<f64> = m.column(2).iter().map(|v| (v > &0.5) as u8 as f64).collect();
        let a = bag_importances(&m, &target, &small(4)).unwrap();
        let b = bag_importances(&m, &target, &small(4)).unwrap();
        assert_eq!(a, b);
        let mut out = Vec::new();
        a.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "feature,mean,std,coefficient,p,significant");
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn null_target_rows_dropped_and_constant_column_untested() {
        let mut m = noise_matrix(100, 1, 7);
        m.push_column("flat", Provenance::RawNumeric, vec![0.5; 100]).unwrap();
        let mut target: Vec<f64> = m.column(0).to_vec();
        target[0] = f64::NAN;
        let s = bag_importances(&m, &target, &small(2)).unwrap();
        assert_eq!(s.rows, 99);
        assert_eq!(s.tested, 1);
        let flat = s.get("flat").unwrap();
        assert_eq!((flat.coefficient, flat.significant, flat.mean), (None, false, 0.0));
    }
}
