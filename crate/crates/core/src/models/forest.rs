use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, DecisionTree, TreeParams};
use super::{Classifier, Matrix};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

/// Training targets: 0/1 labels for classification, reals for regression.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Labels(&'a [bool]),
    Values(&'a [f64]),
}

impl Target<'_> {
    pub fn task(&self) -> Task {
        match self {
            Target::Labels(_) => Task::Classification,
            Target::Values(_) => Task::Regression,
        }
    }

    fn len(&self) -> usize {
        match self {
            Target::Labels(y) => y.len(),
            Target::Values(y) => y.len(),
        }
    }

    fn to_f64(self) -> Vec<f64> {
        match self {
            Target::Labels(y) => y.iter().map(|&b| f64::from(u8::from(b))).collect(),
            Target::Values(y) => y.to_vec(),
        }
    }
}

/// Features considered at each split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// sqrt for classification, all for regression
    Auto,
    Sqrt,
    All,
    Count(usize),
    Fraction(f64),
}

impl MaxFeatures {
    fn resolve(self, n_features: usize, task: Task) -> usize {
        let k = match self {
            MaxFeatures::Auto => match task {
                Task::Classification => return MaxFeatures::Sqrt.resolve(n_features, task),
                Task::Regression => n_features,
            },
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(k) => k,
            MaxFeatures::Fraction(f) => (f * n_features as f64).floor() as usize,
        };
        k.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Rows drawn per tree, capped at the training size; `None` draws all.
    pub max_samples: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    /// Draw per-tree rows with replacement.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_samples: Some(1000),
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Auto,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub task: Task,
    pub trees: Vec<DecisionTree>,
    pub max_samples: Option<usize>,
    /// Mean of per-tree normalized impurity decreases, renormalized to sum
    /// to 1. All zero when no tree split.
    pub importances: Vec<f64>,
}

impl ForestModel {
    /// Mean leaf value across trees: a grant probability for
    /// classification, a prediction for regression.
    pub fn predict_value(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(row)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn predict_values(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|i| self.predict_value(x.row(i))).collect()
    }

    pub fn n_features(&self) -> usize {
        self.importances.len()
    }

    pub fn has_splits(&self) -> bool {
        self.trees.iter().any(|t| t.split_count() > 0)
    }
}

impl Classifier for ForestModel {
    fn predict_row(&self, row: &[f64]) -> bool {
        self.predict_value(row) >= 0.5
    }
}

pub fn fit_forest(x: &Matrix, target: Target<'_>, params: &ForestParams) -> Result<ForestModel> {
    let rows = x.rows();
    if rows < 2 {
        return Err(Error::invalid(format!("forest needs at least 2 rows, got {rows}")));
    }
    if target.len() != rows {
        return Err(Error::invalid(format!(
            "{} targets for {rows} rows",
            target.len()
        )));
    }
    if x.cols() == 0 {
        return Err(Error::invalid("forest needs at least one feature"));
    }
    if params.n_trees == 0 {
        return Err(Error::invalid("forest needs at least one tree"));
    }
    x.ensure_finite()?;
    let task = target.task();
    let y = target.to_f64();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("regression target contains non-finite values"));
    }
    let draw = params.max_samples.map_or(rows, |m| m.clamp(1, rows));
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
        min_samples_leaf: params.min_samples_leaf,
        features_per_split: params.max_features.resolve(x.cols(), task),
    };

    let fitted: Vec<(DecisionTree, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(params.seed, t as u64));
            let rows_for_tree: Vec<usize> = if params.bootstrap {
                (0..draw).map(|_| rng.gen_range(0..rows)).collect()
            } else {
                sample(&mut rng, rows, draw).into_vec()
            };
            grow_tree(x, &y, rows_for_tree, task, tree_params, &mut rng)
        })
        .collect();

    let mut importances = vec![0.0; x.cols()];
    let mut trees = Vec::with_capacity(fitted.len());
    for (tree, imp) in fitted {
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            for (acc, v) in importances.iter_mut().zip(&imp) {
                *acc += v / total;
            }
        }
        trees.push(tree);
    }
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        importances.iter_mut().for_each(|v| *v /= total);
    }
    Ok(ForestModel {
        task,
        trees,
        max_samples: params.max_samples,
        importances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn noise_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn threshold_feature_dominates_importance() {
        let rows = noise_matrix(400, 2, 1);
        let y: Vec<bool> = rows.iter().map(|r| r[0] > 0.0).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let params = ForestParams {
            n_trees: 50,
            max_features: MaxFeatures::All,
            seed: 3,
            ..Default::default()
        };
        let model = fit_forest(&x, Target::Labels(&y), &params).unwrap();
        assert!(model.importances[0] >= 0.9, "{:?}", model.importances);
        assert!((model.importances.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let acc = model.predict(&x).iter().zip(&y).filter(|(a, b)| a == b).count();
        assert!(acc as f64 / 400.0 > 0.98);
    }

    #[test]
    fn constant_labels_give_single_leaves() {
        let x = Matrix::from_rows(&noise_matrix(50, 3, 2)).unwrap();
        let y = vec![true; 50];
        let model = fit_forest(&x, Target::Labels(&y), &ForestParams::default()).unwrap();
        assert!(!model.has_splits());
        assert!(model.predict(&x).iter().all(|&p| p));
        assert!(model.importances.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_deep_tree_memorizes_identity() {
        let rows: Vec<Vec<f64>> = (0..300).map(|i| vec![i as f64 * 0.37]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let params = ForestParams {
            n_trees: 1,
            max_samples: None,
            bootstrap: false,
            ..Default::default()
        };
        let model = fit_forest(&x, Target::Values(&y), &params).unwrap();
        let pred = model.predict_values(&x);
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        let ss_res: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum();
        assert!(1.0 - ss_res / ss_tot >= 0.99);
    }

    #[test]
    fn seeded_fits_are_identical() {
        let rows = noise_matrix(200, 4, 5);
        let y: Vec<bool> = rows.iter().map(|r| r[1] + r[2] > 0.2).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let params = ForestParams {
            n_trees: 10,
            seed: 11,
            ..Default::default()
        };
        let a = fit_forest(&x, Target::Labels(&y), &params).unwrap();
        let b = fit_forest(&x, Target::Labels(&y), &params).unwrap();
        assert_eq!(a, b);
        let c = fit_forest(&x, Target::Labels(&y), &ForestParams { seed: 12, ..params }).unwrap();
        assert_ne!(a.trees, c.trees);
    }

    #[test]
    fn per_tree_cap_limits_root_samples() {
        let x = Matrix::from_rows(&noise_matrix(500, 2, 6)).unwrap();
        let y: Vec<bool> = (0..500).map(|i| i % 3 == 0).collect();
        let params = ForestParams {
            n_trees: 3,
            max_samples: Some(100),
            ..Default::default()
        };
        let model = fit_forest(&x, Target::Labels(&y), &params).unwrap();
        for t in &model.trees {
            let root = match &t.nodes[0] {
                crate::models::Node::Leaf { samples, .. } | crate::models::Node::Split { samples, .. } => *samples,
            };
            assert_eq!(root, 100);
        }
    }

    #[test]
    fn min_leaf_and_depth_respected() {
        let rows = noise_matrix(300, 3, 8);
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 2.0 + r[1]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let params = ForestParams {
            n_trees: 4,
            max_depth: Some(3),
            min_samples_leaf: 10,
            ..Default::default()
        };
        let model = fit_forest(&x, Target::Values(&y), &params).unwrap();
        for t in &model.trees {
            assert!(t.depth() <= 3);
            for n in &t.nodes {
                if let crate::models::Node::Leaf { samples, .. } = n {
                    assert!(*samples >= 10);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(fit_forest(&x, Target::Labels(&[true]), &ForestParams::default()).is_err());
        let x = Matrix::from_rows(&[vec![1.0], vec![f64::NAN]]).unwrap();
        assert!(fit_forest(&x, Target::Labels(&[true, false]), &ForestParams::default()).is_err());
    }
}
