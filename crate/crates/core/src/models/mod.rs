//! From-scratch classifiers and regressors with evaluation metrics.

mod forest;
mod linear;
mod matrix;
mod metrics;
mod persist;
mod split;
mod suite;
mod tree;

pub use forest::{fit_forest, ForestModel, ForestParams, MaxFeatures, Target, Task};
pub use linear::{
    fit_linear_svc, fit_logistic, logistic_gradient, logistic_loss, LinearKind, LinearModel,
    LogisticParams, SvcParams,
};
pub use matrix::Matrix;
pub use metrics::{evaluate, evaluate_predictions, Confusion, Metrics};
pub use persist::{load_model, save_model, ModelFile, SavedModel, MODEL_FORMAT_VERSION};
pub use split::{train_test_split, SplitSpec};
pub use suite::{
    predict_decision_suite, FeatureSetReport, ModelReport, SuiteOptions, SuiteReport,
    LEAKAGE_WARNING,
};
pub use tree::{DecisionTree, Node};

/// Anything that assigns a grant (`true`) or deny (`false`) label to a row.
pub trait Classifier {
    fn predict_row(&self, row: &[f64]) -> bool;

    fn predict(&self, x: &Matrix) -> Vec<bool> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

/// Predicts the same label for every row; `ConstantClassifier(false)` is
/// the always-deny baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantClassifier(pub bool);

impl ConstantClassifier {
    pub const ALWAYS_DENY: Self = ConstantClassifier(false);

    /// Predicts the more frequent label (deny on ties).
    pub fn majority(y: &[bool]) -> Self {
        let grants = y.iter().filter(|&&v| v).count();
        ConstantClassifier(grants * 2 > y.len())
    }
}

impl Classifier for ConstantClassifier {
    fn predict_row(&self, _row: &[f64]) -> bool {
        self.0
    }
}
