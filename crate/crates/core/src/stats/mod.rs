//! Feature engineering and statistical tests.

mod bagging;
mod correlation;
mod encode;
mod matrix;

pub use bagging::{bag_importances, BaggingParams, FeatureImportance, ImportanceSummary};
pub use correlation::{
    average_ranks, bonferroni, pearson, prune_correlated, prune_correlated_detailed, spearman,
    welch_t_test, PruneReport, SpearmanResult, WelchResult,
};
pub use encode::frequency_encode;
pub use matrix::{build_feature_matrix, FeatureMatrix, Provenance};
