use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{
    evaluate, fit_linear_svc, fit_logistic, train_test_split, ConstantClassifier,
    LinearModel, LogisticParams, Matrix, Metrics, SplitSpec, SvcParams,
};
use crate::error::Result;
use crate::ingest::ProceedingRecord;
use crate::scoring::ScoreTable;

pub const LEAKAGE_WARNING: &str = "Scores are computed from the same decisions the models predict, \
including the held-out rows. These metrics contain target leakage and overstate predictive power.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Score {
    Partisanship,
    Cohort,
    Disaggregated,
}

impl Score {
    fn name(self) -> &'static str {
        match self {
            Score::Partisanship => "partisanship",
            Score::Cohort => "cohort_consistency",
            Score::Disaggregated => "disaggregated_consistency",
        }
    }
}

const FEATURE_SETS: [(&str, &[Score]); 5] = [
    ("partisanship+cohort_consistency", &[Score::Partisanship, Score::Cohort]),
    ("partisanship+disaggregated_consistency", &[Score::Partisanship, Score::Disaggregated]),
    ("partisanship", &[Score::Partisanship]),
    ("cohort_consistency", &[Score::Cohort]),
    ("disaggregated_consistency", &[Score::Disaggregated]),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteOptions {
    pub split: SplitSpec,
    pub logistic: LogisticParams,
    pub svc: SvcParams,
    pub min_rows: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            split: SplitSpec::default(),
            logistic: LogisticParams::default(),
            svc: SvcParams::default(),
            min_rows: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    /// `logistic`, `linear_svc` or `always_deny`
    pub model: String,
    pub weights: Vec<f64>,
    pub intercept: Option<f64>,
    pub converged: Option<bool>,
    pub train: Metrics,
    pub test: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSetReport {
    pub name: String,
    pub features: Vec<String>,
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub grant_rate: f64,
    pub models: Vec<ModelReport>,
}

impl FeatureSetReport {
    pub fn model(&self, name: &str) -> Option<&ModelReport> {
        self.models.iter().find(|m| m.model == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub leakage_warning: String,
    pub feature_sets: Vec<FeatureSetReport>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn feature_set(&self, name: &str) -> Option<&FeatureSetReport> {
        self.feature_sets.iter().find(|f| f.name == name)
    }

    pub fn write_json(&self, writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

fn linear_report(name: &str, model: &LinearModel, x: (&Matrix, &Matrix), y: (&[bool], &[bool])) -> Result<ModelReport> {
    Ok(ModelReport {
        model: name.into(),
        weights: model.weights.clone(),
        intercept: Some(model.intercept),
        converged: Some(model.converged),
        train: evaluate(model, x.0, y.0)?,
        test: evaluate(model, x.1, y.1)?,
    })
}

/// Fits logistic regression, a linear SVC and the always-deny baseline on
/// each of the five score combinations, using an 80/20 split of the rows
/// where every score in the set is non-null.
pub fn predict_decision_suite(
    scores: &ScoreTable,
    records: &[ProceedingRecord],
    options: &SuiteOptions,
) -> Result<SuiteReport> {
    let lookup = scores.lookup();
    // ([gamma, phi, omega], grant) per decided, scored record, in input order
    let rows: Vec<([Option<f64>; 3], bool)> = records
        .iter()
        .filter(|r| r.decision.is_decided())
        .filter_map(|r| {
            let s = lookup.get(&*r.proceeding_id)?;
            let phi = r.judge_id.as_deref().and_then(|j| scores.phi_of(j));
            Some(([s.gamma, phi, s.omega], r.is_grant()))
        })
        .collect();

    let mut report = SuiteReport {
        leakage_warning: LEAKAGE_WARNING.into(),
        feature_sets: Vec::new(),
        warnings: Vec::new(),
    };
    for (name, set) in FEATURE_SETS {
        let slot = |s: Score| match s {
            Score::Partisanship => 0,
            Score::Cohort => 1,
            Score::Disaggregated => 2,
        };
        let mut features = Vec::new();
        let mut y = Vec::new();
        for (vals, grant) in &rows {
            let picked: Option<Vec<f64>> = set.iter().map(|&s| vals[slot(s)]).collect();
            if let Some(p) = picked {
                features.push(p);
                y.push(*grant);
            }
        }
        if features.len() < options.min_rows {
            report.warnings.push(format!(
                "feature set {name} skipped: {} usable rows, need {}",
                features.len(),
                options.min_rows
            ));
            continue;
        }
        let x = Matrix::from_rows(&features)?;
        let (train, test) = train_test_split(x.rows(), options.split)?;
        let (x_train, x_test) = (x.select_rows(&train), x.select_rows(&test));
        let y_train: Vec<bool> = train.iter().map(|&i| y[i]).collect();
        let y_test: Vec<bool> = test.iter().map(|&i| y[i]).collect();
        let names: Vec<String> = set.iter().map(|s| s.name().to_string()).collect();

        let mut models = Vec::new();
        match fit_logistic(&x_train, &y_train, options.logistic) {
            Ok(m) => models.push(linear_report("logistic", &m, (&x_train, &x_test), (&y_train, &y_test))?),
            Err(e) => report.warnings.push(format!("{name}: logistic not fitted: {e}")),
        }
        match fit_linear_svc(&x_train, &y_train, options.svc) {
            Ok(m) => models.push(linear_report("linear_svc", &m, (&x_train, &x_test), (&y_train, &y_test))?),
            Err(e) => report.warnings.push(format!("{name}: linear SVC not fitted: {e}")),
        }
        let baseline = ConstantClassifier::ALWAYS_DENY;
        models.push(ModelReport {
            model: "always_deny".into(),
            weights: Vec::new(),
            intercept: None,
            converged: None,
            train: evaluate(&baseline, &x_train, &y_train)?,
            test: evaluate(&baseline, &x_test, &y_test)?,
        });
        debug_assert!(models.iter().all(|m| m.test.confusion.total() as usize == test.len()));
        report.feature_sets.push(FeatureSetReport {
            name: name.into(),
            features: names,
            rows: x.rows(),
            train_rows: train.len(),
            test_rows: test.len(),
            grant_rate: y.iter().filter(|&&g| g).count() as f64 / y.len() as f64,
            models,
        });
    }
    Ok(report)
}
