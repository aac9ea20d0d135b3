use serde::{Deserialize, Serialize};

use super::{Classifier, Matrix};
use crate::error::{Error, Result};

/// 2×2 confusion counts with Grant as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_grant: u64,
    pub false_grant: u64,
    pub true_deny: u64,
    pub false_deny: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.true_grant + self.false_grant + self.true_deny + self.false_deny
    }

    pub fn actual_grants(&self) -> u64 {
        self.true_grant + self.false_deny
    }

    pub fn actual_denials(&self) -> u64 {
        self.true_deny + self.false_grant
    }

    pub fn errors(&self) -> u64 {
        self.false_grant + self.false_deny
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// R² of the hard 0/1 predictions against the labels; `None` when the
    /// labels are all one class.
    pub r2: Option<f64>,
    /// `None` when nothing was predicted as Grant.
    pub precision: Option<f64>,
    /// `None` when no label is Grant.
    pub recall: Option<f64>,
    pub confusion: Confusion,
}

pub fn evaluate(model: &impl Classifier, x: &Matrix, y: &[bool]) -> Result<Metrics> {
    if x.rows() != y.len() {
        return Err(Error::invalid(format!(
            "{} labels for {} rows",
            y.len(),
            x.rows()
        )));
    }
    evaluate_predictions(&model.predict(x), y)
}

pub fn evaluate_predictions(predicted: &[bool], actual: &[bool]) -> Result<Metrics> {
    if actual.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty test set"));
    }
    if predicted.len() != actual.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predicted.len(),
            actual.len()
        )));
    }
    let mut c = Confusion::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        match (p, a) {
            (true, true) => c.true_grant += 1,
            (true, false) => c.false_grant += 1,
            (false, false) => c.true_deny += 1,
            (false, true) => c.false_deny += 1,
        }
    }
    let n = c.total() as f64;
    let grants = c.actual_grants() as f64;
    // With 0/1 labels, SS_res is the error count and SS_tot = g(n-g)/n.
    let r2 = (c.actual_grants() > 0 && c.actual_denials() > 0)
        .then(|| 1.0 - (c.errors() as f64 * n) / (grants * (n - grants)));
    let predicted_grants = c.true_grant + c.false_grant;
    Ok(Metrics {
        accuracy: (c.true_grant + c.true_deny) as f64 / n,
        r2,
        precision: (predicted_grants > 0).then(|| c.true_grant as f64 / predicted_grants as f64),
        recall: (c.actual_grants() > 0).then(|| c.true_grant as f64 / grants),
        confusion: c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ConstantClassifier;
    use proptest::prelude::*;

    fn labels(grants: usize, n: usize) -> Vec<bool> {
        (0..n).map(|i| i < grants).collect()
    }

    /// R² straight from the definition, as an independent check.
    fn r2_direct(pred: &[bool], y: &[bool]) -> f64 {
        let f = |b: bool| f64::from(u8::from(b));
        let mean = y.iter().map(|&b| f(b)).sum::<f64>() / y.len() as f64;
        let ss_res: f64 = pred.iter().zip(y).map(|(&p, &a)| (f(a) - f(p)).powi(2)).sum();
        let ss_tot: f64 = y.iter().map(|&a| (f(a) - mean).powi(2)).sum();
        1.0 - ss_res / ss_tot
    }

    #[test]
    fn always_deny_baseline() {
        let y = labels(128_751, 1_000_000);
        let pred = ConstantClassifier::ALWAYS_DENY.predict(&Matrix::new(y.len(), 0, vec![]).unwrap());
        let m = evaluate_predictions(&pred, &y).unwrap();
        assert!((m.accuracy - 0.871249).abs() < 1e-12);
        let p = 0.128751;
        assert!((m.r2.unwrap() - (-p / (1.0 - p))).abs() < 1e-12);
        assert!((m.r2.unwrap() - -0.147777).abs() < 1e-5);
        assert_eq!(m.recall, Some(0.0));
        assert_eq!(m.precision, None);
    }

    #[test]
    fn perfect_predictor() {
        let y = labels(30, 100);
        let m = evaluate_predictions(&y, &y).unwrap();
        assert_eq!((m.accuracy, m.r2, m.precision, m.recall), (1.0, Some(1.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn empty_or_mismatched_is_error() {
        assert!(evaluate_predictions(&[], &[]).is_err());
        assert!(evaluate_predictions(&[true], &[true, false]).is_err());
    }

    #[test]
    fn single_class_labels_have_no_r2() {
        let m = evaluate_predictions(&[false, true], &[false, false]).unwrap();
        assert_eq!(m.r2, None);
        assert_eq!(m.recall, None);
        assert_eq!(m.precision, Some(0.0));
    }

    proptest! {
        #[test]
        fn confusion_marginals_and_r2_match_definition(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)
        ) {
            let (pred, y): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let m = evaluate_predictions(&pred, &y).unwrap();
            let grants = y.iter().filter(|&&b| b).count() as u64;
            prop_assert_eq!(m.confusion.actual_grants(), grants);
            prop_assert_eq!(m.confusion.actual_denials(), y.len() as u64 - grants);
            let pg = pred.iter().filter(|&&b| b).count() as u64;
            prop_assert_eq!(m.confusion.true_grant + m.confusion.false_grant, pg);
            if let Some(r2) = m.r2 {
                prop_assert!((r2 - r2_direct(&pred, &y)).abs() < 1e-9);
            }
        }

        #[test]
        fn rounded_mean_rate_equals_majority_baseline(grants in 1usize..499, extra in 0usize..500) {
            let n = 1000 + extra;
            let y = labels(grants, n);
            let p = grants as f64 / n as f64;
            let rounded = vec![p >= 0.5; n];
            let majority = ConstantClassifier::majority(&y).predict(&Matrix::new(n, 0, vec![]).unwrap());
            let a = evaluate_predictions(&rounded, &y).unwrap();
            let b = evaluate_predictions(&majority, &y).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((a.r2.unwrap() - (-p / (1.0 - p))).abs() < 1e-12);
        }
    }
}
