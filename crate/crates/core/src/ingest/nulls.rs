use crate::error::Result;
use crate::stats::{FeatureMatrix, Provenance};

use super::ProceedingRecord;

/// Canonical fields that may be null on an accepted record.
pub const NULLABLE_FIELDS: [&str; 5] = ["judge_id", "state", "decision_date", "represented", "custody"];

/// Whether `field` (a nullable canonical field or a covariate name) is null
/// on `record`. Unknown covariates count as null.
pub fn is_null_field(record: &ProceedingRecord, field: &str) -> bool {
    match field {
        "judge_id" => record.judge_id.is_none(),
        "state" => record.state.is_none(),
        "decision_date" => record.decision_date.is_none(),
        "represented" => record.represented.is_none(),
        "custody" => record.custody.is_none(),
        other => record.covariates.get(other).is_none_or(|v| v.is_none()),
    }
}

/// Appends one `<field>_null` 0/1 column per listed field.
pub fn add_null_indicators(
    records: &[ProceedingRecord],
    fields: &[String],
    matrix: &mut FeatureMatrix,
) -> Result<()> {
    for field in fields {
        let column = records
            .iter()
            .map(|r| if is_null_field(r, field) { 1.0 } else { 0.0 })
            .collect();
        matrix.push_column(format!("{field}_null"), Provenance::NullIndicator, column)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, CovariateSpec, CovariateKind, ScenarioConfig};

    #[test]
    fn indicator_sums_match_null_counts() {
        let config = ScenarioConfig {
            cases: 200,
            covariates: vec![CovariateSpec {
                name: "hearings".into(),
                kind: CovariateKind::Numeric,
                cardinality: 0,
                null_rate: 0.2,
            }],
            ..ScenarioConfig::default()
        };
        let records = generate(&config).unwrap();
        // independent count straight off the records
        let expected = records
            .iter()
            .filter(|r| matches!(r.covariates.get("hearings"), Some(None)))
            .count();
        let mut m = FeatureMatrix::new(records.len());
        add_null_indicators(
            &records,
            &["hearings".to_string(), "judge_id".to_string()],
            &mut m,
        )
        .unwrap();
        let sum: f64 = m.column(0).iter().sum();
        assert_eq!(sum as usize, expected);
        assert!(m.column(1).iter().all(|&v| v == 0.0));
        assert_eq!(m.names()[0], "hearings_null");
    }

    #[test]
    fn fully_null_column_is_all_ones() {
        let records = generate(&ScenarioConfig {
            cases: 20,
            ..ScenarioConfig::default()
        })
        .unwrap();
        let mut m = FeatureMatrix::new(records.len());
        add_null_indicators(&records, &["not_a_column".to_string()], &mut m).unwrap();
        assert!(m.column(0).iter().all(|&v| v == 1.0));
    }
}
