use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{add_null_indicators, Code, CovariateValue, ProceedingRecord};

use super::frequency_encode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    RawNumeric,
    FrequencyEncoded,
    NullIndicator,
}

/// Column-major numeric matrix; `NaN` marks a null cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    provenance: Vec<Provenance>,
    columns: Vec<Vec<f64>>,
    rows: usize,
}

impl FeatureMatrix {
    pub fn new(rows: usize) -> Self {
        Self {
            names: Vec::new(),
            provenance: Vec::new(),
            columns: Vec::new(),
            rows,
        }
    }

    pub fn push_column(
        &mut self,
        name: impl Into<String>,
        provenance: Provenance,
        values: Vec<f64>,
    ) -> Result<()> {
        let name = name.into();
        if values.len() != self.rows {
            return Err(Error::invalid(format!(
                "column {name} has {} rows, matrix has {}",
                values.len(),
                self.rows
            )));
        }
        if self.names.contains(&name) {
            return Err(Error::invalid(format!("duplicate column {name}")));
        }
        self.names.push(name);
        self.provenance.push(provenance);
        self.columns.push(values);
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn provenance(&self) -> &[Provenance] {
        &self.provenance
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.columns[j].as_slice())
    }

    /// New matrix with the given columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        Self {
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            provenance: keep.iter().map(|&j| self.provenance[j]).collect(),
            columns: keep.iter().map(|&j| self.columns[j].clone()).collect(),
            rows: self.rows,
        }
    }

    pub fn select_rows(&self, keep: &[usize]) -> Self {
        Self {
            names: self.names.clone(),
            provenance: self.provenance.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| keep.iter().map(|&i| c[i]).collect())
                .collect(),
            rows: keep.len(),
        }
    }

    /// Row-major copy with nulls replaced by `fill`.
    pub fn to_dense(&self, fill: f64) -> crate::models::Matrix {
        let mut data = Vec::with_capacity(self.rows * self.cols());
        for i in 0..self.rows {
            data.extend(
                self.columns
                    .iter()
                    .map(|c| if c[i].is_nan() { fill } else { c[i] }),
            );
        }
        crate::models::Matrix::new(self.rows, self.cols(), data).expect("shape is consistent")
    }
}

fn encoded<T: std::hash::Hash + Eq>(values: &[Option<T>]) -> Result<Vec<f64>> {
    Ok(frequency_encode(values)?
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect())
}

/// Builds the modelling matrix for `records`.
///
/// Categorical fields (nationality, court, state, judge, custody and text
/// covariates) are frequency-encoded; representation, decision year,
/// case duration and numeric covariates stay numeric. The decision itself
/// is never a feature. One null-indicator column is appended per entry of
/// `null_indicators`.
pub fn build_feature_matrix(
    records: &[ProceedingRecord],
    null_indicators: &[String],
) -> Result<FeatureMatrix> {
    if records.is_empty() {
        return Err(Error::invalid("no records to build features from"));
    }
    let mut m = FeatureMatrix::new(records.len());
    let cat = |f: fn(&ProceedingRecord) -> Option<&str>| -> Vec<Option<&str>> {
        records.iter().map(f).collect()
    };
    m.push_column("nationality", Provenance::FrequencyEncoded, encoded(&cat(|r| Some(&*r.nationality)))?)?;
    m.push_column("court_id", Provenance::FrequencyEncoded, encoded(&cat(|r| Some(&*r.court_id)))?)?;
    m.push_column("state", Provenance::FrequencyEncoded, encoded(&cat(|r| r.state.as_deref()))?)?;
    m.push_column("judge_id", Provenance::FrequencyEncoded, encoded(&cat(|r| r.judge_id.as_deref()))?)?;
    m.push_column(
        "custody",
        Provenance::FrequencyEncoded,
        encoded(&cat(|r| r.custody.map(|c| c.as_str())))?,
    )?;
    m.push_column(
        "represented",
        Provenance::RawNumeric,
        records
            .iter()
            .map(|r| r.represented.map_or(f64::NAN, |b| b as u8 as f64))
            .collect(),
    )?;
    m.push_column(
        "decision_year",
        Provenance::RawNumeric,
        records
            .iter()
            .map(|r| r.decision_date.map_or(f64::NAN, |d| d.year() as f64))
            .collect(),
    )?;
    m.push_column(
        "duration_days",
        Provenance::RawNumeric,
        records
            .iter()
            .map(|r| r.duration_days().map_or(f64::NAN, |d| d as f64))
            .collect(),
    )?;

    let names: std::collections::BTreeSet<&Code> =
        records.iter().flat_map(|r| r.covariates.keys()).collect();
    for name in names {
        let values: Vec<Option<&CovariateValue>> = records
            .iter()
            .map(|r| r.covariates.get(name).and_then(|v| v.as_ref()))
            .collect();
        let numeric = values
            .iter()
            .flatten()
            .all(|v| matches!(v, CovariateValue::Number(_)));
        if numeric {
            let col = values
                .iter()
                .map(|v| match v {
                    Some(CovariateValue::Number(x)) => *x,
                    _ => f64::NAN,
                })
                .collect();
            m.push_column(name.to_string(), Provenance::RawNumeric, col)?;
        } else {
            let keys: Vec<Option<String>> = values.iter().map(|v| v.map(|v| v.to_string())).collect();
            m.push_column(name.to_string(), Provenance::FrequencyEncoded, encoded(&keys)?)?;
        }
    }
    add_null_indicators(records, null_indicators, &mut m)?;
    Ok(m)
}
