//! Descriptive tables: yearly volume, grant and representation rates, and
//! representation broken down by custody and by case duration.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Custody, ProceedingRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearRow {
    pub year: i32,
    pub cases: usize,
    pub grants: usize,
    pub grant_rate: f64,
    /// Cases with a known representation status.
    pub representation_known: usize,
    pub represented: usize,
    pub representation_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    /// Custody label or duration bucket.
    pub group: String,
    pub represented: bool,
    pub cases: usize,
    pub grants: usize,
    pub grant_rate: f64,
    pub mean_duration_days: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub years: Vec<YearRow>,
    pub by_custody: Vec<BreakdownRow>,
    pub by_duration: Vec<BreakdownRow>,
}

/// Upper bounds (exclusive, in days) of the duration buckets.
pub const DURATION_BUCKETS: [(i64, &str); 5] = [
    (180, "0-179"),
    (365, "180-364"),
    (730, "365-729"),
    (1460, "730-1459"),
    (i64::MAX, "1460+"),
];

fn duration_bucket(days: i64) -> &'static str {
    DURATION_BUCKETS
        .iter()
        .find(|(hi, _)| days < *hi)
        .map(|(_, label)| *label)
        .unwrap_or("1460+")
}

#[derive(Default)]
struct Acc {
    cases: usize,
    grants: usize,
    duration_sum: i64,
}

impl Acc {
    fn row(&self, group: String, represented: bool) -> BreakdownRow {
        BreakdownRow {
            group,
            represented,
            cases: self.cases,
            grants: self.grants,
            grant_rate: self.grants as f64 / self.cases as f64,
            mean_duration_days: self.duration_sum as f64 / self.cases as f64,
        }
    }
}

/// Summarizes decided proceedings by decision year, and by representation
/// crossed with custody and with duration (decision minus charge date).
pub fn describe(records: &[ProceedingRecord]) -> Result<Description> {
    let decided: Vec<&ProceedingRecord> = records.iter().filter(|r| r.decision.is_decided()).collect();
    if decided.is_empty() {
        return Err(Error::invalid("corpus has no decided proceedings"));
    }
    let mut years: BTreeMap<i32, YearRow> = BTreeMap::new();
    let mut custody: BTreeMap<(usize, bool), Acc> = BTreeMap::new();
    let mut duration: BTreeMap<(usize, bool), Acc> = BTreeMap::new();
    for r in &decided {
        let date = r.decision_date.expect("decided proceedings carry a date");
        let row = years.entry(date.year()).or_insert_with(|| YearRow {
            year: date.year(),
            cases: 0,
            grants: 0,
            grant_rate: 0.0,
            representation_known: 0,
            represented: 0,
            representation_rate: None,
        });
        row.cases += 1;
        row.grants += usize::from(r.is_grant());
        if let Some(rep) = r.represented {
            row.representation_known += 1;
            row.represented += usize::from(rep);
        }
        let Some(rep) = r.represented else { continue };
        let days = r.duration_days().unwrap_or(0);
        let bump = |acc: &mut Acc| {
            acc.cases += 1;
            acc.grants += usize::from(r.is_grant());
            acc.duration_sum += days;
        };
        if let Some(c) = r.custody {
            let slot = Custody::ALL.iter().position(|x| *x == c).expect("known custody");
            bump(custody.entry((slot, rep)).or_default());
        }
        let bucket = DURATION_BUCKETS
            .iter()
            .position(|(_, l)| *l == duration_bucket(days))
            .expect("bucket");
        bump(duration.entry((bucket, rep)).or_default());
    }
    for row in years.values_mut() {
        row.grant_rate = row.grants as f64 / row.cases as f64;
        row.representation_rate =
            (row.representation_known > 0).then(|| row.represented as f64 / row.representation_known as f64);
    }
    Ok(Description {
        years: years.into_values().collect(),
        by_custody: custody
            .iter()
            .map(|((slot, rep), acc)| acc.row(Custody::ALL[*slot].as_str().to_string(), *rep))
            .collect(),
        by_duration: duration
            .iter()
            .map(|((b, rep), acc)| acc.row(DURATION_BUCKETS[*b].1.to_string(), *rep))
            .collect(),
    })
}

impl Description {
    pub fn write_years_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "year",
            "cases",
            "grants",
            "grant_rate",
            "representation_known",
            "represented",
            "representation_rate",
        ])?;
        for r in &self.years {
            w.write_record([
                r.year.to_string(),
                r.cases.to_string(),
                r.grants.to_string(),
                r.grant_rate.to_string(),
                r.representation_known.to_string(),
                r.represented.to_string(),
                r.representation_rate.map_or(String::new(), |v| v.to_string()),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn write_breakdown_csv(rows: &[BreakdownRow], writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["group", "represented", "cases", "grants", "grant_rate", "mean_duration_days"])?;
        for r in rows {
            w.write_record([
                r.group.clone(),
                r.represented.to_string(),
                r.cases.to_string(),
                r.grants.to_string(),
                r.grant_rate.to_string(),
                r.mean_duration_days.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Decision;
    use crate::synth::{generate, ScenarioConfig};
    use chrono::NaiveDate;
    use std::sync::Arc;

    fn record(charge: NaiveDate, decision: NaiveDate, grant: bool) -> ProceedingRecord {
        ProceedingRecord {
            proceeding_id: Arc::from("p"),
            judge_id: None,
            nationality: Arc::from("N"),
            court_id: Arc::from("C"),
            state: None,
            charge_date: charge,
            decision_date: Some(decision),
            decision: if grant { Decision::Grant } else { Decision::Deny },
            represented: Some(true),
            custody: Some(Custody::Detained),
            covariates: Default::default(),
            climate: None,
        }
    }

    #[test]
    fn one_granted_case() {
        let d = |m, day| NaiveDate::from_ymd_opt(2020, m, day).unwrap();
        let r = record(d(1, 1), d(1, 31), true);
        assert_eq!(r.duration_days(), Some(30));
        let desc = describe(&[r]).unwrap();
        assert_eq!(desc.years.len(), 1);
        assert_eq!(desc.years[0].grant_rate, 1.0);
        assert_eq!(desc.by_custody[0].group, "DETAINED");
        assert_eq!(desc.by_duration[0].group, "0-179");
        assert_eq!(desc.by_duration[0].mean_duration_days, 30.0);
    }

    #[test]
    fn yearly_counts_match_generator() {
        let records = generate(&ScenarioConfig {
            cases: 3000,
            pending_rate: 0.1,
            ..ScenarioConfig::default()
        })
        .unwrap();
        let mut expected: BTreeMap<i32, usize> = BTreeMap::new();
        for r in &records {
            if let Some(d) = r.decision_date {
                *expected.entry(d.year()).or_default() += 1;
            }
        }
        let desc = describe(&records).unwrap();
        let got: BTreeMap<i32, usize> = desc.years.iter().map(|y| (y.year, y.cases)).collect();
        assert_eq!(got, expected);
        let custody_total: usize = desc.by_custody.iter().map(|r| r.cases).sum();
        let duration_total: usize = desc.by_duration.iter().map(|r| r.cases).sum();
        assert_eq!(custody_total, expected.values().sum::<usize>());
        assert_eq!(duration_total, custody_total);
    }

    #[test]
    fn empty_corpus_is_error() {
        assert!(describe(&[]).is_err());
    }
}
