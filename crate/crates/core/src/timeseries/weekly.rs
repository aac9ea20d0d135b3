use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ProceedingRecord;
use crate::scoring::ScoreTable;

/// Monday on or before `date`.
pub fn week_start(date: NaiveDate) -> NaiveDate {
    date - Duration::days(i64::from(date.weekday().num_days_from_monday()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeeklyPoint {
    pub week_start: NaiveDate,
    pub value: f64,
    pub count: usize,
}

/// Weekly means, strictly increasing by week and with no empty weeks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklySeries {
    points: Vec<WeeklyPoint>,
}

impl WeeklySeries {
    pub fn new(points: Vec<WeeklyPoint>) -> Result<Self> {
        for w in points.windows(2) {
            if w[0].week_start >= w[1].week_start {
                return Err(Error::invalid("weekly points must be strictly increasing"));
            }
        }
        if let Some(p) = points.iter().find(|p| p.count == 0 || !p.value.is_finite()) {
            return Err(Error::invalid(format!(
                "week {} has no cases or a non-finite value",
                p.week_start
            )));
        }
        Ok(Self { points })
    }

    /// Builds a series from (week, value) pairs with count 1 each.
    pub fn from_values(values: impl IntoIterator<Item = (NaiveDate, f64)>) -> Result<Self> {
        Self::new(
            values
                .into_iter()
                .map(|(week_start, value)| WeeklyPoint {
                    week_start,
                    value,
                    count: 1,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[WeeklyPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first_week(&self) -> Option<NaiveDate> {
        self.points.first().map(|p| p.week_start)
    }

    pub fn last_week(&self) -> Option<NaiveDate> {
        self.points.last().map(|p| p.week_start)
    }

    /// Points with `from <= week_start < to`.
    pub fn window(&self, from: NaiveDate, to: NaiveDate) -> WeeklySeries {
        WeeklySeries {
            points: self
                .points
                .iter()
                .filter(|p| p.week_start >= from && p.week_start < to)
                .copied()
                .collect(),
        }
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["week_start", "value", "count"])?;
        for p in &self.points {
            w.write_record([p.week_start.to_string(), p.value.to_string(), p.count.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Mean partisanship per calendar week (weeks start on Monday) of decision
/// date, over proceedings with a non-null gamma.
pub fn aggregate_weekly(scores: &ScoreTable, records: &[ProceedingRecord]) -> Result<WeeklySeries> {
    let lookup = scores.lookup();
    let mut weeks: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for r in records {
        let (Some(date), Some(gamma)) = (
            r.decision_date,
            lookup.get(&*r.proceeding_id).and_then(|s| s.gamma),
        ) else {
            continue;
        };
        let slot = weeks.entry(week_start(date)).or_default();
        slot.0 += gamma;
        slot.1 += 1;
    }
    if weeks.is_empty() {
        return Err(Error::invalid("no proceeding has a partisanship score"));
    }
    WeeklySeries::new(
        weeks
            .into_iter()
            .map(|(week_start, (sum, count))| WeeklyPoint {
                week_start,
                value: sum / count as f64,
                count,
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Decision;
    use crate::scoring::ProceedingScore;
    use std::sync::Arc;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn corpus(items: &[(NaiveDate, Option<f64>)]) -> (ScoreTable, Vec<ProceedingRecord>) {
        let mut records = Vec::new();
        let mut scores = Vec::new();
        for (i, (date, gamma)) in items.iter().enumerate() {
            let id: Arc<str> = Arc::from(format!("p{i}"));
            records.push(ProceedingRecord {
                proceeding_id: id.clone(),
                judge_id: None,
                nationality: Arc::from("N"),
                court_id: Arc::from("C"),
                state: None,
                charge_date: *date,
                decision_date: Some(*date),
                decision: Decision::Deny,
                represented: None,
                custody: None,
                covariates: Default::default(),
                climate: None,
            });
            scores.push(ProceedingScore {
                proceeding_id: id,
                judge_id: None,
                omega: None,
                gamma: *gamma,
            });
        }
        (ScoreTable::from_parts(scores, Default::default()), records)
    }

    #[test]
    fn monday_convention() {
        // 2021-03-07 is a Sunday, 2021-03-08 a Monday
        assert_eq!(week_start(d(2021, 3, 7)), d(2021, 3, 1));
        assert_eq!(week_start(d(2021, 3, 8)), d(2021, 3, 8));
        let (t, r) = corpus(&[(d(2021, 3, 7), Some(0.1)), (d(2021, 3, 8), Some(0.3))]);
        let s = aggregate_weekly(&t, &r).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn one_week_is_one_mean() {
        let (t, r) = corpus(&[
            (d(2020, 6, 2), Some(0.2)),
            (d(2020, 6, 3), Some(0.4)),
            (d(2020, 6, 5), None),
        ]);
        let s = aggregate_weekly(&t, &r).unwrap();
        assert_eq!(s.points().len(), 1);
        assert!((s.points()[0].value - 0.3).abs() < 1e-15);
        assert_eq!(s.points()[0].count, 2);
    }

    #[test]
    fn two_weeks_hand_average() {
        let (t, r) = corpus(&[
            (d(2020, 6, 2), Some(0.2)),
            (d(2020, 6, 9), Some(0.4)),
            (d(2020, 6, 10), Some(0.6)),
        ]);
        let s = aggregate_weekly(&t, &r).unwrap();
        let values: Vec<f64> = s.points().iter().map(|p| p.value).collect();
        assert!((values[0] - 0.2).abs() < 1e-15 && (values[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nothing_scored_is_error() {
        let (t, r) = corpus(&[(d(2020, 6, 2), None)]);
        assert!(aggregate_weekly(&t, &r).is_err());
    }

    #[test]
    fn rejects_unordered_points() {
        let a = WeeklyPoint {
            week_start: d(2020, 1, 6),
            value: 0.0,
            count: 1,
        };
        assert!(WeeklySeries::new(vec![a, a]).is_err());
    }
}
