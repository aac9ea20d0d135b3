use std::io::Read;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rustc_hash::FxHashMap;
use serde::Deserialize;

use crate::error::{Error, Result};

use super::{ClimateKey, Party, ProceedingRecord};

const SHIPPED_ADMINISTRATIONS: &str = include_str!("../../data/administrations.csv");
const SHIPPED_STATE_VOTES: &str = include_str!("../../data/state_votes.csv");

/// A presidential administration over the half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct Administration {
    #[serde(rename = "start_date")]
    pub start: NaiveDate,
    #[serde(rename = "end_date")]
    pub end: NaiveDate,
    #[serde(deserialize_with = "de_party")]
    pub party: Party,
}

#[derive(Debug, Deserialize)]
struct StateVoteRow {
    state: String,
    election_year: i32,
    #[serde(deserialize_with = "de_party")]
    party: Party,
}

fn de_party<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Party, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

/// Political-climate facts: who held the presidency when, and which party
/// carried each state in each presidential election.
#[derive(Debug, Clone, Default)]
pub struct ReferenceTables {
    administrations: Vec<Administration>,
    state_votes: FxHashMap<(String, i32), Party>,
}

impl ReferenceTables {
    pub fn new(
        mut administrations: Vec<Administration>,
        state_votes: impl IntoIterator<Item = ((String, i32), Party)>,
    ) -> Result<Self> {
        administrations.sort_by_key(|a| a.start);
        for a in &administrations {
            if a.start >= a.end {
                return Err(Error::ReferenceTable(format!(
                    "administration interval [{}, {}) is empty",
                    a.start, a.end
                )));
            }
        }
        for pair in administrations.windows(2) {
            if pair[0].end != pair[1].start {
                return Err(Error::ReferenceTable(format!(
                    "administrations are not contiguous: one ends {} and the next starts {}",
                    pair[0].end, pair[1].start
                )));
            }
        }
        let state_votes = state_votes
            .into_iter()
            .map(|((s, y), p)| ((s.trim().to_ascii_uppercase(), y), p))
            .collect();
        Ok(Self {
            administrations,
            state_votes,
        })
    }

    /// Tables bundled with the crate (1977 onward).
    pub fn shipped() -> Self {
        Self::from_readers(SHIPPED_ADMINISTRATIONS.as_bytes(), SHIPPED_STATE_VOTES.as_bytes())
            .expect("bundled reference tables are valid")
    }

    pub fn from_readers(administrations: impl Read, state_votes: impl Read) -> Result<Self> {
        let admins = csv::Reader::from_reader(administrations)
            .deserialize()
            .collect::<std::result::Result<Vec<Administration>, _>>()?;
        let votes = csv::Reader::from_reader(state_votes)
            .deserialize::<StateVoteRow>()
            .map(|r| r.map(|r| ((r.state, r.election_year), r.party)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(admins, votes)
    }

    pub fn load(administrations: impl AsRef<Path>, state_votes: impl AsRef<Path>) -> Result<Self> {
        let open = |p: &Path| std::fs::File::open(p).map_err(|e| Error::io(p, e));
        Self::from_readers(
            open(administrations.as_ref())?,
            open(state_votes.as_ref())?,
        )
    }

    pub fn administrations(&self) -> &[Administration] {
        &self.administrations
    }

    /// Ensures `[from, to)` is covered by the administration timeline.
    pub fn check_coverage(&self, from: NaiveDate, to: NaiveDate) -> Result<()> {
        let first = self.administrations.first().map(|a| a.start);
        let last = self.administrations.last().map(|a| a.end);
        match (first, last) {
            (Some(f), Some(l)) if f <= from && to <= l => Ok(()),
            _ => Err(Error::ReferenceTable(format!(
                "administrations do not cover [{from}, {to})"
            ))),
        }
    }

    pub fn president_party(&self, date: NaiveDate) -> Option<Party> {
        let idx = self.administrations.partition_point(|a| a.start <= date);
        let a = self.administrations.get(idx.checked_sub(1)?)?;
        (date < a.end).then_some(a.party)
    }

    /// Majority party of `state` in the latest presidential election held
    /// strictly before `date`.
    pub fn state_leaning(&self, state: &str, date: NaiveDate) -> Option<Party> {
        let year = last_election_before(date);
        self.state_votes
            .get(&(state.trim().to_ascii_uppercase(), year))
            .copied()
    }

    pub fn climate_at(&self, date: NaiveDate, state: &str) -> Option<ClimateKey> {
        Some(ClimateKey::new(
            self.president_party(date)?,
            self.state_leaning(state, date)?,
        ))
    }
}

/// Election day: the Tuesday after the first Monday in November.
pub(crate) fn election_day(year: i32) -> NaiveDate {
    let nov1 = NaiveDate::from_ymd_opt(year, 11, 1).expect("valid date");
    let to_monday = (7 + Weekday::Mon.num_days_from_monday() as i64
        - nov1.weekday().num_days_from_monday() as i64)
        % 7;
    nov1 + Duration::days(to_monday + 1)
}

pub(crate) fn last_election_before(date: NaiveDate) -> i32 {
    let mut year = date.year() - date.year().rem_euclid(4);
    if election_day(year) >= date {
        year -= 4;
    }
    year
}

/// Climate of a proceeding, or `None` when the decision date or state is
/// missing or a table lookup fails.
pub fn resolve_climate(record: &ProceedingRecord, tables: &ReferenceTables) -> Option<ClimateKey> {
    tables.climate_at(record.decision_date?, record.state.as_deref()?)
}
