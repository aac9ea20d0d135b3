//! Proceeding records, cohort keys, and the CSV ingestion layer.

mod mapping;
mod nulls;
mod parse;
mod reference;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mapping::{ColumnMapping, DecisionCodes};
pub use nulls::{add_null_indicators, is_null_field, NULLABLE_FIELDS};
pub use parse::{
    parse_corpus, parse_corpus_reader, write_corpus, write_corpus_to, IngestReport, Rejection,
    RejectionKind, CANONICAL_COLUMNS,
};
pub use reference::{resolve_climate, Administration, ReferenceTables};

/// Shared, immutable string used for identifiers and category codes.
///
/// Corpora repeat the same handful of nationality, court, state and judge
/// codes millions of times, so records hold reference-counted slices.
pub type Code = Arc<str>;

/// First year covered by the analysis; bins are anchored here.
pub const BIN_ANCHOR_YEAR: i32 = 1980;
pub const BIN_WIDTH_YEARS: i32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Decision {
    Grant,
    Deny,
    Pending,
}

impl Decision {
    pub fn is_decided(self) -> bool {
        !matches!(self, Decision::Pending)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Grant => "GRANT",
            Decision::Deny => "DENY",
            Decision::Pending => "PENDING",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Custody {
    Detained,
    Released,
    NeverDetained,
}

impl Custody {
    pub const ALL: [Custody; 3] = [Custody::Detained, Custody::Released, Custody::NeverDetained];

    pub fn as_str(self) -> &'static str {
        match self {
            Custody::Detained => "DETAINED",
            Custody::Released => "RELEASED",
            Custody::NeverDetained => "NEVER_DETAINED",
        }
    }
}

/// One of the two major parties. Labels are neutral: the shipped reference
/// tables map `A` to the Democratic and `B` to the Republican party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    #[serde(rename = "A")]
    PartyA,
    #[serde(rename = "B")]
    PartyB,
}

impl Party {
    pub fn as_str(self) -> &'static str {
        match self {
            Party::PartyA => "A",
            Party::PartyB => "B",
        }
    }
}

impl FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" | "PARTYA" | "D" | "DEM" | "DEMOCRAT" | "DEMOCRATIC" => Ok(Party::PartyA),
            "B" | "PARTYB" | "R" | "REP" | "REPUBLICAN" => Ok(Party::PartyB),
            other => Err(Error::ReferenceTable(format!("unknown party label {other:?}"))),
        }
    }
}

/// Political climate of a decision: sitting president's party and the
/// state's most recent presidential-election majority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClimateKey {
    pub president_party: Party,
    pub state_leaning: Party,
}

impl ClimateKey {
    pub const COUNT: usize = 4;

    pub fn new(president_party: Party, state_leaning: Party) -> Self {
        Self {
            president_party,
            state_leaning,
        }
    }

    /// Dense index in `0..4`, used for per-climate tallies.
    pub fn ordinal(self) -> usize {
        let p = matches!(self.president_party, Party::PartyB) as usize;
        let s = matches!(self.state_leaning, Party::PartyB) as usize;
        p * 2 + s
    }

    pub fn from_ordinal(i: usize) -> Self {
        let party = |b: usize| if b == 0 { Party::PartyA } else { Party::PartyB };
        Self::new(party((i >> 1) & 1), party(i & 1))
    }
}

/// Identifies the set of similar proceedings a decision is compared against.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CohortKey {
    pub nationality: Code,
    pub court_id: Code,
    pub year_bin: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovariateValue {
    Number(f64),
    Text(Code),
}

impl CovariateValue {
    /// Numbers win: anything that parses as a finite `f64` is numeric.
    pub fn parse(raw: &str) -> Option<Self> {
        let raw = raw.trim();
        if raw.is_empty() {
            return None;
        }
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(CovariateValue::Number(v)),
            _ => Some(CovariateValue::Text(Arc::from(raw))),
        }
    }
}

impl fmt::Display for CovariateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovariateValue::Number(v) => write!(f, "{v}"),
            CovariateValue::Text(s) => f.write_str(s),
        }
    }
}

/// One adjudicated (or pending) proceeding.
///
/// `climate` is derived at ingestion from the reference tables; `None` marks
/// a climate-unresolved proceeding, which is excluded from partisanship.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProceedingRecord {
    pub proceeding_id: Code,
    pub judge_id: Option<Code>,
    pub nationality: Code,
    pub court_id: Code,
    pub state: Option<Code>,
    pub charge_date: NaiveDate,
    pub decision_date: Option<NaiveDate>,
    pub decision: Decision,
    pub represented: Option<bool>,
    pub custody: Option<Custody>,
    pub covariates: BTreeMap<Code, Option<CovariateValue>>,
    pub climate: Option<ClimateKey>,
}

impl ProceedingRecord {
    /// Checks the record-level invariants.
    pub fn validate(&self) -> std::result::Result<(), String> {
        match (self.decision, self.decision_date) {
            (Decision::Pending, Some(_)) => {
                return Err("pending proceeding carries a decision date".into())
            }
            (Decision::Grant | Decision::Deny, None) => {
                return Err("decided proceeding has no decision date".into())
            }
            _ => {}
        }
        if let Some(dd) = self.decision_date {
            if self.charge_date > dd {
                return Err(format!(
                    "charge date {} is after decision date {dd}",
                    self.charge_date
                ));
            }
        }
        Ok(())
    }

    /// Cohort key of a decided proceeding; `None` when pending or decided
    /// before the analysis window.
    pub fn cohort_key(&self) -> Option<CohortKey> {
        let date = self.decision_date?;
        let year_bin = year_bin(date).ok()?;
        Some(CohortKey {
            nationality: self.nationality.clone(),
            court_id: self.court_id.clone(),
            year_bin,
        })
    }

    pub fn is_grant(&self) -> bool {
        self.decision == Decision::Grant
    }

    pub fn duration_days(&self) -> Option<i64> {
        self.decision_date
            .map(|d| d.signed_duration_since(self.charge_date).num_days())
    }
}

/// Lower bound of the five-year bin containing `decision_date`.
pub fn year_bin(decision_date: NaiveDate) -> Result<i32> {
    let year = decision_date.year();
    if year < BIN_ANCHOR_YEAR {
        return Err(Error::DateOutOfRange(decision_date));
    }
    Ok(BIN_ANCHOR_YEAR + (year - BIN_ANCHOR_YEAR) / BIN_WIDTH_YEARS * BIN_WIDTH_YEARS)
}
