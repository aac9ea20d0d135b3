use rustc_hash::FxHashMap;

use crate::ingest::{ClimateKey, Code, CohortKey, Decision, ProceedingRecord};

/// Grant/deny counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Tally {
    pub grant: u64,
    pub deny: u64,
}

impl Tally {
    pub fn total(self) -> u64 {
        self.grant + self.deny
    }

    /// Count of `decision`; pending decisions are never tallied.
    pub fn count(self, decision: Decision) -> u64 {
        match decision {
            Decision::Grant => self.grant,
            Decision::Deny => self.deny,
            Decision::Pending => 0,
        }
    }

    pub(crate) fn add(&mut self, decision: Decision) {
        match decision {
            Decision::Grant => self.grant += 1,
            Decision::Deny => self.deny += 1,
            Decision::Pending => {}
        }
    }

    fn minus(self, other: Tally) -> Tally {
        Tally {
            grant: self.grant - other.grant,
            deny: self.deny - other.deny,
        }
    }

    fn plus(self, other: Tally) -> Tally {
        Tally {
            grant: self.grant + other.grant,
            deny: self.deny + other.deny,
        }
    }
}

/// Everything known about one cohort, as counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CohortTally {
    pub total: Tally,
    pub judges: FxHashMap<Code, Tally>,
    /// Proceedings with no recorded judge.
    pub unattributed: Tally,
    /// Indexed by [`ClimateKey::ordinal`].
    pub climates: [Tally; ClimateKey::COUNT],
    pub climate_unresolved: Tally,
}

impl CohortTally {
    /// Proceedings decided by a judge other than `judge`.
    pub fn other_judges(&self, judge: &str) -> Option<Tally> {
        let own = *self.judges.get(judge)?;
        Some(self.total.minus(own).minus(self.unattributed))
    }

    /// Proceedings decided under any climate other than `climate`.
    pub fn other_climates(&self, climate: ClimateKey) -> Tally {
        let own = climate.ordinal();
        self.climates
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != own)
            .fold(Tally::default(), |acc, (_, t)| acc.plus(*t))
    }
}

/// Decision tallies per cohort, per judge within cohort, and per political
/// climate within cohort. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CohortIndex {
    cohorts: FxHashMap<CohortKey, CohortTally>,
    records: usize,
}

impl CohortIndex {
    /// Single pass over `records`; pending proceedings are skipped.
    pub fn build(records: &[ProceedingRecord]) -> Self {
        let mut cohorts: FxHashMap<CohortKey, CohortTally> = FxHashMap::default();
        let mut indexed = 0;
        for r in records {
            if !r.decision.is_decided() {
                continue;
            }
            let Some(key) = r.cohort_key() else { continue };
            let cohort = cohorts.entry(key).or_default();
            cohort.total.add(r.decision);
            match &r.judge_id {
                Some(j) => cohort.judges.entry(j.clone()).or_default().add(r.decision),
                None => cohort.unattributed.add(r.decision),
            }
            match r.climate {
                Some(c) => cohort.climates[c.ordinal()].add(r.decision),
                None => cohort.climate_unresolved.add(r.decision),
            }
            indexed += 1;
        }
        Self {
            cohorts,
            records: indexed,
        }
    }

    pub fn get(&self, key: &CohortKey) -> Option<&CohortTally> {
        self.cohorts.get(key)
    }

    pub fn len(&self) -> usize {
        self.cohorts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cohorts.is_empty()
    }

    /// Number of proceedings tallied.
    pub fn record_count(&self) -> usize {
        self.records
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CohortKey, &CohortTally)> {
        self.cohorts.iter()
    }
}

/// Builds the cohort index for `records`.
pub fn build_index(records: &[ProceedingRecord]) -> CohortIndex {
    CohortIndex::build(records)
}
