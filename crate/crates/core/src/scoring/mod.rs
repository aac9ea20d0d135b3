//! Counterfactual consistency and partisanship scores.
//!
//! For a decided proceeding Δ, its cohort is every decided proceeding with
//! the same nationality, court and five-year decision bin.
//!
//! * `omega(Δ)`: among cohort proceedings decided by a *different* judge,
//!   the fraction whose decision equals Δ's.
//! * `phi(j)`: mean `omega` over judge `j`'s proceedings with non-null omega.
//! * `gamma(Δ)`: among cohort proceedings decided under a different
//!   political climate (president's party or state leaning differs), the
//!   fraction whose decision is the opposite of Δ's.
//!
//! An empty counterfactual set yields a null score, never 0 or 1.
//! All three scores come from tallies held in a [`CohortIndex`], so each
//! proceeding is scored in constant time.

mod index;
mod table;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Decision, ProceedingRecord};

pub use index::{build_index, CohortIndex, CohortTally, Tally};
pub use table::{JudgeScore, ProceedingScore, ScoreSummary, ScoreTable};

/// How other judges' decisions are weighed in `omega`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyWeighting {
    /// Every other-judge proceeding counts once.
    #[default]
    PerProceeding,
    /// Every other judge counts once, by the majority of their cohort
    /// decisions; a judge split evenly counts as half agreement.
    JudgeMajority,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringOptions {
    pub weighting: ConsistencyWeighting,
}

fn opposite(decision: Decision) -> Decision {
    match decision {
        Decision::Grant => Decision::Deny,
        Decision::Deny => Decision::Grant,
        Decision::Pending => Decision::Pending,
    }
}

fn cohort_of<'a>(record: &ProceedingRecord, index: &'a CohortIndex) -> Result<&'a CohortTally> {
    if !record.decision.is_decided() {
        return Err(Error::invalid(format!(
            "proceeding {} is pending and cannot be scored",
            record.proceeding_id
        )));
    }
    record
        .cohort_key()
        .and_then(|k| index.get(&k))
        .ok_or_else(|| Error::CorpusMismatch(record.proceeding_id.to_string()))
}

/// Disaggregated consistency of one decided proceeding.
pub fn disaggregated_consistency(
    record: &ProceedingRecord,
    index: &CohortIndex,
) -> Result<Option<f64>> {
    disaggregated_consistency_with(record, index, ConsistencyWeighting::PerProceeding)
}

pub fn disaggregated_consistency_with(
    record: &ProceedingRecord,
    index: &CohortIndex,
    weighting: ConsistencyWeighting,
) -> Result<Option<f64>> {
    let cohort = cohort_of(record, index)?;
    let Some(judge) = record.judge_id.as_deref() else {
        return Ok(None);
    };
    match weighting {
        ConsistencyWeighting::PerProceeding => {
            let others = cohort
                .other_judges(judge)
                .ok_or_else(|| Error::CorpusMismatch(record.proceeding_id.to_string()))?;
            if others.total() == 0 {
                return Ok(None);
            }
            Ok(Some(others.count(record.decision) as f64 / others.total() as f64))
        }
        ConsistencyWeighting::JudgeMajority => {
            if !cohort.judges.contains_key(judge) {
                return Err(Error::CorpusMismatch(record.proceeding_id.to_string()));
            }
            // counted in half-units so the sum is exact and order-free
            let (mut agree_halves, mut judges) = (0u64, 0u64);
            for (other, tally) in &cohort.judges {
                if &**other == judge {
                    continue;
                }
                judges += 1;
                let same = tally.count(record.decision);
                let diff = tally.count(opposite(record.decision));
                agree_halves += match same.cmp(&diff) {
                    std::cmp::Ordering::Greater => 2,
                    std::cmp::Ordering::Equal => 1,
                    std::cmp::Ordering::Less => 0,
                };
            }
            if judges == 0 {
                return Ok(None);
            }
            Ok(Some(agree_halves as f64 / (2 * judges) as f64))
        }
    }
}

/// Partisanship of one decided proceeding; null when its climate is
/// unresolved or no cohort proceeding was decided under another climate.
pub fn partisanship(record: &ProceedingRecord, index: &CohortIndex) -> Result<Option<f64>> {
    let cohort = cohort_of(record, index)?;
    let Some(climate) = record.climate else {
        return Ok(None);
    };
    let others = cohort.other_climates(climate);
    if others.total() == 0 {
        return Ok(None);
    }
    Ok(Some(
        others.count(opposite(record.decision)) as f64 / others.total() as f64,
    ))
}

/// Cohort consistency of `judge_id` from an already computed table.
pub fn cohort_consistency(judge_id: &str, table: &ScoreTable) -> Result<Option<f64>> {
    table
        .judge(judge_id)
        .map(|j| j.phi)
        .ok_or_else(|| Error::UnknownJudge(judge_id.to_string()))
}

/// Mean of a judge's omegas. Values are summed in sorted order so the
/// result does not depend on record order.
pub(crate) fn mean_sorted(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

/// Scores every decided proceeding in `records` and every judge.
pub fn score_corpus(records: &[ProceedingRecord], index: &CohortIndex) -> Result<ScoreTable> {
    score_corpus_with(records, index, ScoringOptions::default())
}

pub fn score_corpus_with(
    records: &[ProceedingRecord],
    index: &CohortIndex,
    options: ScoringOptions,
) -> Result<ScoreTable> {
    let proceedings: Vec<ProceedingScore> = records
        .par_iter()
        .filter(|r| r.decision.is_decided())
        .map(|r| {
            Ok(ProceedingScore {
                proceeding_id: r.proceeding_id.clone(),
                judge_id: r.judge_id.clone(),
                omega: disaggregated_consistency_with(r, index, options.weighting)?,
                gamma: partisanship(r, index)?,
            })
        })
        .collect::<Result<_>>()?;

    let mut per_judge: BTreeMap<_, Vec<f64>> = BTreeMap::new();
    for p in &proceedings {
        if let Some(j) = &p.judge_id {
            let omegas = per_judge.entry(j.clone()).or_default();
            omegas.extend(p.omega);
        }
    }
    let judges = per_judge
        .into_iter()
        .map(|(judge_id, mut omegas)| {
            let score = JudgeScore {
                judge_id: judge_id.clone(),
                scored_case_count: omegas.len(),
                phi: mean_sorted(&mut omegas),
            };
            (judge_id, score)
        })
        .collect();
    Ok(ScoreTable::from_parts(proceedings, judges))
}
