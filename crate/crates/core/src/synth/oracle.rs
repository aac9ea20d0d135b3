use std::collections::BTreeMap;

use chrono::Datelike;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{Decision, ProceedingRecord};
use crate::scoring::{JudgeScore, ProceedingScore, ScoreTable};

/// Largest corpus the pairwise oracle accepts.
pub const ORACLE_LIMIT: usize = 20_000;

/// First year of the five-year window holding `year`, by stepping down.
fn window_start(year: i32) -> i32 {
    let mut y = year;
    while (y - 1980) % 5 != 0 {
        y -= 1;
    }
    y
}

fn similar(a: &ProceedingRecord, b: &ProceedingRecord) -> bool {
    let (Some(da), Some(db)) = (a.decision_date, b.decision_date) else {
        return false;
    };
    a.nationality == b.nationality
        && a.court_id == b.court_id
        && window_start(da.year()) == window_start(db.year())
}

fn decided(r: &ProceedingRecord) -> bool {
    matches!(r.decision, Decision::Grant | Decision::Deny)
}

/// Scores by literal enumeration: for every decided proceeding, walks the
/// whole corpus to collect its counterfactual sets. Quadratic, with no
/// shared code with the indexed scorer.
pub fn oracle_scores(records: &[ProceedingRecord]) -> Result<ScoreTable> {
    if records.len() > ORACLE_LIMIT {
        return Err(Error::OracleRefused {
            len: records.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let proceedings: Vec<ProceedingScore> = records
        .par_iter()
        .filter(|d| decided(d))
        .map(|delta| {
            let omega = delta.judge_id.as_ref().and_then(|judge| {
                let mut agree = 0usize;
                let mut size = 0usize;
                for other in records {
                    let other_judge_differs = other.judge_id.as_ref().is_some_and(|j| j != judge);
                    if decided(other) && other_judge_differs && similar(delta, other) {
                        size += 1;
                        if other.decision == delta.decision {
                            agree += 1;
                        }
                    }
                }
                (size > 0).then(|| agree as f64 / size as f64)
            });
            let gamma = delta.climate.and_then(|climate| {
                let mut oppose = 0usize;
                let mut size = 0usize;
                for other in records {
                    let Some(oc) = other.climate else { continue };
                    let climate_differs = oc.president_party != climate.president_party
                        || oc.state_leaning != climate.state_leaning;
                    if decided(other) && climate_differs && similar(delta, other) {
                        size += 1;
                        if other.decision != delta.decision {
                            oppose += 1;
                        }
                    }
                }
                (size > 0).then(|| oppose as f64 / size as f64)
            });
            ProceedingScore {
                proceeding_id: delta.proceeding_id.clone(),
                judge_id: delta.judge_id.clone(),
                omega,
                gamma,
            }
        })
        .collect();

    let mut judges = BTreeMap::new();
    for p in &proceedings {
        let Some(judge) = &p.judge_id else { continue };
        if judges.contains_key(judge) {
            continue;
        }
        let mut omegas: Vec<f64> = proceedings
            .iter()
            .filter(|q| q.judge_id.as_ref() == Some(judge))
            .filter_map(|q| q.omega)
            .collect();
        omegas.sort_by(f64::total_cmp);
        let phi = if omegas.is_empty() {
            None
        } else {
            let mut sum = 0.0;
            for v in &omegas {
                sum += v;
            }
            Some(sum / omegas.len() as f64)
        };
        judges.insert(
            judge.clone(),
            JudgeScore {
                judge_id: judge.clone(),
                phi,
                scored_case_count: omegas.len(),
            },
        );
    }
    Ok(ScoreTable::from_parts(proceedings, judges))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_start_matches_anchors() {
        assert_eq!(window_start(1980), 1980);
        assert_eq!(window_start(1984), 1980);
        assert_eq!(window_start(1993), 1990);
        assert_eq!(window_start(2021), 2020);
    }

    #[test]
    fn refuses_oversize_corpus() {
        let records = crate::synth::generate(&crate::synth::ScenarioConfig {
            cases: ORACLE_LIMIT + 1,
            ..Default::default()
        })
        .unwrap();
        assert!(matches!(
            oracle_scores(&records),
            Err(Error::OracleRefused { .. })
        ));
    }
}
