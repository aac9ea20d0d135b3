//! Seeded synthetic corpora with injectable judge and climate effects, and
//! brute-force reference scorers for checking the indexed ones.

mod oracle;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    Code, CohortKey, CovariateValue, Custody, Decision, Party, ProceedingRecord, ReferenceTables,
};

pub use oracle::{oracle_scores, ORACLE_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateKind {
    /// Text values `v0..v{cardinality-1}`.
    Categorical,
    /// Integer-valued numbers in `0..cardinality` (`0..100` when the
    /// cardinality is 0).
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariateSpec {
    pub name: String,
    pub kind: CovariateKind,
    #[serde(default)]
    pub cardinality: usize,
    #[serde(default)]
    pub null_rate: f64,
}

/// Scenario for [`generate`]. Grant probability for a proceeding is
///
/// `base_rate + judge_offsets[judge] + climate_effect·[president is A] + state_effect·[state leans A]`
///
/// clamped to `[0, 1]`. Judge `j` sits in court `j mod courts`; court `c`
/// lies in `states[c mod states.len()]`. Climates come from the shipped
/// reference tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cases: usize,
    pub seed: u64,
    pub base_rate: f64,
    pub climate_effect: f64,
    pub state_effect: f64,
    pub judges: usize,
    /// Per-judge additive shifts by judge index; missing entries are 0.
    pub judge_offsets: Vec<f64>,
    pub nationalities: usize,
    pub courts: usize,
    pub states: Vec<String>,
    /// First and last decision year (inclusive).
    pub start_year: i32,
    pub end_year: i32,
    pub pending_rate: f64,
    pub null_judge_rate: f64,
    pub represented_rate: f64,
    pub covariates: Vec<CovariateSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cases: 2000,
            seed: 0,
            base_rate: 0.3,
            climate_effect: 0.0,
            state_effect: 0.0,
            judges: 20,
            judge_offsets: Vec::new(),
            nationalities: 5,
            courts: 4,
            states: ["TX", "CA", "NY", "FL", "OH", "PA"].map(String::from).to_vec(),
            start_year: 1995,
            end_year: 2020,
            pending_rate: 0.0,
            null_judge_rate: 0.0,
            represented_rate: 0.6,
            covariates: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.cases == 0 {
            return bad("scenario has zero cases".into());
        }
        if self.judges == 0 || self.nationalities == 0 || self.courts == 0 || self.states.is_empty() {
            return bad("judges, nationalities, courts and states must be non-empty".into());
        }
        if self.start_year < 1980 || self.end_year < self.start_year {
            return bad(format!(
                "year range {}..={} must start in 1980 or later",
                self.start_year, self.end_year
            ));
        }
        for (name, rate) in [
            ("base_rate", self.base_rate),
            ("pending_rate", self.pending_rate),
            ("null_judge_rate", self.null_judge_rate),
            ("represented_rate", self.represented_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} {rate} is not in [0, 1]"));
            }
        }
        for c in &self.covariates {
            if !(0.0..=1.0).contains(&c.null_rate) {
                return bad(format!("covariate {} null_rate is not in [0, 1]", c.name));
            }
            if c.kind == CovariateKind::Categorical && c.cardinality == 0 {
                return bad(format!("categorical covariate {} needs a cardinality", c.name));
            }
        }
        if ![self.climate_effect, self.state_effect]
            .iter()
            .chain(&self.judge_offsets)
            .all(|v| v.is_finite())
        {
            return bad("effects must be finite".into());
        }
        Ok(())
    }

    pub fn judge_offset(&self, judge: usize) -> f64 {
        self.judge_offsets.get(judge).copied().unwrap_or(0.0)
    }

    pub fn court_of_judge(&self, judge: usize) -> usize {
        judge % self.courts
    }
}

pub fn judge_name(j: usize) -> String {
    format!("J{j:04}")
}

pub fn court_name(c: usize) -> String {
    format!("C{c:03}")
}

pub fn nationality_name(n: usize) -> String {
    format!("N{n:03}")
}

/// Generates `config.cases` proceedings using the shipped climate tables.
pub fn generate(config: &ScenarioConfig) -> Result<Vec<ProceedingRecord>> {
    generate_with_tables(config, &ReferenceTables::shipped())
}

pub fn generate_with_tables(
    config: &ScenarioConfig,
    tables: &ReferenceTables,
) -> Result<Vec<ProceedingRecord>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let codes = |n: usize, f: fn(usize) -> String| -> Vec<Code> { (0..n).map(|i| Arc::from(f(i))).collect() };
    let judges = codes(config.judges, judge_name);
    let courts = codes(config.courts, court_name);
    let nationalities = codes(config.nationalities, nationality_name);
    let states: Vec<Code> = config
        .states
        .iter()
        .map(|s| Arc::from(s.trim().to_ascii_uppercase()))
        .collect();
    let cov_names: Vec<Code> = config.covariates.iter().map(|c| Arc::from(c.name.as_str())).collect();
    let cov_values: Vec<Vec<Code>> = config
        .covariates
        .iter()
        .map(|c| match c.kind {
            CovariateKind::Categorical => (0..c.cardinality).map(|k| Arc::from(format!("v{k}"))).collect(),
            CovariateKind::Numeric => Vec::new(),
        })
        .collect();

    let first = NaiveDate::from_ymd_opt(config.start_year, 1, 1)
        .ok_or_else(|| Error::Config("start_year out of range".into()))?;
    let last = NaiveDate::from_ymd_opt(config.end_year, 12, 31)
        .ok_or_else(|| Error::Config("end_year out of range".into()))?;
    let span = (last - first).num_days();
    let mut climate_cache: FxHashMap<(usize, NaiveDate), Option<crate::ingest::ClimateKey>> =
        FxHashMap::default();

    let mut records = Vec::with_capacity(config.cases);
    for i in 0..config.cases {
        let judge = rng.gen_range(0..config.judges);
        let court = config.court_of_judge(judge);
        let state_idx = court % states.len();
        let nationality = rng.gen_range(0..config.nationalities);
        let decision_date = first + Duration::days(rng.gen_range(0..=span));
        let charge_date = decision_date - Duration::days(rng.gen_range(0..=1500));
        let pending = rng.gen_bool(config.pending_rate);
        let null_judge = rng.gen_bool(config.null_judge_rate);
        let climate = *climate_cache
            .entry((state_idx, decision_date))
            .or_insert_with(|| tables.climate_at(decision_date, &states[state_idx]));

        let mut p = config.base_rate + config.judge_offset(judge);
        if let Some(c) = climate {
            if c.president_party == Party::PartyA {
                p += config.climate_effect;
            }
            if c.state_leaning == Party::PartyA {
                p += config.state_effect;
            }
        }
        let grant = rng.gen_bool(p.clamp(0.0, 1.0));
        let represented = rng.gen_bool(config.represented_rate);
        let custody = *Custody::ALL.choose(&mut rng).expect("non-empty");

        let mut covariates = BTreeMap::new();
        for (k, spec) in config.covariates.iter().enumerate() {
            let value = if rng.gen_bool(spec.null_rate) {
                None
            } else {
                Some(match spec.kind {
                    CovariateKind::Categorical => {
                        CovariateValue::Text(cov_values[k][rng.gen_range(0..spec.cardinality)].clone())
                    }
                    CovariateKind::Numeric => {
                        let hi = if spec.cardinality == 0 { 100 } else { spec.cardinality };
                        CovariateValue::Number(rng.gen_range(0..hi) as f64)
                    }
                })
            };
            covariates.insert(cov_names[k].clone(), value);
        }

        records.push(ProceedingRecord {
            proceeding_id: Arc::from(format!("P{i:08}")),
            judge_id: (!null_judge).then(|| judges[judge].clone()),
            nationality: nationalities[nationality].clone(),
            court_id: courts[court].clone(),
            state: Some(states[state_idx].clone()),
            charge_date,
            decision_date: (!pending).then_some(decision_date),
            decision: match (pending, grant) {
                (true, _) => Decision::Pending,
                (false, true) => Decision::Grant,
                (false, false) => Decision::Deny,
            },
            represented: Some(represented),
            custody: Some(custody),
            covariates,
            climate: if pending { None } else { climate },
        });
    }
    Ok(records)
}

/// Control corpus: decisions permuted uniformly within each cohort, keeping
/// judges, dates and climates in place. Cohort sizes and grant counts are
/// preserved while any link between climate and decision is broken.
pub fn shuffle_decisions(records: &[ProceedingRecord], seed: u64) -> Vec<ProceedingRecord> {
    let mut out = records.to_vec();
    let mut groups: BTreeMap<CohortKey, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if r.decision.is_decided() {
            if let Some(k) = r.cohort_key() {
                groups.entry(k).or_default().push(i);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for idx in groups.values() {
        let mut decisions: Vec<Decision> = idx.iter().map(|&i| records[i].decision).collect();
        decisions.shuffle(&mut rng);
        for (&i, d) in idx.iter().zip(decisions) {
            out[i].decision = d;
        }
    }
    out
}
