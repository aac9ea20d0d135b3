//! Counterfactual decision-variability analytics for adjudication records.
//!
//! Proceedings are grouped into cohorts (nationality, court, five-year
//! decision bin). Within a cohort every decision is compared against the
//! decisions other judges reached and against decisions made under a
//! different political climate:
//!
//! * **disaggregated consistency** (`omega`): share of other-judge cohort
//!   proceedings that reached the same decision;
//! * **cohort consistency** (`phi`): a judge's mean `omega`;
//! * **partisanship** (`gamma`): share of different-climate cohort
//!   proceedings that reached the opposite decision.
//!
//! Around the scores sit the supporting pieces of an audit: CSV ingestion
//! ([`ingest`]), feature statistics ([`stats`]), from-scratch classifiers
//! ([`models`]), a changepoint trend model ([`timeseries`]), descriptive
//! tables ([`describe`]) and a synthetic corpus generator with brute-force
//! oracles ([`synth`]).

pub mod describe;
pub mod error;
pub mod ingest;
pub mod models;
pub mod scoring;
mod seed;
pub mod stats;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};
pub use ingest::{
    ClimateKey, CohortKey, Custody, Decision, IngestReport, Party, ProceedingRecord,
    ReferenceTables,
};
pub use scoring::{CohortIndex, ScoreTable};
