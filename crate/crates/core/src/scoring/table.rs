use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Code;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProceedingScore {
    pub proceeding_id: Code,
    pub judge_id: Option<Code>,
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeScore {
    pub judge_id: Code,
    pub phi: Option<f64>,
    /// Proceedings of this judge with a non-null omega.
    pub scored_case_count: usize,
}

/// Scores for every decided proceeding (input order) and every judge
/// (sorted by id).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    proceedings: Vec<ProceedingScore>,
    judges: BTreeMap<Code, JudgeScore>,
}

/// Corpus-level means over non-null scores.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub proceedings: usize,
    pub judges: usize,
    pub omega_count: usize,
    pub gamma_count: usize,
    pub phi_count: usize,
    pub mean_omega: Option<f64>,
    pub mean_gamma: Option<f64>,
    pub mean_phi: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> (usize, Option<f64>) {
    let (n, sum) = values.fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    (n, (n > 0).then(|| sum / n as f64))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_opt(raw: &str) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| Error::invalid(format!("score {raw:?} is not a number")))
}

impl ScoreTable {
    pub fn from_parts(proceedings: Vec<ProceedingScore>, judges: BTreeMap<Code, JudgeScore>) -> Self {
        Self { proceedings, judges }
    }

    pub fn proceedings(&self) -> &[ProceedingScore] {
        &self.proceedings
    }

    pub fn judges(&self) -> impl Iterator<Item = &JudgeScore> {
        self.judges.values()
    }

    pub fn judge(&self, judge_id: &str) -> Option<&JudgeScore> {
        self.judges.get(judge_id)
    }

    pub fn phi_of(&self, judge_id: &str) -> Option<f64> {
        self.judges.get(judge_id).and_then(|j| j.phi)
    }

    /// Map from proceeding id to its scores.
    pub fn lookup(&self) -> HashMap<&str, &ProceedingScore> {
        self.proceedings
            .iter()
            .map(|p| (&*p.proceeding_id, p))
            .collect()
    }

    pub fn summary(&self) -> ScoreSummary {
        let (omega_count, mean_omega) = mean(self.proceedings.iter().filter_map(|p| p.omega));
        let (gamma_count, mean_gamma) = mean(self.proceedings.iter().filter_map(|p| p.gamma));
        let (phi_count, mean_phi) = mean(self.judges.values().filter_map(|j| j.phi));
        ScoreSummary {
            proceedings: self.proceedings.len(),
            judges: self.judges.len(),
            omega_count,
            gamma_count,
            phi_count,
            mean_omega,
            mean_gamma,
            mean_phi,
        }
    }

    /// `proceeding_id,omega,gamma`; null scores are empty fields.
    pub fn write_proceedings_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["proceeding_id", "omega", "gamma"])?;
        for p in &self.proceedings {
            w.write_record([&*p.proceeding_id, &fmt_opt(p.omega), &fmt_opt(p.gamma)])?;
        }
        w.flush().map_err(|e| Error::io("<score writer>", e))?;
        Ok(())
    }

    /// `judge_id,phi,scored_case_count`.
    pub fn write_judges_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["judge_id", "phi", "scored_case_count"])?;
        for j in self.judges.values() {
            w.write_record([
                &*j.judge_id,
                &fmt_opt(j.phi),
                &j.scored_case_count.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<score writer>", e))?;
        Ok(())
    }

    pub fn write_csv_files(&self, proceedings: impl AsRef<Path>, judges: impl AsRef<Path>) -> Result<()> {
        let create = |p: &Path| {
            std::fs::File::create(p)
                .map(std::io::BufWriter::new)
                .map_err(|e| Error::io(p, e))
        };
        self.write_proceedings_csv(create(proceedings.as_ref())?)?;
        self.write_judges_csv(create(judges.as_ref())?)
    }

    /// Reads the two CSV files back. Judge attribution of proceedings is not
    /// part of the file format and comes back as `None`.
    pub fn read_csv(proceedings: impl Read, judges: impl Read) -> Result<Self> {
        let mut rows = Vec::new();
        for rec in csv::Reader::from_reader(proceedings).records() {
            let rec = rec?;
            rows.push(ProceedingScore {
                proceeding_id: Arc::from(rec.get(0).unwrap_or("")),
                judge_id: None,
                omega: parse_opt(rec.get(1).unwrap_or(""))?,
                gamma: parse_opt(rec.get(2).unwrap_or(""))?,
            });
        }
        let mut judge_map = BTreeMap::new();
        for rec in csv::Reader::from_reader(judges).records() {
            let rec = rec?;
            let judge_id: Code = Arc::from(rec.get(0).unwrap_or(""));
            let count = rec
                .get(2)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| Error::invalid("scored_case_count is not an integer"))?;
            judge_map.insert(
                judge_id.clone(),
                JudgeScore {
                    judge_id,
                    phi: parse_opt(rec.get(1).unwrap_or(""))?,
                    scored_case_count: count,
                },
            );
        }
        Ok(Self::from_parts(rows, judge_map))
    }
}
