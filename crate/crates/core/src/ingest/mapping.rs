use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Custody, Decision};

/// Maps canonical field names to source headers and source codes to
/// canonical values.
///
/// Stored as TOML. Every key is optional; omitted keys fall back to the
/// canonical corpus layout, so an empty file reads canonical corpora.
///
/// ```toml
/// [columns]
/// proceeding_id = "IDNPROCEEDING"
/// judge_id = "IJ_CODE"
/// decision = "DEC_CODE"
///
/// [decisions]
/// grant = ["GRANT", "G"]
/// deny = ["DENY", "D"]
/// other_as_deny = false
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub columns: Columns,
    pub decisions: DecisionCodes,
    pub represented: BoolCodes,
    pub custody: CustodyCodes,
    /// chrono format strings, tried in order.
    pub date_formats: Vec<String>,
    /// Source headers carried as covariates. `None` keeps every column not
    /// claimed by a canonical field.
    pub covariates: Option<Vec<String>>,
    /// Canonical fields or covariate names that receive null-indicator
    /// columns in feature matrices.
    pub null_indicators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Columns {
    pub proceeding_id: String,
    pub judge_id: String,
    pub nationality: String,
    pub court_id: String,
    pub state: String,
    pub charge_date: String,
    pub decision_date: String,
    pub decision: String,
    pub represented: Option<String>,
    pub custody: Option<String>,
}

impl Default for Columns {
    fn default() -> Self {
        Self {
            proceeding_id: "proceeding_id".into(),
            judge_id: "judge_id".into(),
            nationality: "nationality".into(),
            court_id: "court_id".into(),
            state: "state".into(),
            charge_date: "charge_date".into(),
            decision_date: "decision_date".into(),
            decision: "decision".into(),
            represented: Some("represented".into()),
            custody: Some("custody".into()),
        }
    }
}

impl Columns {
    pub(crate) fn required(&self) -> [(&'static str, &str); 8] {
        [
            ("proceeding_id", &self.proceeding_id),
            ("judge_id", &self.judge_id),
            ("nationality", &self.nationality),
            ("court_id", &self.court_id),
            ("state", &self.state),
            ("charge_date", &self.charge_date),
            ("decision_date", &self.decision_date),
            ("decision", &self.decision),
        ]
    }

    pub(crate) fn claimed(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.required().iter().map(|(_, h)| *h).collect();
        out.extend(self.represented.as_deref());
        out.extend(self.custody.as_deref());
        out
    }
}

/// Source decision codes. Codes match case-insensitively after trimming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionCodes {
    pub grant: Vec<String>,
    pub deny: Vec<String>,
    pub pending: Vec<String>,
    /// Treat any other terminal outcome as a denial instead of excluding it.
    pub other_as_deny: bool,
}

impl Default for DecisionCodes {
    fn default() -> Self {
        Self {
            grant: vec!["GRANT".into()],
            deny: vec!["DENY".into()],
            pending: vec!["PENDING".into(), String::new()],
            other_as_deny: false,
        }
    }
}

impl DecisionCodes {
    /// `None` means the code is an excluded outcome.
    pub fn classify(&self, raw: &str) -> Option<Decision> {
        let raw = raw.trim();
        let hit = |codes: &[String]| codes.iter().any(|c| c.trim().eq_ignore_ascii_case(raw));
        if hit(&self.grant) {
            Some(Decision::Grant)
        } else if hit(&self.deny) {
            Some(Decision::Deny)
        } else if hit(&self.pending) {
            Some(Decision::Pending)
        } else if self.other_as_deny {
            Some(Decision::Deny)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoolCodes {
    pub yes: Vec<String>,
    pub no: Vec<String>,
}

impl Default for BoolCodes {
    fn default() -> Self {
        Self {
            yes: ["true", "1", "yes", "y"].map(String::from).to_vec(),
            no: ["false", "0", "no", "n"].map(String::from).to_vec(),
        }
    }
}

impl BoolCodes {
    /// Unrecognized values read as null.
    pub fn classify(&self, raw: &str) -> Option<bool> {
        let raw = raw.trim();
        if self.yes.iter().any(|c| c.eq_ignore_ascii_case(raw)) {
            Some(true)
        } else if self.no.iter().any(|c| c.eq_ignore_ascii_case(raw)) {
            Some(false)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CustodyCodes {
    pub detained: Vec<String>,
    pub released: Vec<String>,
    pub never_detained: Vec<String>,
}

impl Default for CustodyCodes {
    fn default() -> Self {
        Self {
            detained: vec!["DETAINED".into(), "D".into()],
            released: vec!["RELEASED".into(), "R".into()],
            never_detained: vec!["NEVER_DETAINED".into(), "N".into()],
        }
    }
}

impl CustodyCodes {
    pub fn classify(&self, raw: &str) -> Option<Custody> {
        let raw = raw.trim();
        let hit = |codes: &[String]| codes.iter().any(|c| c.eq_ignore_ascii_case(raw));
        if hit(&self.detained) {
            Some(Custody::Detained)
        } else if hit(&self.released) {
            Some(Custody::Released)
        } else if hit(&self.never_detained) {
            Some(Custody::NeverDetained)
        } else {
            None
        }
    }
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            columns: Columns::default(),
            decisions: DecisionCodes::default(),
            represented: BoolCodes::default(),
            custody: CustodyCodes::default(),
            date_formats: vec![
                "%Y-%m-%d".into(),
                "%m/%d/%Y".into(),
                "%Y-%m-%d %H:%M:%S".into(),
            ],
            covariates: None,
            null_indicators: vec![
                "judge_id".into(),
                "state".into(),
                "represented".into(),
                "custody".into(),
            ],
        }
    }
}

impl ColumnMapping {
    /// Mapping for the canonical corpus layout.
    pub fn canonical() -> Self {
        Self::default()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("column mapping: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn parse_date(&self, raw: &str) -> Option<chrono::NaiveDate> {
        let raw = raw.trim();
        self.date_formats
            .iter()
            .find_map(|f| chrono::NaiveDate::parse_from_str(raw, f).ok())
    }
}
