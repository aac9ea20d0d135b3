use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{
    resolve_climate, year_bin, Code, ColumnMapping, CovariateValue, Custody,
    ProceedingRecord, ReferenceTables,
};

/// Fixed leading columns of the canonical corpus file. Covariates follow in
/// name order.
pub const CANONICAL_COLUMNS: [&str; 10] = [
    "proceeding_id",
    "judge_id",
    "nationality",
    "court_id",
    "state",
    "charge_date",
    "decision_date",
    "decision",
    "represented",
    "custody",
];

const CHUNK_ROWS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionKind {
    MissingField,
    MalformedDate,
    InvariantViolation,
    PreWindow,
    ExcludedOutcome,
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    /// 1-based line in the source file (the header is line 1).
    pub line: u64,
    pub proceeding_id: Option<String>,
    pub kind: RejectionKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub source: String,
    pub rows_read: usize,
    pub records: usize,
    pub pending: usize,
    /// Decided records whose political climate could not be resolved.
    pub climate_unresolved: usize,
    pub rejected: usize,
    pub rejected_by_kind: BTreeMap<String, usize>,
    pub rejections: Vec<Rejection>,
    /// Null count per nullable field over accepted records.
    pub null_counts: BTreeMap<String, usize>,
    pub covariates: Vec<String>,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }
}

struct Layout {
    proceeding_id: usize,
    judge_id: usize,
    nationality: usize,
    court_id: usize,
    state: usize,
    charge_date: usize,
    decision_date: usize,
    decision: usize,
    represented: Option<usize>,
    custody: Option<usize>,
    covariates: Vec<(Code, usize)>,
}

impl Layout {
    fn resolve(headers: &csv::StringRecord, mapping: &ColumnMapping, warnings: &mut Vec<String>) -> Result<Self> {
        let find = |name: &str| headers.iter().position(|h| h.trim() == name);
        let cols = &mapping.columns;
        let mut required = [0usize; 8];
        for (slot, (field, header)) in required.iter_mut().zip(cols.required()) {
            *slot = find(header).ok_or_else(|| {
                Error::Config(format!(
                    "required column {header:?} (canonical field {field}) is missing from the header"
                ))
            })?;
        }
        let mut optional = |header: &Option<String>| match header {
            Some(h) => {
                let idx = find(h);
                if idx.is_none() {
                    warnings.push(format!("optional column {h:?} not present; values read as null"));
                }
                idx
            }
            None => None,
        };
        let represented = optional(&cols.represented);
        let custody = optional(&cols.custody);

        let claimed = cols.claimed();
        let covariates: Vec<(Code, usize)> = match &mapping.covariates {
            Some(names) => names
                .iter()
                .map(|n| {
                    find(n)
                        .map(|i| (Arc::from(n.as_str()), i))
                        .ok_or_else(|| Error::Config(format!("covariate column {n:?} is missing")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => headers
                .iter()
                .enumerate()
                .filter(|(_, h)| !claimed.contains(&h.trim()))
                .map(|(i, h)| (Arc::from(h.trim()), i))
                .collect(),
        };
        let mut seen = HashSet::new();
        for (name, _) in &covariates {
            if !seen.insert(name.clone()) {
                return Err(Error::Config(format!("duplicate covariate column {name:?}")));
            }
        }
        Ok(Layout {
            proceeding_id: required[0],
            judge_id: required[1],
            nationality: required[2],
            court_id: required[3],
            state: required[4],
            charge_date: required[5],
            decision_date: required[6],
            decision: required[7],
            represented,
            custody,
            covariates,
        })
    }
}

#[derive(Default)]
struct Interner(FxHashMap<String, Code>);

impl Interner {
    fn get(&mut self, s: &str) -> Code {
        if let Some(c) = self.0.get(s) {
            return c.clone();
        }
        let c: Code = Arc::from(s);
        self.0.insert(s.to_owned(), c.clone());
        c
    }
}

fn non_empty(s: &str) -> Option<&str> {
    let s = s.trim();
    (!s.is_empty()).then_some(s)
}

fn convert_row(
    row: &csv::StringRecord,
    line: u64,
    layout: &Layout,
    mapping: &ColumnMapping,
    tables: &ReferenceTables,
    interner: &mut Interner,
) -> std::result::Result<ProceedingRecord, Rejection> {
    let field = |i: usize| row.get(i).unwrap_or("");
    let pid = non_empty(field(layout.proceeding_id)).map(str::to_owned);
    let reject = |kind, detail: String| Rejection {
        line,
        proceeding_id: pid.clone(),
        kind,
        detail,
    };
    let required = |i: usize, name: &str| {
        non_empty(field(i)).ok_or_else(|| reject(RejectionKind::MissingField, format!("{name} is empty")))
    };

    let proceeding_id: Code = Arc::from(required(layout.proceeding_id, "proceeding_id")?);
    let nationality = interner.get(required(layout.nationality, "nationality")?);
    let court_id = interner.get(required(layout.court_id, "court_id")?);
    let judge_id = non_empty(field(layout.judge_id)).map(|s| interner.get(s));
    let state = non_empty(field(layout.state)).map(|s| interner.get(&s.to_ascii_uppercase()));

    let date = |i: usize, name: &str| -> std::result::Result<Option<chrono::NaiveDate>, Rejection> {
        match non_empty(field(i)) {
            None => Ok(None),
            Some(raw) => mapping
                .parse_date(raw)
                .map(Some)
                .ok_or_else(|| reject(RejectionKind::MalformedDate, format!("{name} {raw:?} is not a date"))),
        }
    };
    let charge_date = date(layout.charge_date, "charge_date")?
        .ok_or_else(|| reject(RejectionKind::MissingField, "charge_date is empty".into()))?;
    let decision_date = date(layout.decision_date, "decision_date")?;

    let raw_decision = field(layout.decision);
    let decision = mapping.decisions.classify(raw_decision).ok_or_else(|| {
        reject(
            RejectionKind::ExcludedOutcome,
            format!("decision code {:?} is not mapped", raw_decision.trim()),
        )
    })?;

    let represented = layout
        .represented
        .and_then(|i| mapping.represented.classify(field(i)));
    let custody = layout
        .custody
        .and_then(|i| mapping.custody.classify(field(i)));

    let covariates = layout
        .covariates
        .iter()
        .map(|(name, i)| {
            let value = CovariateValue::parse(field(*i)).map(|v| match v {
                CovariateValue::Text(t) => CovariateValue::Text(interner.get(&t)),
                n => n,
            });
            (name.clone(), value)
        })
        .collect();

    let mut record = ProceedingRecord {
        proceeding_id,
        judge_id,
        nationality,
        court_id,
        state,
        charge_date,
        decision_date,
        decision,
        represented,
        custody,
        covariates,
        climate: None,
    };
    record
        .validate()
        .map_err(|msg| reject(RejectionKind::InvariantViolation, msg))?;
    if let Some(dd) = record.decision_date {
        year_bin(dd).map_err(|e| reject(RejectionKind::PreWindow, e.to_string()))?;
    }
    record.climate = resolve_climate(&record, tables);
    Ok(record)
}

/// Parses a raw proceeding CSV into validated records.
///
/// Row-level problems never abort ingestion: each becomes a [`Rejection`].
/// Only a header that lacks a required column is fatal.
pub fn parse_corpus(
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
    tables: &ReferenceTables,
) -> Result<(Vec<ProceedingRecord>, IngestReport)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let (records, mut report) =
        parse_corpus_reader(std::io::BufReader::new(file), mapping, tables)?;
    report.source = path.display().to_string();
    Ok((records, report))
}

pub fn parse_corpus_reader(
    reader: impl Read,
    mapping: &ColumnMapping,
    tables: &ReferenceTables,
) -> Result<(Vec<ProceedingRecord>, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut report = IngestReport::default();
    let layout = Layout::resolve(rdr.headers()?, mapping, &mut report.warnings)?;
    report.covariates = layout.covariates.iter().map(|(n, _)| n.to_string()).collect();

    let mut rows = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        rows.push((line, row));
    }
    report.rows_read = rows.len();

    let converted: Vec<(u64, std::result::Result<ProceedingRecord, Rejection>)> = rows
        .par_chunks(CHUNK_ROWS)
        .flat_map_iter(|chunk| {
            let mut interner = Interner::default();
            chunk
                .iter()
                .map(|(line, row)| {
                    (*line, convert_row(row, *line, &layout, mapping, tables, &mut interner))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    drop(rows);

    let mut seen: HashSet<Code> = HashSet::with_capacity(converted.len());
    let mut records = Vec::with_capacity(converted.len());
    for (line, item) in converted {
        match item {
            Ok(rec) => {
                if seen.insert(rec.proceeding_id.clone()) {
                    records.push(rec);
                } else {
                    report.rejections.push(Rejection {
                        line,
                        proceeding_id: Some(rec.proceeding_id.to_string()),
                        kind: RejectionKind::DuplicateId,
                        detail: "proceeding_id already seen".into(),
                    });
                }
            }
            Err(rej) => report.rejections.push(rej),
        }
    }

    report.records = records.len();
    report.rejected = report.rejections.len();
    for r in &report.rejections {
        let key = serde_json::to_value(r.kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        *report.rejected_by_kind.entry(key).or_default() += 1;
    }
    report.pending = records.iter().filter(|r| !r.decision.is_decided()).count();
    report.climate_unresolved = records
        .iter()
        .filter(|r| r.decision.is_decided() && r.climate.is_none())
        .count();
    report.null_counts = null_counts(&records, &report.covariates);
    Ok((records, report))
}

fn null_counts(records: &[ProceedingRecord], covariates: &[String]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for field in super::NULLABLE_FIELDS.iter().map(|s| s.to_string()).chain(covariates.iter().cloned()) {
        let n = records.iter().filter(|r| super::is_null_field(r, &field)).count();
        counts.insert(field, n);
    }
    counts
}

fn covariate_union(records: &[ProceedingRecord]) -> Vec<Code> {
    let names: BTreeSet<&Code> = records.iter().flat_map(|r| r.covariates.keys()).collect();
    names.into_iter().cloned().collect()
}

/// Writes records in the canonical corpus layout.
pub fn write_corpus_to(records: &[ProceedingRecord], writer: impl Write) -> Result<()> {
    let covariates = covariate_union(records);
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<&str> = CANONICAL_COLUMNS
        .iter()
        .copied()
        .chain(covariates.iter().map(|c| &**c))
        .collect();
    w.write_record(&header)?;
    let mut fields: Vec<String> = Vec::with_capacity(header.len());
    for r in records {
        fields.clear();
        fields.push(r.proceeding_id.to_string());
        fields.push(r.judge_id.as_deref().unwrap_or("").to_owned());
        fields.push(r.nationality.to_string());
        fields.push(r.court_id.to_string());
        fields.push(r.state.as_deref().unwrap_or("").to_owned());
        fields.push(r.charge_date.format("%Y-%m-%d").to_string());
        fields.push(
            r.decision_date
                .map(|d| d.format("%Y-%m-%d").to_string())
                .unwrap_or_default(),
        );
        fields.push(r.decision.as_str().to_owned());
        fields.push(r.represented.map(|b| b.to_string()).unwrap_or_default());
        fields.push(r.custody.map(Custody::as_str).unwrap_or("").to_owned());
        for c in &covariates {
            let v = r.covariates.get(c).and_then(|v| v.as_ref());
            fields.push(v.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(|e| Error::io("<corpus writer>", e))?;
    Ok(())
}

pub fn write_corpus(records: &[ProceedingRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus_to(records, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "proceeding_id,judge_id,nationality,court_id,state,charge_date,decision_date,decision,represented,custody,language\n";

    fn parse(text: &str) -> (Vec<ProceedingRecord>, IngestReport) {
        parse_corpus_reader(
            text.as_bytes(),
            &ColumnMapping::canonical(),
            &ReferenceTables::shipped(),
        )
        .unwrap()
    }

    #[test]
    fn well_formed_rows() {
        let text = format!(
            "{HEADER}p1,J1,MX,SFR,CA,2018-01-02,2019-06-01,GRANT,true,DETAINED,es\n\
             p2,J2,MX,SFR,CA,2018-01-02,2019-07-01,DENY,false,,es\n\
             p3,,CN,NYC,NY,2020-01-02,,PENDING,,,\n"
        );
        let (records, report) = parse(&text);
        assert_eq!(records.len(), 3);
        assert_eq!(report.rejected, 0);
        assert_eq!(report.pending, 1);
        assert_eq!(report.null_counts["judge_id"], 1);
        assert_eq!(report.null_counts["custody"], 2);
        assert_eq!(report.null_counts["language"], 1);
        assert_eq!(records[0].climate.unwrap().president_party, crate::Party::PartyB);
        assert_eq!(records[2].climate, None);
    }

    #[test]
    fn decision_without_date_is_rejected() {
        let text = format!("{HEADER}p1,J1,MX,SFR,CA,2018-01-02,,GRANT,,,\n");
        let (records, report) = parse(&text);
        assert!(records.is_empty());
        assert_eq!(report.rejections[0].kind, RejectionKind::InvariantViolation);
        assert_eq!(report.rejections[0].line, 2);
    }

    #[test]
    fn row_problems_are_classified() {
        let text = format!(
            "{HEADER}p1,J1,MX,SFR,CA,2018-01-02,2019-02-30,GRANT,,,\n\
             p2,J1,MX,SFR,CA,1978-01-02,1979-05-01,GRANT,,,\n\
             p3,J1,MX,SFR,CA,2018-01-02,2019-05-01,WITHDRAWN,,,\n\
             p4,J1,,SFR,CA,2018-01-02,2019-05-01,GRANT,,,\n\
             p5,J1,MX,SFR,CA,2019-06-02,2019-05-01,GRANT,,,\n\
             p6,J1,MX,SFR,CA,2018-01-02,2019-05-01,GRANT,,,\n\
             p6,J1,MX,SFR,CA,2018-01-02,2019-05-01,DENY,,,\n"
        );
        let (records, report) = parse(&text);
        assert_eq!(records.len(), 1);
        let kinds: Vec<_> = report.rejections.iter().map(|r| r.kind).collect();
        assert_eq!(
            kinds,
            vec![
                RejectionKind::MalformedDate,
                RejectionKind::PreWindow,
                RejectionKind::ExcludedOutcome,
                RejectionKind::MissingField,
                RejectionKind::InvariantViolation,
                RejectionKind::DuplicateId,
            ]
        );
        assert_eq!(report.rejected_by_kind["malformed_date"], 1);
    }

    #[test]
    fn missing_required_header_is_fatal() {
        let err = parse_corpus_reader(
            "proceeding_id,judge_id\np1,J1\n".as_bytes(),
            &ColumnMapping::canonical(),
            &ReferenceTables::shipped(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn canonical_output_round_trips() {
        let text = format!(
            "{HEADER}p1,J1,MX,SFR,ca,2018-01-02,2019-06-01,GRANT,true,DETAINED,es\n\
             p2,J2,MX,SFR,CA,2018-01-02,2019-07-01,DENY,false,,3.5\n\
             p3,,CN,NYC,,2020-01-02,,PENDING,,,\n"
        );
        let (records, _) = parse(&text);
        let mut buf = Vec::new();
        write_corpus_to(&records, &mut buf).unwrap();
        let (again, _) = parse(std::str::from_utf8(&buf).unwrap());
        assert_eq!(records, again);
    }
}
