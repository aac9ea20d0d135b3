//! Python bindings: corpus generation and ingestion, scoring, the
//! Spearman/Bonferroni kit and weekly trend fitting.

use chrono::NaiveDate;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use variability::ingest::{parse_corpus, write_corpus, ColumnMapping, ReferenceTables};
use variability::scoring::{build_index, score_corpus};
use variability::stats;
use variability::synth::{self, ScenarioConfig};
use variability::timeseries::{fit_model, FitOptions, WeeklySeries};
use variability::{Error, ProceedingRecord, ScoreTable};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A parsed or generated list of proceedings.
#[pyclass(frozen)]
struct Corpus {
    records: Vec<ProceedingRecord>,
}

#[pymethods]
impl Corpus {
    /// Parse a CSV file, optionally through a TOML column mapping.
    #[staticmethod]
    #[pyo3(signature = (path, mapping=None))]
    fn read(path: &str, mapping: Option<&str>) -> PyResult<Self> {
        let mapping = match mapping {
            Some(p) => ColumnMapping::load(p).map_err(to_py)?,
            None => ColumnMapping::canonical(),
        };
        let (records, _) = parse_corpus(path, &mapping, &ReferenceTables::shipped()).map_err(to_py)?;
        Ok(Corpus { records })
    }

    /// Seeded synthetic corpus. `scenario` is TOML text; keyword arguments
    /// override it.
    #[staticmethod]
    #[pyo3(signature = (cases=2000, seed=0, base_rate=None, climate_effect=None, scenario=None))]
    fn synthetic(
        cases: usize,
        seed: u64,
        base_rate: Option<f64>,
        climate_effect: Option<f64>,
        scenario: Option<&str>,
    ) -> PyResult<Self> {
        let mut config = match scenario {
            Some(text) => ScenarioConfig::from_toml_str(text).map_err(to_py)?,
            None => ScenarioConfig::default(),
        };
        config.cases = cases;
        config.seed = seed;
        if let Some(b) = base_rate {
            config.base_rate = b;
        }
        if let Some(d) = climate_effect {
            config.climate_effect = d;
        }
        let records = synth::generate(&config).map_err(to_py)?;
        Ok(Corpus { records })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        write_corpus(&self.records, path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.records.len()
    }

    fn grant_rate(&self) -> Option<f64> {
        let decided = self.records.iter().filter(|r| r.decision.is_decided()).count();
        let grants = self.records.iter().filter(|r| r.is_grant()).count();
        (decided > 0).then(|| grants as f64 / decided as f64)
    }

    /// Index-backed scores.
    fn score(&self, py: Python<'_>) -> PyResult<Scores> {
        let table = py
            .detach(|| score_corpus(&self.records, &build_index(&self.records)))
            .map_err(to_py)?;
        Ok(Scores { table })
    }

    /// Scores by brute-force enumeration (small corpora only).
    fn oracle_score(&self, py: Python<'_>) -> PyResult<Scores> {
        let table = py.detach(|| synth::oracle_scores(&self.records)).map_err(to_py)?;
        Ok(Scores { table })
    }
}

#[pyclass(frozen)]
struct Scores {
    table: ScoreTable,
}

#[pymethods]
impl Scores {
    /// `(proceeding_id, judge_id, omega, gamma)` per decided proceeding.
    fn proceedings(&self) -> Vec<(String, Option<String>, Option<f64>, Option<f64>)> {
        self.table
            .proceedings()
            .iter()
            .map(|p| {
                (
                    p.proceeding_id.to_string(),
                    p.judge_id.as_deref().map(str::to_owned),
                    p.omega,
                    p.gamma,
                )
            })
            .collect()
    }

    /// `judge_id -> phi`
    fn judges<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for j in self.table.judges() {
            d.set_item(&*j.judge_id, j.phi)?;
        }
        Ok(d)
    }

    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.table.summary();
        let d = PyDict::new(py);
        d.set_item("proceedings", s.proceedings)?;
        d.set_item("judges", s.judges)?;
        d.set_item("mean_omega", s.mean_omega)?;
        d.set_item("mean_gamma", s.mean_gamma)?;
        d.set_item("mean_phi", s.mean_phi)?;
        Ok(d)
    }

    fn __eq__(&self, other: &Scores) -> bool {
        self.table == other.table
    }
}

/// Spearman's rho and its two-sided p-value. NaN marks a missing value.
#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
    let r = stats::spearman(&x, &y).map_err(to_py)?;
    Ok((r.rho, r.p_value))
}

#[pyfunction]
#[pyo3(signature = (p_values, alpha=0.05))]
fn bonferroni(p_values: Vec<f64>, alpha: f64) -> PyResult<Vec<bool>> {
    stats::bonferroni(&p_values, alpha).map_err(to_py)
}

/// Fits the changepoint trend plus yearly seasonality to a weekly series
/// given as ISO dates (Mondays) and values.
#[pyfunction]
#[pyo3(signature = (weeks, values, changepoint_scale=0.1, seasonality_scale=0.01))]
fn fit_trend<'py>(
    py: Python<'py>,
    weeks: Vec<String>,
    values: Vec<f64>,
    changepoint_scale: f64,
    seasonality_scale: f64,
) -> PyResult<Bound<'py, PyDict>> {
    if weeks.len() != values.len() {
        return Err(PyValueError::new_err("weeks and values differ in length"));
    }
    let dates = weeks
        .iter()
        .map(|w| {
            NaiveDate::parse_from_str(w, "%Y-%m-%d")
                .map_err(|e| PyValueError::new_err(format!("bad date {w:?}: {e}")))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let series = WeeklySeries::from_values(dates.into_iter().zip(values)).map_err(to_py)?;
    let options = FitOptions {
        changepoint_scale,
        seasonality_scale,
        ..FitOptions::default()
    };
    let model = py.detach(|| fit_model(&series, &options)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("k", model.k)?;
    d.set_item("m", model.m)?;
    d.set_item("sigma", model.sigma)?;
    let cps: Vec<(String, f64)> = model
        .changepoints
        .iter()
        .map(|c| (c.date.to_string(), c.delta))
        .collect();
    d.set_item("changepoints", cps)?;
    d.set_item("fourier", model.fourier.clone())?;
    let fitted: Vec<f64> = series.points().iter().map(|p| model.predict(p.week_start)).collect();
    d.set_item("fitted", fitted)?;
    Ok(d)
}

#[pymodule]
pub fn variability_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_class::<Scores>()?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(bonferroni, m)?)?;
    m.add_function(wrap_pyfunction!(fit_trend, m)?)?;
    Ok(())
}
