//! Weekly partisanship series and a piecewise-linear trend plus yearly
//! seasonality model with sparse changepoints.

mod cv;
mod model;
mod weekly;

use std::io::Write;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cv::{
    grid_search, rolling_folds, CvOptions, CvScore, Fold, GridSearchResult,
    DEFAULT_CHANGEPOINT_SCALES, DEFAULT_SEASONALITY_SCALES,
};
pub use model::{fit_model, Changepoint, FitDiagnostics, FitOptions, Placement, TrendModel};
pub use weekly::{aggregate_weekly, week_start, WeeklyPoint, WeeklySeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRow {
    pub week_start: NaiveDate,
    pub actual: Option<f64>,
    pub trend: f64,
    pub seasonality: f64,
    pub fitted: f64,
    /// Fitted value plus the 10th / 90th residual percentiles.
    pub lower: f64,
    pub upper: f64,
}

/// Trend, seasonality and fitted values for every week from `from` to `to`
/// inclusive (both snapped to Mondays), with actual values where `series`
/// has them.
pub fn decompose(
    model: &TrendModel,
    from: NaiveDate,
    to: NaiveDate,
    series: Option<&WeeklySeries>,
) -> Vec<DecompositionRow> {
    let actual: std::collections::HashMap<NaiveDate, f64> = series
        .map(|s| s.points().iter().map(|p| (p.week_start, p.value)).collect())
        .unwrap_or_default();
    let mut rows = Vec::new();
    let mut week = week_start(from);
    while week <= to {
        let trend = model.trend(week);
        let seasonality = model.seasonality(week);
        let fitted = trend + seasonality;
        rows.push(DecompositionRow {
            week_start: week,
            actual: actual.get(&week).copied(),
            trend,
            seasonality,
            fitted,
            lower: fitted + model.residual_quantiles.0,
            upper: fitted + model.residual_quantiles.1,
        });
        week += chrono::Duration::weeks(1);
    }
    rows
}

pub fn write_decomposition_csv(rows: &[DecompositionRow], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["week_start", "actual", "trend", "seasonality", "fitted", "lower", "upper"])?;
    for r in rows {
        w.write_record([
            r.week_start.to_string(),
            r.actual.map_or(String::new(), |v| v.to_string()),
            r.trend.to_string(),
            r.seasonality.to_string(),
            r.fitted.to_string(),
            r.lower.to_string(),
            r.upper.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests;
