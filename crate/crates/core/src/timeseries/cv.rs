use chrono::{Months, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_model, FitOptions, WeeklySeries};
use crate::error::{Error, Result};

/// Default grids; their middle cell (0.1, 0.01) is the customary choice.
pub const DEFAULT_CHANGEPOINT_SCALES: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];
pub const DEFAULT_SEASONALITY_SCALES: [f64; 5] = [0.001, 0.005, 0.01, 0.05, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    /// Training covers weeks before `holdout_start`.
    pub holdout_start: NaiveDate,
    /// Exclusive end of the one-year hold-out.
    pub holdout_end: NaiveDate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub changepoint_scale: f64,
    pub seasonality_scale: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r2: f64,
    pub holdout_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub folds: Vec<Fold>,
    /// One entry per grid cell, changepoint scale varying slowest.
    pub cells: Vec<CvScore>,
    pub best: CvScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvOptions {
    /// Minimum training history before the first hold-out year.
    pub initial_years: u32,
    /// Keep only the most recent folds.
    pub max_folds: usize,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            initial_years: 2,
            max_folds: 5,
        }
    }
}

/// Rolling-origin folds: each hold-out is one year, and its model trains
/// only on the weeks before it.
pub fn rolling_folds(series: &WeeklySeries, cv: &CvOptions) -> Result<Vec<Fold>> {
    let (Some(first), Some(last)) = (series.first_week(), series.last_week()) else {
        return Err(Error::invalid("empty series"));
    };
    let year = Months::new(12);
    let mut folds = Vec::new();
    let mut cut = first + Months::new(12 * cv.initial_years);
    while cut + year <= last + chrono::Duration::days(7) {
        folds.push(Fold {
            holdout_start: cut,
            holdout_end: cut + year,
        });
        cut = cut + year;
    }
    if folds.is_empty() {
        return Err(Error::invalid(format!(
            "series spans {first} to {last}; cross-validation needs at least {} years",
            cv.initial_years + 1
        )));
    }
    let skip = folds.len().saturating_sub(cv.max_folds.max(1));
    Ok(folds.split_off(skip))
}

fn score_cell(series: &WeeklySeries, folds: &[Fold], options: &FitOptions) -> Result<CvScore> {
    let mut actual = Vec::new();
    let mut predicted = Vec::new();
    for fold in folds {
        let train = series.window(NaiveDate::MIN, fold.holdout_start);
        let model = fit_model(&train, options)?;
        for p in series.window(fold.holdout_start, fold.holdout_end).points() {
            actual.push(p.value);
            predicted.push(model.predict(p.week_start));
        }
    }
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let sse: f64 = actual.iter().zip(&predicted).map(|(a, p)| (a - p).powi(2)).sum();
    let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
    Ok(CvScore {
        changepoint_scale: options.changepoint_scale,
        seasonality_scale: options.seasonality_scale,
        rmse: (sse / n).sqrt(),
        mae: actual.iter().zip(&predicted).map(|(a, p)| (a - p).abs()).sum::<f64>() / n,
        r2: if sst > 0.0 { 1.0 - sse / sst } else { f64::NAN },
        holdout_points: actual.len(),
    })
}

/// Picks the (changepoint, seasonality) scale pair with the lowest
/// rolling-origin cross-validated RMSE. Ties go to the earlier cell.
pub fn grid_search(
    series: &WeeklySeries,
    changepoint_scales: &[f64],
    seasonality_scales: &[f64],
    base: &FitOptions,
    cv: &CvOptions,
) -> Result<GridSearchResult> {
    if changepoint_scales.is_empty() || seasonality_scales.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    let folds = rolling_folds(series, cv)?;
    let grid: Vec<FitOptions> = changepoint_scales
        .iter()
        .flat_map(|&cp| {
            seasonality_scales.iter().map(move |&ss| FitOptions {
                changepoint_scale: cp,
                seasonality_scale: ss,
                ..*base
            })
        })
        .collect();
    let cells: Vec<CvScore> = grid
        .par_iter()
        .map(|o| score_cell(series, &folds, o))
        .collect::<Result<_>>()?;
    let best = *cells
        .iter()
        .reduce(|a, b| if b.rmse < a.rmse { b } else { a })
        .expect("non-empty grid");
    Ok(GridSearchResult { folds, cells, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::WeeklySeries;
    use chrono::Duration;

    fn series(weeks: usize, f: impl Fn(usize) -> f64) -> WeeklySeries {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        WeeklySeries::from_values((0..weeks).map(|i| (start + Duration::weeks(i as i64), f(i)))).unwrap()
    }

    #[test]
    fn folds_never_train_on_their_holdout() {
        let s = series(6 * 52, |i| i as f64);
        let folds = rolling_folds(&s, &CvOptions::default()).unwrap();
        assert!(!folds.is_empty() && folds.len() <= 5);
        for f in &folds {
            let train = s.window(NaiveDate::MIN, f.holdout_start);
            assert!(train.last_week().unwrap() < f.holdout_start);
            assert_eq!(f.holdout_end, f.holdout_start + Months::new(12));
        }
    }

    #[test]
    fn short_history_is_error() {
        let s = series(100, |i| i as f64);
        assert!(rolling_folds(&s, &CvOptions::default()).is_err());
    }

    #[test]
    fn noise_free_line_is_predicted_exactly() {
        let s = series(5 * 52, |i| 0.2 + 0.001 * i as f64);
        let base = FitOptions {
            n_changepoints: 5,
            fourier_order: 2,
            ..FitOptions::default()
        };
        let r = grid_search(&s, &[0.05, 0.1], &[0.01], &base, &CvOptions::default()).unwrap();
        assert!(r.best.rmse < 1e-3, "{:?}", r.best);
        assert!(r.cells.iter().all(|c| r.best.rmse <= c.rmse));
    }
}
