use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::stats::pearson;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2003, 1, 6).unwrap()
}

fn weekly(weeks: usize, mut f: impl FnMut(usize, NaiveDate) -> f64) -> WeeklySeries {
    WeeklySeries::from_values((0..weeks).map(|i| {
        let d = start() + Duration::weeks(i as i64);
        (d, f(i, d))
    }))
    .unwrap()
}

fn yearly_wave(d: NaiveDate) -> f64 {
    let days = (d - NaiveDate::from_ymd_opt(1970, 1, 1).unwrap()).num_days() as f64;
    (2.0 * std::f64::consts::PI * days / 365.25).sin()
}

fn two_segment(i: usize) -> f64 {
    let brk = 208.0;
    let x = i as f64;
    if x <= brk {
        0.1 + 0.001 * x
    } else {
        0.1 + 0.001 * brk + 0.003 * (x - brk)
    }
}

/// Weekly slope of the fitted trend at scaled time `t`.
fn weekly_slope(m: &TrendModel, t: f64) -> f64 {
    m.rate_at(t) / m.span_days * 7.0
}

#[test]
fn constant_series_is_flat() {
    let s = weekly(300, |_, _| 0.4);
    let m = fit_model(&s, &FitOptions::default()).unwrap();
    assert!(m.changepoints.iter().all(|c| c.delta == 0.0));
    assert!(m.fourier.iter().all(|b| b.abs() < 1e-6), "{:?}", m.fourier);
    assert!((m.m - 0.4).abs() < 1e-9);
    assert!(m.k.abs() < 1e-9);
}

#[test]
fn two_segment_line_recovered() {
    let s = weekly(416, |i, _| two_segment(i));
    let m = fit_model(&s, &FitOptions::default()).unwrap();
    let early = weekly_slope(&m, 0.2);
    let late = weekly_slope(&m, 0.9);
    assert!((early - 0.001).abs() <= 0.1 * 0.001, "early slope {early}");
    assert!((late - 0.003).abs() <= 0.1 * 0.003, "late slope {late}");
    let zeros = m.changepoints.iter().filter(|c| c.delta == 0.0).count();
    assert!(zeros * 5 >= m.changepoints.len() * 4, "{zeros} zero deltas");
}

#[test]
fn yearly_sinusoid_goes_to_seasonality() {
    let s = weekly(6 * 52, |_, d| yearly_wave(d));
    let opts = FitOptions {
        seasonality_scale: 10.0,
        ..FitOptions::default()
    };
    let m = fit_model(&s, &opts).unwrap();
    let y: Vec<f64> = s.points().iter().map(|p| p.value).collect();
    let resid: Vec<f64> = s
        .points()
        .iter()
        .map(|p| p.value - m.seasonality(p.week_start))
        .collect();
    let var = |v: &[f64]| {
        let mu = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / v.len() as f64
    };
    let explained = 1.0 - var(&resid) / var(&y);
    assert!(explained >= 0.95, "explained {explained}");
}

#[test]
fn decomposition_is_additive_and_anchored() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = weekly(5 * 52, |i, d| 0.2 + 0.0004 * i as f64 + 0.05 * yearly_wave(d) + rng.gen_range(-0.01..0.01));
    let m = fit_model(&s, &FitOptions::default()).unwrap();
    let rows = decompose(&m, s.first_week().unwrap(), s.last_week().unwrap(), Some(&s));
    assert_eq!(rows.len(), s.len());
    for r in &rows {
        assert!((r.fitted - r.trend - r.seasonality).abs() < 1e-12);
        assert!(r.lower <= r.fitted && r.fitted <= r.upper);
        assert!(r.actual.is_some());
    }
    assert!((m.trend(s.first_week().unwrap()) - m.m).abs() < 1e-12);
}

#[test]
fn decomposition_tracks_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trend_gen = |i: usize| 0.2 + 0.0004 * i as f64;
    let s = weekly(6 * 52, |i, d| trend_gen(i) + 0.05 * yearly_wave(d) + rng.gen_range(-0.01..0.01));
    let opts = FitOptions {
        seasonality_scale: 1.0,
        ..FitOptions::default()
    };
    let m = fit_model(&s, &opts).unwrap();
    let rows = decompose(&m, s.first_week().unwrap(), s.last_week().unwrap(), None);
    let trend: Vec<f64> = rows.iter().map(|r| r.trend).collect();
    let seas: Vec<f64> = rows.iter().map(|r| r.seasonality).collect();
    let true_trend: Vec<f64> = (0..rows.len()).map(trend_gen).collect();
    let true_seas: Vec<f64> = rows.iter().map(|r| yearly_wave(r.week_start)).collect();
    assert!(pearson(&trend, &true_trend).unwrap() > 0.9);
    assert!(pearson(&seas, &true_seas).unwrap() > 0.9);
}

#[test]
fn trend_is_continuous_at_changepoints() {
    let s = weekly(416, |i, _| two_segment(i) + 0.01 * ((i * 7) % 13) as f64);
    let m = fit_model(&s, &FitOptions::default()).unwrap();
    for c in &m.changepoints {
        let eps = 1e-12;
        assert!((m.trend_at(c.t + eps) - m.trend_at(c.t - eps)).abs() < 1e-9);
    }
}

#[test]
fn objective_never_increases() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = weekly(300, |i, d| 0.001 * i as f64 + 0.1 * yearly_wave(d) + rng.gen_range(-0.05..0.05));
    let m = fit_model(&s, &FitOptions::default()).unwrap();
    let trace = &m.diagnostics.objective_trace;
    assert!(trace.len() > 1);
    for w in trace.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn sparsity_shrinks_with_changepoint_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = weekly(416, |i, d| two_segment(i) + 0.02 * yearly_wave(d) + rng.gen_range(-0.02..0.02));
    let counts: Vec<usize> = [1.0, 0.1, 0.01]
        .iter()
        .map(|&cp| {
            let opts = FitOptions {
                changepoint_scale: cp,
                ..FitOptions::default()
            };
            fit_model(&s, &opts).unwrap().nonzero_deltas()
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
}

#[test]
fn random_placement_is_seeded() {
    let s = weekly(300, |i, _| two_segment(i));
    let opts = FitOptions {
        placement: Placement::Random { seed: 8 },
        ..FitOptions::default()
    };
    let a = fit_model(&s, &opts).unwrap();
    let b = fit_model(&s, &opts).unwrap();
    assert_eq!(a, b);
    assert!(a.changepoints.windows(2).all(|w| w[0].t <= w[1].t));
    assert!(a.changepoints.iter().all(|c| c.t > 0.0 && c.t <= 0.8));
}

#[test]
fn degenerate_inputs_are_errors() {
    let s = weekly(10, |i, _| i as f64);
    assert!(fit_model(&s, &FitOptions::default()).is_err());
    let one = weekly(1, |_, _| 1.0);
    let tiny = FitOptions {
        n_changepoints: 0,
        fourier_order: 0,
        ..FitOptions::default()
    };
    assert!(fit_model(&one, &tiny).is_err());
}

#[test]
fn count_weighting_changes_the_fit() {
    let mut points: Vec<WeeklyPoint> = weekly(200, |i, _| if i % 2 == 0 { 0.2 } else { 0.6 })
        .points()
        .to_vec();
    for (i, p) in points.iter_mut().enumerate() {
        p.count = if i % 2 == 0 { 9 } else { 1 };
    }
    let s = WeeklySeries::new(points).unwrap();
    let base = FitOptions {
        n_changepoints: 0,
        fourier_order: 0,
        ..FitOptions::default()
    };
    let equal = fit_model(&s, &base).unwrap();
    let weighted = fit_model(&s, &FitOptions { count_weighted: true, ..base }).unwrap();
    assert!((equal.m - 0.4).abs() < 0.01);
    assert!((weighted.m - 0.24).abs() < 0.01);
}
