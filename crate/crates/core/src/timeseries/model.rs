use std::f64::consts::PI;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WeeklySeries;
use crate::error::{Error, Result};

const YEAR_DAYS: f64 = 365.25;
const SIGMA2_FLOOR: f64 = 1e-12;
const NOISE_FLOOR: f64 = 1e-2;

/// Where candidate changepoints go within the first `changepoint_range`
/// of the history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Uniform,
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Laplace scale of the rate changes; smaller means sparser.
    pub changepoint_scale: f64,
    /// Scale of the Fourier-coefficient penalty; smaller means flatter.
    pub seasonality_scale: f64,
    pub n_changepoints: usize,
    pub fourier_order: usize,
    pub changepoint_range: f64,
    pub placement: Placement,
    /// Weight each week by its case count instead of equally.
    pub count_weighted: bool,
    pub max_sweeps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            changepoint_scale: 0.1,
            seasonality_scale: 0.01,
            n_changepoints: 25,
            fourier_order: 10,
            changepoint_range: 0.8,
            placement: Placement::Uniform,
            count_weighted: false,
            max_sweeps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Changepoint {
    pub date: NaiveDate,
    /// Position in scaled time (0 at the first week, 1 at the last).
    pub t: f64,
    /// Change in growth rate, in value units per unit of scaled time.
    pub delta: f64,
}

/// Fitted additive model `y(t) = trend(t) + seasonality(t)`, with
///
/// `trend(t) = k·t + m + Σ_j delta_j·max(0, t − s_j)`
///
/// in scaled time `t = (date − start) / span_days`, and yearly
/// seasonality `Σ_n a_n cos(2πn·d/365.25) + b_n sin(2πn·d/365.25)` over
/// days `d` since 1970-01-01. All parameters are in the units of the
/// series values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendModel {
    pub start: NaiveDate,
    pub span_days: f64,
    pub k: f64,
    pub m: f64,
    pub changepoints: Vec<Changepoint>,
    pub fourier_order: usize,
    /// `[a_1, b_1, a_2, b_2, ...]`
    pub fourier: Vec<f64>,
    pub changepoint_scale: f64,
    pub seasonality_scale: f64,
    /// Residual standard deviation at the optimum.
    pub sigma: f64,
    /// 10th and 90th percentiles of the in-sample residuals.
    pub residual_quantiles: (f64, f64),
    pub diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub outer_iterations: usize,
    pub sweeps: usize,
    pub converged: bool,
    /// Objective after every sweep of the final inner solve.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl TrendModel {
    pub fn scaled_time(&self, date: NaiveDate) -> f64 {
        (date - self.start).num_days() as f64 / self.span_days
    }

    pub fn trend_at(&self, t: f64) -> f64 {
        self.k * t
            + self.m
            + self
                .changepoints
                .iter()
                .map(|c| c.delta * (t - c.t).max(0.0))
                .sum::<f64>()
    }

    pub fn trend(&self, date: NaiveDate) -> f64 {
        self.trend_at(self.scaled_time(date))
    }

    pub fn seasonality(&self, date: NaiveDate) -> f64 {
        fourier_row(date, self.fourier_order)
            .iter()
            .zip(&self.fourier)
            .map(|(x, b)| x * b)
            .sum()
    }

    pub fn predict(&self, date: NaiveDate) -> f64 {
        self.trend(date) + self.seasonality(date)
    }

    /// Growth rate per unit scaled time just after `t`.
    pub fn rate_at(&self, t: f64) -> f64 {
        self.k
            + self
                .changepoints
                .iter()
                .filter(|c| c.t <= t)
                .map(|c| c.delta)
                .sum::<f64>()
    }

    pub fn nonzero_deltas(&self) -> usize {
        self.changepoints.iter().filter(|c| c.delta != 0.0).count()
    }
}

fn days_since_epoch(date: NaiveDate) -> f64 {
    (date - NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid")).num_days() as f64
}

fn fourier_row(date: NaiveDate, order: usize) -> Vec<f64> {
    let d = days_since_epoch(date);
    let mut row = Vec::with_capacity(2 * order);
    for n in 1..=order {
        let x = 2.0 * PI * n as f64 * d / YEAR_DAYS;
        row.push(x.cos());
        row.push(x.sin());
    }
    row
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Penalty {
    Free,
    Lasso,
    Ridge,
}

/// Penalized weighted least squares in Gram form:
/// `½ bᵀGb − cᵀb + ½ yy + l1·Σ_lasso |b| + ½ l2·Σ_ridge b²`.
struct Problem<'a> {
    g: &'a DMatrix<f64>,
    c: &'a DVector<f64>,
    yy: f64,
    kinds: &'a [Penalty],
    l1: f64,
    l2: f64,
}

impl Problem<'_> {
    fn objective(&self, b: &[f64], gb: &[f64]) -> f64 {
        let mut quad = 0.0;
        let mut pen = 0.0;
        for j in 0..b.len() {
            quad += 0.5 * b[j] * gb[j] - self.c[j] * b[j];
            pen += match self.kinds[j] {
                Penalty::Free => 0.0,
                Penalty::Lasso => self.l1 * b[j].abs(),
                Penalty::Ridge => 0.5 * self.l2 * b[j] * b[j],
            };
        }
        (quad + 0.5 * self.yy).max(0.0) + pen
    }

    fn gram_times(&self, b: &[f64]) -> Vec<f64> {
        let p = b.len();
        (0..p)
            .map(|i| (0..p).map(|j| self.g[(i, j)] * b[j]).sum())
            .collect()
    }

    /// Exact solve on the current support with lasso signs held fixed.
    /// Returns `None` when the system is singular or a sign flips.
    fn polish(&self, b: &[f64]) -> Option<Vec<f64>> {
        let active: Vec<usize> = (0..b.len())
            .filter(|&j| self.kinds[j] != Penalty::Lasso || b[j] != 0.0)
            .collect();
        let q = active.len();
        let mut h = DMatrix::zeros(q, q);
        let mut rhs = DVector::zeros(q);
        for (a, &i) in active.iter().enumerate() {
            for (bb, &j) in active.iter().enumerate() {
                h[(a, bb)] = self.g[(i, j)];
            }
            rhs[a] = self.c[i];
            match self.kinds[i] {
                Penalty::Ridge => h[(a, a)] += self.l2,
                Penalty::Lasso => rhs[a] -= self.l1 * b[i].signum(),
                Penalty::Free => {}
            }
        }
        let sol = h.clone().cholesky().map(|ch| ch.solve(&rhs)).or_else(|| h.lu().solve(&rhs))?;
        let mut out = vec![0.0; b.len()];
        for (a, &i) in active.iter().enumerate() {
            if !sol[a].is_finite() {
                return None;
            }
            if self.kinds[i] == Penalty::Lasso && (sol[a] == 0.0 || sol[a].signum() != b[i].signum()) {
                return None;
            }
            out[i] = sol[a];
        }
        Some(out)
    }

    fn kkt_holds(&self, b: &[f64], gb: &[f64]) -> bool {
        let scale = self.c.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        (0..b.len()).all(|j| {
            let grad = gb[j] - self.c[j];
            let slack = 1e-9 * scale;
            match self.kinds[j] {
                Penalty::Free => grad.abs() <= slack,
                Penalty::Ridge => (grad + self.l2 * b[j]).abs() <= slack,
                Penalty::Lasso if b[j] == 0.0 => grad.abs() <= self.l1 + slack,
                Penalty::Lasso => (grad + self.l1 * b[j].signum()).abs() <= slack,
            }
        })
    }

    /// Cyclic coordinate descent with periodic active-set polishing. Every
    /// accepted step lowers (or keeps) the objective.
    fn solve(&self, mut b: Vec<f64>, max_sweeps: usize) -> (Vec<f64>, Vec<f64>, usize, bool) {
        let p = b.len();
        let mut gb = self.gram_times(&b);
        let mut trace = vec![self.objective(&b, &gb)];
        let mut sweeps = 0;
        let mut converged = false;
        while sweeps < max_sweeps {
            sweeps += 1;
            for j in 0..p {
                let gjj = self.g[(j, j)];
                if gjj <= 0.0 {
                    continue;
                }
                let partial = self.c[j] - gb[j] + gjj * b[j];
                let new = match self.kinds[j] {
                    Penalty::Free => partial / gjj,
                    Penalty::Ridge => partial / (gjj + self.l2),
                    Penalty::Lasso => {
                        let shrunk = partial.abs() - self.l1;
                        if shrunk > 0.0 {
                            shrunk.copysign(partial) / gjj
                        } else {
                            0.0
                        }
                    }
                };
                let step = new - b[j];
                if step != 0.0 {
                    for i in 0..p {
                        gb[i] += self.g[(i, j)] * step;
                    }
                    b[j] = new;
                }
            }
            let obj = self.objective(&b, &gb);
            trace.push(obj);
            if sweeps % 10 == 0 || sweeps == max_sweeps {
                if let Some(pb) = self.polish(&b) {
                    let pgb = self.gram_times(&pb);
                    let pobj = self.objective(&pb, &pgb);
                    if pobj <= obj {
                        b = pb;
                        gb = pgb;
                        trace.push(pobj);
                    }
                }
                if self.kkt_holds(&b, &gb) {
                    converged = true;
                    break;
                }
            }
        }
        (b, trace, sweeps, converged)
    }
}

fn changepoint_positions(options: &FitOptions) -> Vec<f64> {
    let n = options.n_changepoints;
    let range = options.changepoint_range;
    match options.placement {
        Placement::Uniform => (1..=n).map(|j| range * j as f64 / n as f64).collect(),
        Placement::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..range).max(f64::MIN_POSITIVE)).collect();
            v.sort_by(f64::total_cmp);
            v
        }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Maximum a posteriori fit of the trend-plus-seasonality model:
///
/// `Σ w_i r_i² / (2σ²) + Σ|delta_j| / changepoint_scale + ‖fourier‖² / seasonality_scale`
///
/// on values scaled by their largest magnitude, with σ² re-estimated from
/// the residuals until it settles.
pub fn fit_model(series: &WeeklySeries, options: &FitOptions) -> Result<TrendModel> {
    let n = series.len();
    let order = options.fourier_order;
    let cps = options.n_changepoints;
    let needed = 2 * order + cps + 2;
    if n < needed {
        return Err(Error::invalid(format!(
            "series has {n} weeks; the model needs at least {needed}"
        )));
    }
    if !(options.changepoint_scale > 0.0 && options.seasonality_scale > 0.0) {
        return Err(Error::invalid("prior scales must be positive"));
    }
    if !(options.changepoint_range > 0.0 && options.changepoint_range <= 1.0) {
        return Err(Error::invalid("changepoint_range must be in (0, 1]"));
    }
    let points = series.points();
    let start = points[0].week_start;
    let span_days = (points[n - 1].week_start - start).num_days() as f64;
    if span_days <= 0.0 {
        return Err(Error::invalid("series covers a single instant"));
    }
    let y_scale = points.iter().map(|p| p.value.abs()).fold(0.0, f64::max);
    let y_scale = if y_scale > 0.0 { y_scale } else { 1.0 };
    let y: Vec<f64> = points.iter().map(|p| p.value / y_scale).collect();
    let raw_w: Vec<f64> = points
        .iter()
        .map(|p| if options.count_weighted { p.count as f64 } else { 1.0 })
        .collect();
    let w_mean = raw_w.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = raw_w.iter().map(|v| v / w_mean).collect();

    let s = changepoint_positions(options);
    let p = 2 + cps + 2 * order;
    let mut kinds = vec![Penalty::Free, Penalty::Free];
    kinds.extend(std::iter::repeat_n(Penalty::Lasso, cps));
    kinds.extend(std::iter::repeat_n(Penalty::Ridge, 2 * order));
    let ts: Vec<f64> = points
        .iter()
        .map(|pt| (pt.week_start - start).num_days() as f64 / span_days)
        .collect();
    let x = DMatrix::from_fn(n, p, |i, j| {
        if j == 0 {
            1.0
        } else if j == 1 {
            ts[i]
        } else if j < 2 + cps {
            (ts[i] - s[j - 2]).max(0.0)
        } else {
            let f = j - 2 - cps;
            let harmonic = (f / 2 + 1) as f64;
            let arg = 2.0 * PI * harmonic * days_since_epoch(points[i].week_start) / YEAR_DAYS;
            if f % 2 == 0 {
                arg.cos()
            } else {
                arg.sin()
            }
        }
    });
    let wv = DVector::from_vec(w.clone());
    let yv = DVector::from_vec(y.clone());
    let xw = DMatrix::from_fn(n, p, |i, j| x[(i, j)] * w[i]);
    let g = xw.transpose() * &x;
    let c = xw.transpose() * &yv;
    let yy: f64 = (0..n).map(|i| wv[i] * y[i] * y[i]).sum();
    let w_total: f64 = w.iter().sum();

    let y_mean = (0..n).map(|i| w[i] * y[i]).sum::<f64>() / w_total;
    let var_y = (0..n).map(|i| w[i] * (y[i] - y_mean).powi(2)).sum::<f64>() / w_total;
    // Noise is never taken below a tenth of the series' spread (in sd);
    // on clean data the profiled variance collapses and the L1 penalty with it.
    let floor = (NOISE_FLOOR * var_y).max(SIGMA2_FLOOR);
    let mut sigma2 = var_y.max(floor);
    let mut b = vec![0.0; p];
    b[0] = y_mean;
    let mut outer = 0;
    let (mut trace, mut sweeps, mut converged);
    loop {
        outer += 1;
        let problem = Problem {
            g: &g,
            c: &c,
            yy,
            kinds: &kinds,
            l1: sigma2 / options.changepoint_scale,
            l2: 2.0 * sigma2 / options.seasonality_scale,
        };
        (b, trace, sweeps, converged) = problem.solve(b, options.max_sweeps);
        let fitted = &x * DVector::from_vec(b.clone());
        let rss: f64 = (0..n).map(|i| w[i] * (y[i] - fitted[i]).powi(2)).sum();
        let next = (rss / w_total).max(floor);
        let settled = (next - sigma2).abs() <= 1e-6 * sigma2;
        sigma2 = next;
        if settled || outer >= 50 {
            break;
        }
    }

    let fitted = &x * DVector::from_vec(b.clone());
    let mut residuals: Vec<f64> = (0..n).map(|i| (y[i] - fitted[i]) * y_scale).collect();
    residuals.sort_by(f64::total_cmp);
    Ok(TrendModel {
        start,
        span_days,
        k: b[1] * y_scale,
        m: b[0] * y_scale,
        changepoints: (0..cps)
            .map(|j| Changepoint {
                date: start + chrono::Duration::days((s[j] * span_days).round() as i64),
                t: s[j],
                delta: b[2 + j] * y_scale,
            })
            .collect(),
        fourier_order: order,
        fourier: b[2 + cps..].iter().map(|v| v * y_scale).collect(),
        changepoint_scale: options.changepoint_scale,
        seasonality_scale: options.seasonality_scale,
        sigma: sigma2.sqrt() * y_scale,
        residual_quantiles: (quantile(&residuals, 0.1), quantile(&residuals, 0.9)),
        diagnostics: FitDiagnostics {
            outer_iterations: outer,
            sweeps,
            converged,
            objective_trace: trace,
        },
    })
}
