use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{Classifier, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Logistic,
    LinearSvc,
}

/// `score(x) = weights · x + intercept`; the positive class is predicted
/// when the score is ≥ 0 (probability ≥ 0.5 for logistic models).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LinearModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.intercept
    }

    /// Grant probability; only meaningful for logistic models.
    pub fn probability(&self, row: &[f64]) -> f64 {
        sigmoid(self.score(row))
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        self.feature_names = names;
        self
    }
}

impl Classifier for LinearModel {
    fn predict_row(&self, row: &[f64]) -> bool {
        self.score(row) >= 0.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn check_labels(x: &Matrix, y: &[bool]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::invalid(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    x.ensure_finite()?;
    let pos = y.iter().filter(|&&v| v).count();
    let neg = y.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("training labels contain a single class"));
    }
    if pos < 2 || neg < 2 {
        return Err(Error::invalid("need at least two rows of each class"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    /// Iteration budget.
    pub max_iter: usize,
    /// Stop once the gradient's Euclidean norm falls below this.
    pub tol: f64,
    /// Optional ridge penalty `l2 / 2 · ‖w‖²`; the intercept is never
    /// penalized.
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            tol: 1e-6,
            l2: 0.0,
        }
    }
}

/// Mean log-loss plus the optional ridge term.
pub fn logistic_loss(weights: &[f64], intercept: f64, x: &Matrix, y: &[bool], l2: f64) -> f64 {
    let n = x.rows() as f64;
    let data: f64 = (0..x.rows())
        .map(|i| {
            let z = dot(weights, x.row(i)) + intercept;
            softplus(z) - if y[i] { z } else { 0.0 }
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * dot(weights, weights)
}

/// Gradient of [`logistic_loss`] with respect to (weights, intercept).
pub fn logistic_gradient(
    weights: &[f64],
    intercept: f64,
    x: &Matrix,
    y: &[bool],
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = x.rows() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for i in 0..x.rows() {
        let row = x.row(i);
        let r = sigmoid(dot(weights, row) + intercept) - if y[i] { 1.0 } else { 0.0 };
        for (g, v) in gw.iter_mut().zip(row) {
            *g += r * v;
        }
        gb += r;
    }
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (gw, gb / n)
}

/// Logistic regression by gradient descent.
///
/// Steps follow the Barzilai–Borwein rule, accepted under an Armijo
/// sufficient-decrease test with halving. Iteration stops when the
/// gradient norm drops below `params.tol` or the budget runs out.
pub fn fit_logistic(x: &Matrix, y: &[bool], params: LogisticParams) -> Result<LinearModel> {
    check_labels(x, y)?;
    let d = x.cols();
    let rate = y.iter().filter(|&&v| v).count() as f64 / y.len() as f64;
    let mut theta = vec![0.0; d + 1];
    theta[d] = (rate / (1.0 - rate)).ln();

    let eval = |t: &[f64]| logistic_loss(&t[..d], t[d], x, y, params.l2);
    let grad = |t: &[f64]| {
        let (mut g, gb) = logistic_gradient(&t[..d], t[d], x, y, params.l2);
        g.push(gb);
        g
    };

    let mut loss = eval(&theta);
    let mut g = grad(&theta);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iter {
        let gnorm2 = dot(&g, &g);
        if gnorm2.sqrt() < params.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
            let cand_loss = eval(&cand);
            if cand_loss <= loss - 1e-4 * step * gnorm2 {
                accepted = Some((cand, cand_loss));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_loss)) = accepted else {
            // no decrease representable in floating point
            converged = gnorm2.sqrt() < params.tol.sqrt();
            break;
        };
        let next_g = grad(&next);
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let yk: Vec<f64> = next_g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yk);
        step = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(1e-10, 1e10)
        } else {
            step * 2.0
        };
        theta = next;
        loss = next_loss;
        g = next_g;
    }
    if !converged && dot(&g, &g).sqrt() < params.tol {
        converged = true;
    }
    let intercept = theta.pop().unwrap_or_default();
    if !intercept.is_finite() || theta.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("logistic regression diverged"));
    }
    Ok(LinearModel {
        kind: LinearKind::Logistic,
        feature_names: Vec::new(),
        weights: theta,
        intercept,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvcParams {
    /// Hinge-loss weight `C` in `½‖w‖² + C Σ max(0, 1 − yᵢ f(xᵢ))`.
    pub c: f64,
    pub max_epochs: usize,
    /// Stop when the spread of projected dual gradients in an epoch falls
    /// below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvcParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_epochs: 1000,
            tol: 1e-3,
            seed: 0,
        }
    }
}

/// Linear support-vector classifier (L2-regularized hinge loss) by dual
/// coordinate descent. The intercept is learned as the weight of a
/// constant feature and is regularized with the other weights.
pub fn fit_linear_svc(x: &Matrix, y: &[bool], params: SvcParams) -> Result<LinearModel> {
    check_labels(x, y)?;
    if params.c <= 0.0 {
        return Err(Error::invalid("SVC regularization weight must be positive"));
    }
    let n = x.rows();
    let d = x.cols();
    let sign = |i: usize| if y[i] { 1.0 } else { -1.0 };
    // augmented weight vector: last slot is the intercept
    let mut w = vec![0.0; d + 1];
    let mut alpha = vec![0.0; n];
    let q_diag: Vec<f64> = (0..n).map(|i| dot(x.row(i), x.row(i)) + 1.0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut epochs = 0;
    let mut converged = false;
    while epochs < params.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let yi = sign(i);
            let row = x.row(i);
            let g = yi * (dot(&w[..d], row) + w[d]) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == params.c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, params.c);
                let delta = (alpha[i] - old) * yi;
                for (wj, v) in w[..d].iter_mut().zip(row) {
                    *wj += delta * v;
                }
                w[d] += delta;
            }
        }
        if pg_max - pg_min < params.tol {
            converged = true;
            break;
        }
    }
    let intercept = w.pop().unwrap_or_default();
    Ok(LinearModel {
        kind: LinearKind::LinearSvc,
        feature_names: Vec::new(),
        weights: w,
        intercept,
        iterations: epochs,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn blobs(seed: u64, n: usize) -> (Matrix, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 0;
            let c = if pos { 2.0 } else { -2.0 };
            rows.push(vec![c + rng.gen_range(-1.0..1.0), c + rng.gen_range(-1.0..1.0)]);
            y.push(pos);
        }
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    fn accuracy(m: &LinearModel, x: &Matrix, y: &[bool]) -> f64 {
        let p = m.predict(x);
        p.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
    }

    #[test]
    fn logistic_separates_blobs() {
        let (x, y) = blobs(1, 200);
        let m = fit_logistic(&x, &y, LogisticParams::default()).unwrap();
        assert_eq!(accuracy(&m, &x, &y), 1.0);
        assert!(m.weights.iter().all(|w| w.is_finite() && *w > 0.0));
    }

    #[test]
    fn svc_separates_blobs_and_agrees_with_logistic() {
        let (x, y) = blobs(2, 200);
        let svc = fit_linear_svc(&x, &y, SvcParams::default()).unwrap();
        assert_eq!(accuracy(&svc, &x, &y), 1.0);
        let logit = fit_logistic(&x, &y, LogisticParams::default()).unwrap();
        for (a, b) in svc.weights.iter().zip(&logit.weights) {
            assert_eq!(a.signum(), b.signum());
        }
    }

    #[test]
    fn svc_on_identical_rows_predicts_majority() {
        let rows = vec![vec![0.7, 0.2]; 30];
        let y: Vec<bool> = (0..30).map(|i| i < 10).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let svc = fit_linear_svc(&x, &y, SvcParams::default()).unwrap();
        assert!(svc.predict(&x).iter().all(|&p| !p));
        let y_flip: Vec<bool> = y.iter().map(|v| !v).collect();
        let svc = fit_linear_svc(&x, &y_flip, SvcParams::default()).unwrap();
        assert!(svc.predict(&x).iter().all(|&p| p));
    }

    #[test]
    fn single_class_is_an_error() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(fit_logistic(&x, &[true, true, true], LogisticParams::default()).is_err());
        assert!(fit_linear_svc(&x, &[false, false, false], SvcParams::default()).is_err());
        assert!(fit_logistic(&x, &[true, false, false], LogisticParams::default()).is_err());
    }

    #[test]
    fn logistic_gradient_vanishes_at_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..500).map(|_| vec![rng.gen_range(-2.0..2.0)]).collect();
        let y: Vec<bool> = rows
            .iter()
            .map(|r| rng.gen::<f64>() < sigmoid(1.5 * r[0] - 0.3))
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let m = fit_logistic(&x, &y, LogisticParams::default()).unwrap();
        assert!(m.converged);
        let (gw, gb) = logistic_gradient(&m.weights, m.intercept, &x, &y, 0.0);
        let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
        assert!(norm < 1e-6, "{norm}");
        assert!(m.weights[0] > 0.0);
    }
}
