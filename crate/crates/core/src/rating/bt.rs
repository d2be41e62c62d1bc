//! Bradley-Terry maximum likelihood by damped Newton iterations.
//!
//! The objective is the binary log-likelihood
//! `l(x) = sum_{i != j} W_ij ln sigma(x_i - x_j)` in natural units `x = alpha u`.
//! Its Hessian is minus the weighted Laplacian with weights
//! `N_ij p_ij (1 - p_ij)`, which is singular along the all-ones direction, so
//! each Newton system is solved against `L + 11^T / n` and the iterate is
//! re-centred after every step.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{log_sigmoid, sigmoid};
use crate::error::{Error, Result};
use crate::graph::{require_connected, win_graph_violators};
use crate::matrices::ComparisonMatrices;
use crate::types::{RatingVector, DEFAULT_GAUGE_ANCHOR, ELO_ALPHA};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub max_iterations: usize,
    /// Convergence threshold on the gradient max-norm in natural units.
    pub tolerance: f64,
    /// Virtual wins and losses added to every pair that has met.
    pub regularization: f64,
    pub gauge_anchor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: ELO_ALPHA,
            max_iterations: 200,
            tolerance: 1e-8,
            regularization: 0.0,
            gauge_anchor: DEFAULT_GAUGE_ANCHOR,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be positive".into()));
        }
        if !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "tolerance must be positive and max_iterations at least 1".into(),
            ));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::InvalidConfig("regularization must be >= 0".into()));
        }
        Ok(())
    }
}

/// Effective (possibly smoothed) win counts as a dense row-major matrix.
struct Wins {
    n: usize,
    w: Vec<f64>,
}

impl Wins {
    fn new(m: &ComparisonMatrices, pseudo: f64) -> Self {
        let n = m.len();
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j && m.count(i, j) > 0 {
                    w[i * n + j] = m.wins(i, j) as f64 + pseudo;
                }
            }
        }
        Self { n, w }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    fn loglik(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let w = self.at(i, j);
                if w > 0.0 {
                    total += w * log_sigmoid(x[i] - x[j]);
                }
            }
        }
        total
    }

    /// Gradient and Laplacian of the negative Hessian, both in natural units.
    fn derivatives(&self, x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let mut g = DVector::zeros(n);
        let mut lap = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let wij = self.at(i, j);
                let wji = self.at(j, i);
                let c = wij + wji;
                if c == 0.0 {
                    continue;
                }
                let p = sigmoid(x[i] - x[j]);
                let r = wij - c * p;
                g[i] += r;
                g[j] -= r;
                let h = c * p * (1.0 - p);
                lap[(i, j)] -= h;
                lap[(j, i)] -= h;
                lap[(i, i)] += h;
                lap[(j, j)] += h;
            }
        }
        (g, lap)
    }
}

/// Log-likelihood of Elo-scale `ratings` under the observed counts.
pub fn log_likelihood(ratings: &[f64], alpha: f64, m: &ComparisonMatrices) -> f64 {
    let x: Vec<f64> = ratings.iter().map(|u| alpha * u).collect();
    Wins::new(m, 0.0).loglik(&x)
}

/// Gradient of [`log_likelihood`] with respect to the Elo-scale ratings.
pub fn log_likelihood_gradient(ratings: &[f64], alpha: f64, m: &ComparisonMatrices) -> Vec<f64> {
    let x: Vec<f64> = ratings.iter().map(|u| alpha * u).collect();
    let (g, _) = Wins::new(m, 0.0).derivatives(&x);
    g.iter().map(|v| alpha * v).collect()
}

fn centre(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

/// Fits Arena Scores: the maximizer of the Bradley-Terry log-likelihood,
/// shifted so the mean rating equals `cfg.gauge_anchor`.
pub fn fit_bt_mle(m: &ComparisonMatrices, cfg: &SolverConfig) -> Result<RatingVector> {
    cfg.validate()?;
    let n = m.len();
    if n < 2 {
        return Err(Error::RosterTooSmall { needed: 2, got: n });
    }
    if m.total_battles() == 0 {
        return Err(Error::NoBattles);
    }
    require_connected(m)?;
    if cfg.regularization == 0.0 {
        let violators = separated_models(m);
        if !violators.is_empty() {
            return Err(Error::NoFiniteMaximizer {
                models: violators.iter().map(|&i| m.roster()[i].id.clone()).collect(),
            });
        }
    }

    let wins = Wins::new(m, cfg.regularization);
    let ones = DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut x = vec![0.0; n];
    let mut value = wins.loglik(&x);
    let mut grad_norm = f64::INFINITY;

    for _ in 0..cfg.max_iterations {
        let (g, lap) = wins.derivatives(&x);
        grad_norm = max_abs(&g);
        if grad_norm <= cfg.tolerance {
            return finish(m, cfg, &x);
        }
        let direction = match (lap.clone() + &ones).cholesky() {
            Some(ch) => {
                let d = ch.solve(&g);
                if d.iter().all(|v| v.is_finite()) {
                    d
                } else {
                    ascent_direction(&g, &lap)
                }
            }
            None => ascent_direction(&g, &lap),
        };

        let slope = g.dot(&direction);
        // Below this predicted gain the likelihood cannot resolve the step.
        let resolvable = slope > 1e-11 * value.abs().max(1.0);
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> =
                x.iter().zip(direction.iter()).map(|(a, d)| a + step * d).collect();
            centre(&mut trial);
            let v = wins.loglik(&trial);
            if !resolvable || v >= value + 1e-4 * step * slope {
                x = trial;
                value = v;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (g, _) = wins.derivatives(&x);
    grad_norm = grad_norm.min(max_abs(&g));
    if grad_norm <= cfg.tolerance {
        return finish(m, cfg, &x);
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        gradient: grad_norm,
    })
}

/// Scaled gradient step used when the Newton system is numerically singular.
fn ascent_direction(g: &DVector<f64>, lap: &DMatrix<f64>) -> DVector<f64> {
    let scale = (0..g.len()).map(|i| lap[(i, i)]).fold(0.0, f64::max).max(1e-12);
    g / scale
}

fn finish(m: &ComparisonMatrices, cfg: &SolverConfig, x: &[f64]) -> Result<RatingVector> {
    let scores = x.iter().map(|v| v / cfg.alpha).collect();
    RatingVector::anchored(m.roster().to_vec(), scores, cfg.alpha, cfg.gauge_anchor)
}

/// Models responsible for the absence of a finite maximizer. Models with only
/// wins or only losses are reported when present; otherwise every model that is
/// not mutually reachable with the first one in the win graph.
fn separated_models(m: &ComparisonMatrices) -> Vec<usize> {
    let n = m.len();
    let violators = win_graph_violators(|i, j| m.wins(i, j) > 0, n);
    if violators.is_empty() {
        return violators;
    }
    let one_sided: Vec<usize> = (0..n)
        .filter(|&i| {
            let won = (0..n).any(|j| m.wins(i, j) > 0);
            let lost = (0..n).any(|j| m.wins(j, i) > 0);
            won != lost
        })
        .collect();
    if one_sided.is_empty() {
        violators
    } else {
        one_sided
    }
}
