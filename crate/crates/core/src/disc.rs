//! Disc decomposition: each model gets a point `(u_i, v_i)` in the plane and
//! `P(i beats j) = sigma(u_i v_j - v_i u_j)`. Transitive games put every point
//! near a common horizontal line; cyclic games spread them around the origin.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::require_connected;
use crate::matrices::ComparisonMatrices;
use crate::rating::{log_sigmoid, sigmoid};
use crate::rng::seeded;
use crate::types::ModelRef;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Weight of `0.5 * sum(u^2 + v^2)`, which pins the shear gauge.
    pub l2: f64,
    /// Loss is compared every this many iterations.
    pub checkpoint_every: usize,
}

impl Default for DiscConfig {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            learning_rate: 0.5,
            seed: 0,
            l2: 1e-6,
            checkpoint_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscScores {
    pub roster: Vec<ModelRef>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub final_loss: f64,
    pub iterations: usize,
    /// Loss at each checkpoint, non-increasing.
    pub checkpoints: Vec<f64>,
}

impl DiscScores {
    pub fn win_prob(&self, i: usize, j: usize) -> f64 {
        sigmoid(self.u[i] * self.v[j] - self.v[i] * self.u[j])
    }

    /// Every point rotated by `angle` radians about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let mut out = self.clone();
        for k in 0..self.u.len() {
            out.u[k] = c * self.u[k] - s * self.v[k];
            out.v[k] = s * self.u[k] + c * self.v[k];
        }
        out
    }

    /// Rotated so the mean point lies on `+v` and scaled to unit mean radius.
    /// Scaling changes predictions; the result is for display only.
    pub fn normalized(&self) -> Self {
        let n = self.u.len().max(1) as f64;
        let mu = self.u.iter().sum::<f64>() / n;
        let mv = self.v.iter().sum::<f64>() / n;
        let mut out = if mu == 0.0 && mv == 0.0 {
            self.clone()
        } else {
            // angle taking (mu, mv) onto (0, +r)
            self.rotated(std::f64::consts::FRAC_PI_2 - mv.atan2(mu))
        };
        let radius = out.u.iter().zip(&out.v).map(|(a, b)| a.hypot(*b)).sum::<f64>() / n;
        if radius > 0.0 {
            out.u.iter_mut().for_each(|x| *x /= radius);
            out.v.iter_mut().for_each(|x| *x /= radius);
        }
        out
    }
}

/// Mean binary cross-entropy per battle plus the L2 term.
pub fn disc_loss(u: &[f64], v: &[f64], m: &ComparisonMatrices, l2: f64) -> f64 {
    let n = m.len();
    let total = m.total_battles().max(1) as f64;
    let mut loss = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if m.count(i, j) == 0 {
                continue;
            }
            let x = u[i] * v[j] - v[i] * u[j];
            loss -= m.wins(i, j) as f64 * log_sigmoid(x) + m.wins(j, i) as f64 * log_sigmoid(-x);
        }
    }
    let reg: f64 = u.iter().chain(v).map(|a| a * a).sum();
    loss / total + 0.5 * l2 * reg
}

/// Gradient of [`disc_loss`] as `(d/du, d/dv)`.
pub fn disc_gradient(u: &[f64], v: &[f64], m: &ComparisonMatrices, l2: f64) -> (Vec<f64>, Vec<f64>) {
    let n = m.len();
    let total = m.total_battles().max(1) as f64;
    let mut gu: Vec<f64> = u.iter().map(|a| l2 * a).collect();
    let mut gv: Vec<f64> = v.iter().map(|a| l2 * a).collect();
    for i in 0..n {
        for j in i + 1..n {
            let c = m.count(i, j);
            if c == 0 {
                continue;
            }
            let x = u[i] * v[j] - v[i] * u[j];
            let r = (c as f64 * sigmoid(x) - m.wins(i, j) as f64) / total;
            gu[i] += r * v[j];
            gv[j] += r * u[i];
            gv[i] -= r * u[j];
            gu[j] -= r * v[i];
        }
    }
    (gu, gv)
}

/// Gradient descent from a seeded random start. The step is halved (and the
/// last checkpoint restored) whenever the loss at a checkpoint goes up.
pub fn fit_disc(m: &ComparisonMatrices, cfg: &DiscConfig) -> Result<DiscScores> {
    if cfg.iterations == 0 || cfg.checkpoint_every == 0 || !(cfg.learning_rate > 0.0) || !(cfg.l2 >= 0.0) {
        return Err(Error::InvalidConfig(
            "disc fit needs positive iterations, checkpoint interval and learning rate".into(),
        ));
    }
    let n = m.len();
    if n < 3 {
        return Err(Error::RosterTooSmall { needed: 3, got: n });
    }
    if m.total_battles() == 0 {
        return Err(Error::NoBattles);
    }
    require_connected(m)?;

    let mut rng = seeded(cfg.seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
    let mut lr = cfg.learning_rate;
    let mut saved = (u.clone(), v.clone());
    let mut best = disc_loss(&u, &v, m, cfg.l2);
    let mut checkpoints = vec![best];

    for it in 1..=cfg.iterations {
        let (gu, gv) = disc_gradient(&u, &v, m, cfg.l2);
        for k in 0..n {
            u[k] -= lr * gu[k];
            v[k] -= lr * gv[k];
        }
        if it % cfg.checkpoint_every == 0 || it == cfg.iterations {
            let loss = disc_loss(&u, &v, m, cfg.l2);
            if loss.is_finite() && loss <= best {
                best = loss;
                saved = (u.clone(), v.clone());
            } else {
                lr *= 0.5;
                u.clone_from(&saved.0);
                v.clone_from(&saved.1);
            }
            checkpoints.push(best);
        }
    }
    Ok(DiscScores {
        roster: m.roster().to_vec(),
        u: saved.0,
        v: saved.1,
        final_loss: best,
        iterations: cfg.iterations,
        checkpoints,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitivityReport {
    pub mean_v: f64,
    pub std_v: f64,
    /// `std(v) / |mean(v)|` after normalization; infinite when `mean(v) = 0`.
    pub dispersion: f64,
    /// Dispersion below 0.5: the game is dominated by one rating axis.
    pub dominant_axis: bool,
}

pub fn transitivity_report(scores: &DiscScores) -> TransitivityReport {
    let s = scores.normalized();
    let n = s.v.len().max(1) as f64;
    let mean_v = s.v.iter().sum::<f64>() / n;
    let std_v = (s.v.iter().map(|x| (x - mean_v).powi(2)).sum::<f64>() / n).sqrt();
    let dispersion = if std_v == 0.0 {
        0.0
    } else if mean_v == 0.0 {
        f64::INFINITY
    } else {
        std_v / mean_v.abs()
    };
    TransitivityReport {
        mean_v,
        std_v,
        dispersion,
        dominant_axis: dispersion < 0.5,
    }
}
