//! Fisher information of the Bradley-Terry fit and the total-variance
//! objective `tr[I(theta)^-1] = alpha^-2 tr[L(w)^+]`.
//!
//! A battle between `i` and `j` contributes `alpha^2 p_ij (1 - p_ij)` to both
//! diagonal entries and its negative to the two off-diagonal ones, so the
//! aggregate information is `alpha^2` times the graph Laplacian with edge
//! weights `w_ij = c_ij p_ij (1 - p_ij)`. The Laplacian is always singular
//! (ratings are only defined up to a shift), hence the pseudo-inverse.

mod allocation;

pub use allocation::{
    breakpoints, delta_phi_at, delta_phi_decomposition, delta_phi_report, ideal_allocation,
    phi_for_threshold, proximity_pairs, DeltaPhiEntry, DeltaPhiReport,
};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::components;
use crate::matrices::ComparisonMatrices;
use crate::rating::win_prob;
use crate::types::RatingVector;

#[derive(Debug, Clone)]
pub struct InformationSummary {
    pub fim: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    pub connected: bool,
    /// `tr[L^+]`, summed over every component when disconnected.
    pub trace_pinv: f64,
    pub null_dim: usize,
    pub alpha: f64,
}

impl InformationSummary {
    /// `tr[I^-1]`; infinite when the comparison graph is disconnected.
    pub fn trace_inverse_fim(&self) -> f64 {
        if self.connected {
            self.trace_pinv / (self.alpha * self.alpha)
        } else {
            f64::INFINITY
        }
    }
}

/// Eigen-decomposition summary of a symmetric PSD matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub cutoff: f64,
    pub null_dim: usize,
    pub trace_pinv: f64,
}

/// Eigenvalues at or below `n * eps * lambda_max` count as null space.
pub fn spectrum(m: &DMatrix<f64>) -> Spectrum {
    let n = m.nrows();
    if n == 0 {
        return Spectrum {
            eigenvalues: Vec::new(),
            cutoff: 0.0,
            null_dim: 0,
            trace_pinv: 0.0,
        };
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let lmax = eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cutoff = n as f64 * f64::EPSILON * lmax;
    let null_dim = eigenvalues.iter().filter(|&&l| l <= cutoff).count();
    let trace_pinv = eigenvalues.iter().filter(|&&l| l > cutoff).map(|l| 1.0 / l).sum();
    Spectrum {
        eigenvalues,
        cutoff,
        null_dim,
        trace_pinv,
    }
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cutoff = n as f64 * f64::EPSILON * lmax;
    let mut out = DMatrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cutoff {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / l;
        }
    }
    out
}

/// `L(w) = sum_{i<j} w_ij (e_i - e_j)(e_i - e_j)^T`.
pub fn weighted_laplacian(n: usize, weight: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let w = weight(i, j);
            if w != 0.0 {
                l[(i, i)] += w;
                l[(j, j)] += w;
                l[(i, j)] -= w;
                l[(j, i)] -= w;
            }
        }
    }
    l
}

/// Information summary for real-valued symmetric battle counts `c`.
pub fn information_from_counts(theta: &RatingVector, c: &DMatrix<f64>) -> Result<InformationSummary> {
    let n = theta.len();
    if c.nrows() != n || c.ncols() != n {
        return Err(Error::RosterMismatch);
    }
    let alpha = theta.alpha();
    let u = theta.scores();
    let f = |i: usize, j: usize| {
        let p = win_prob(u[i], u[j], alpha);
        p * (1.0 - p)
    };

    let mut fim = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                fim[(i, i)] = (0..n)
                    .filter(|&m| m != i)
                    .map(|m| c[(i, m)] * alpha * alpha * f(i, m))
                    .sum();
            } else if c[(i, j)] > 0.0 {
                fim[(i, j)] = -c[(i, j)] * alpha * alpha * f(i, j);
            }
        }
    }
    let laplacian = weighted_laplacian(n, |i, j| c[(i, j)] * f(i, j));
    let comps = components(n, |i, j| c[(i, j)] > 0.0);
    let spec = spectrum(&laplacian);
    Ok(InformationSummary {
        fim,
        laplacian,
        connected: comps.len() == 1,
        trace_pinv: spec.trace_pinv,
        null_dim: spec.null_dim,
        alpha,
    })
}

/// Fisher information of `theta` under the battle counts in `matrices`.
pub fn fisher_matrix(theta: &RatingVector, matrices: &ComparisonMatrices) -> Result<InformationSummary> {
    if !theta.same_roster(matrices.roster()) {
        return Err(Error::RosterMismatch);
    }
    let n = matrices.len();
    let c = DMatrix::from_fn(n, n, |i, j| matrices.count(i, j) as f64);
    information_from_counts(theta, &c)
}

/// Compares [`fisher_matrix`] against a central finite-difference Hessian of
/// the negative expected log-likelihood, in which each observed outcome is
/// replaced by its expectation `p_ij` at `theta`. The difference quotient is
/// taken on the analytic gradient of that expected likelihood with `step` in
/// Elo units. Returns `max |H_fd - I| / max |I|` (0 when there are no battles).
pub fn fim_vs_hessian_check(theta: &RatingVector, matrices: &ComparisonMatrices, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidConfig("step must be positive".into()));
    }
    let info = fisher_matrix(theta, matrices)?;
    let n = theta.len();
    let alpha = theta.alpha();
    let u0 = theta.scores();
    let expected: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            win_prob(u0[i], u0[j], alpha)
        })
        .collect();

    // gradient of -E[l] at u
    let neg_grad = |u: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; n];
        for i in 0..n {
            for j in i + 1..n {
                let c = matrices.count(i, j) as f64;
                if c == 0.0 {
                    continue;
                }
                let r = alpha * c * (expected[i * n + j] - win_prob(u[i], u[j], alpha));
                g[i] -= r;
                g[j] += r;
            }
        }
        g
    };

    let mut worst = 0.0f64;
    let scale = info.fim.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    for k in 0..n {
        let mut up = u0.to_vec();
        let mut dn = u0.to_vec();
        up[k] += step;
        dn[k] -= step;
        let gu = neg_grad(&up);
        let gd = neg_grad(&dn);
        for i in 0..n {
            let h = (gu[i] - gd[i]) / (2.0 * step);
            worst = worst.max((h - info.fim[(i, k)]).abs());
        }
    }
    Ok(worst / scale)
}
