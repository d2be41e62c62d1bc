//! Ideal proximity allocation `c_ij(h)` and the first-order benefit/cost
//! split of `phi(h) = tr[L(w(h))^+]` at the breakpoints where new pairs enter
//! the proximity set.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{pseudo_inverse, spectrum, weighted_laplacian};
use crate::error::{Error, Result};
use crate::graph::components;
use crate::rating::win_prob;
use crate::types::RatingVector;

/// Pairs `(i, j)`, `i < j`, with `|u_i - u_j| < h`.
pub fn proximity_pairs(theta: &RatingVector, h: f64) -> Vec<(usize, usize)> {
    let u = theta.scores();
    let mut out = Vec::new();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            if (u[i] - u[j]).abs() < h {
                out.push((i, j));
            }
        }
    }
    out
}

/// `C / |S(h)|` battles on every pair of `S(h)`, zero elsewhere.
pub fn ideal_allocation(theta: &RatingVector, h: f64, budget: f64) -> Result<DMatrix<f64>> {
    if !(h > 0.0) || !(budget > 0.0) {
        return Err(Error::InvalidConfig("h and budget must be positive".into()));
    }
    let pairs = proximity_pairs(theta, h);
    if pairs.is_empty() {
        return Err(Error::EmptyProximitySet { h });
    }
    let n = theta.len();
    let each = budget / pairs.len() as f64;
    let mut c = DMatrix::zeros(n, n);
    for (i, j) in pairs {
        c[(i, j)] = each;
        c[(j, i)] = each;
    }
    Ok(c)
}

fn variance_term(theta: &RatingVector, i: usize, j: usize) -> f64 {
    let u = theta.scores();
    let p = win_prob(u[i], u[j], theta.alpha());
    p * (1.0 - p)
}

fn pair_laplacian(theta: &RatingVector, budget: f64, pairs: &[(usize, usize)]) -> Option<DMatrix<f64>> {
    let n = theta.len();
    if pairs.is_empty() {
        return None;
    }
    let mut adj = vec![false; n * n];
    for &(i, j) in pairs {
        adj[i * n + j] = true;
        adj[j * n + i] = true;
    }
    if components(n, |i, j| adj[i * n + j]).len() != 1 {
        return None;
    }
    let each = budget / pairs.len() as f64;
    Some(weighted_laplacian(n, |i, j| {
        if adj[i * n + j] {
            each * variance_term(theta, i, j)
        } else {
            0.0
        }
    }))
}

fn phi_of_pairs(theta: &RatingVector, budget: f64, pairs: &[(usize, usize)]) -> f64 {
    pair_laplacian(theta, budget, pairs).map_or(f64::INFINITY, |l| spectrum(&l).trace_pinv)
}

/// `tr[L^+]` under the ideal allocation at threshold `h`; infinite when
/// `S(h)` is empty or leaves the graph disconnected.
pub fn phi_for_threshold(theta: &RatingVector, budget: f64, h: f64) -> f64 {
    phi_of_pairs(theta, budget, &proximity_pairs(theta, h))
}

/// `d tr[L^+] / d w_ij = -||L^+ (e_i - e_j)||^2`.
pub fn phi_gradient(pinv: &DMatrix<f64>, i: usize, j: usize) -> f64 {
    let d = pinv.column(i) - pinv.column(j);
    -d.norm_squared()
}

struct Gaps {
    values: Vec<f64>,
    /// `(i, j, group)` in increasing gap order.
    pairs: Vec<(usize, usize, usize)>,
}

fn gap_groups(theta: &RatingVector) -> Gaps {
    let u = theta.scores();
    let n = u.len();
    let mut all: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            all.push(((u[i] - u[j]).abs(), i, j));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let span = all.last().map_or(0.0, |g| g.0);
    let tol = 1e-9 * span.max(1.0);
    let mut values: Vec<f64> = Vec::new();
    let mut pairs = Vec::with_capacity(all.len());
    for (g, i, j) in all {
        match values.last() {
            Some(&last) if g - last <= tol => {}
            _ => values.push(g),
        }
        pairs.push((i, j, values.len() - 1));
    }
    Gaps { values, pairs }
}

/// Distinct pairwise rating gaps in increasing order. Equal gaps share one
/// breakpoint.
pub fn breakpoints(theta: &RatingVector) -> Vec<f64> {
    gap_groups(theta).values
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPhiEntry {
    /// Breakpoint index, `None` when `h` is not a breakpoint.
    pub index: Option<usize>,
    pub h: f64,
    pub pairs_added: usize,
    pub n_minus: usize,
    pub n_plus: usize,
    pub benefit: f64,
    pub cost: f64,
    pub approx_delta_phi: f64,
    pub actual_delta_phi: f64,
    pub phi_below: f64,
    pub phi_above: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaPhiReport {
    pub budget: f64,
    pub breakpoints: Vec<f64>,
    /// One entry per breakpoint whose lower proximity graph is connected.
    pub entries: Vec<DeltaPhiEntry>,
    /// `(index, phi_above)` for breakpoints with a disconnected lower graph.
    pub disconnected: Vec<(usize, f64)>,
}

fn decompose(theta: &RatingVector, budget: f64, gaps: &Gaps, t: usize) -> Result<DeltaPhiEntry> {
    if t >= gaps.values.len() {
        return Err(Error::BreakpointOutOfRange {
            index: t,
            count: gaps.values.len(),
        });
    }
    let h = gaps.values[t];
    let old: Vec<(usize, usize)> = gaps.pairs.iter().filter(|p| p.2 < t).map(|p| (p.0, p.1)).collect();
    let new: Vec<(usize, usize)> = gaps.pairs.iter().filter(|p| p.2 == t).map(|p| (p.0, p.1)).collect();
    let plus: Vec<(usize, usize)> = old.iter().chain(new.iter()).copied().collect();
    let phi_above = phi_of_pairs(theta, budget, &plus);

    let Some(lap_below) = pair_laplacian(theta, budget, &old) else {
        return Err(Error::DisconnectedBelowBreakpoint { h, phi_above });
    };
    let phi_below = spectrum(&lap_below).trace_pinv;
    let pinv = pseudo_inverse(&lap_below);
    let (n_minus, n_plus, m) = (old.len() as f64, plus.len() as f64, new.len() as f64);

    let benefit: f64 = new
        .iter()
        .map(|&(i, j)| phi_gradient(&pinv, i, j).abs() * budget * variance_term(theta, i, j) / n_plus)
        .sum();
    let cost: f64 = old
        .iter()
        .map(|&(i, j)| {
            phi_gradient(&pinv, i, j).abs() * budget * variance_term(theta, i, j) * m / (n_minus * n_plus)
        })
        .sum();

    Ok(DeltaPhiEntry {
        index: Some(t),
        h,
        pairs_added: new.len(),
        n_minus: old.len(),
        n_plus: plus.len(),
        benefit,
        cost,
        approx_delta_phi: -benefit + cost,
        actual_delta_phi: phi_above - phi_below,
        phi_below,
        phi_above,
    })
}

/// Benefit/cost split when the threshold crosses breakpoint `t`, with
/// `L^+` taken just below it.
pub fn delta_phi_decomposition(theta: &RatingVector, budget: f64, t: usize) -> Result<DeltaPhiEntry> {
    if !(budget > 0.0) {
        return Err(Error::InvalidConfig("budget must be positive".into()));
    }
    decompose(theta, budget, &gap_groups(theta), t)
}

/// Like [`delta_phi_decomposition`] but addressed by threshold. Between
/// breakpoints nothing changes and the entry is all zeros.
pub fn delta_phi_at(theta: &RatingVector, budget: f64, h: f64) -> Result<DeltaPhiEntry> {
    if !(budget > 0.0) {
        return Err(Error::InvalidConfig("budget must be positive".into()));
    }
    let gaps = gap_groups(theta);
    let span = gaps.values.last().copied().unwrap_or(0.0);
    let tol = 1e-9 * span.max(1.0);
    if let Some(t) = gaps.values.iter().position(|&b| (b - h).abs() <= tol) {
        return decompose(theta, budget, &gaps, t);
    }
    let phi = phi_for_threshold(theta, budget, h);
    let count = proximity_pairs(theta, h).len();
    Ok(DeltaPhiEntry {
        index: None,
        h,
        pairs_added: 0,
        n_minus: count,
        n_plus: count,
        benefit: 0.0,
        cost: 0.0,
        approx_delta_phi: 0.0,
        actual_delta_phi: 0.0,
        phi_below: phi,
        phi_above: phi,
    })
}

/// Decomposition at every breakpoint.
pub fn delta_phi_report(theta: &RatingVector, budget: f64) -> Result<DeltaPhiReport> {
    if !(budget > 0.0) {
        return Err(Error::InvalidConfig("budget must be positive".into()));
    }
    let gaps = gap_groups(theta);
    let results: Vec<Result<DeltaPhiEntry>> = (0..gaps.values.len())
        .into_par_iter()
        .map(|t| decompose(theta, budget, &gaps, t))
        .collect();
    let mut entries = Vec::new();
    let mut disconnected = Vec::new();
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => entries.push(e),
            Err(Error::DisconnectedBelowBreakpoint { phi_above, .. }) => disconnected.push((t, phi_above)),
            Err(e) => return Err(e),
        }
    }
    Ok(DeltaPhiReport {
        budget,
        breakpoints: gaps.values,
        entries,
        disconnected,
    })
}
