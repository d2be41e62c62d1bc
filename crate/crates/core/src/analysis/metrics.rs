use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::RatingVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankMetrics {
    pub spearman_rho: f64,
    pub kendall_tau: f64,
    pub avg_rank_diff: f64,
    /// After subtracting each vector's mean.
    pub rmse: f64,
}

impl RankMetrics {
    pub fn mse(&self) -> f64 {
        self.rmse * self.rmse
    }
}

/// 1-based ranks by descending value; tied values share their average rank.
pub fn descending_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let avg = (start + 1 + end) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman's rho with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&descending_ranks(x), &descending_ranks(y))
}

fn tied_pairs(sorted: &[f64]) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for k in 1..=sorted.len() {
        if k < sorted.len() && sorted[k] == sorted[k - 1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total
}

// Bottom-up merge sort counting inversions.
fn count_swaps(v: &mut [f64]) -> u64 {
    let n = v.len();
    let mut buf = v.to_vec();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if v[j] < v[i] {
                    buf[k] = v[j];
                    swaps += (mid - i) as u64;
                    j += 1;
                } else {
                    buf[k] = v[i];
                    i += 1;
                }
                k += 1;
            }
            buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
            k += mid - i;
            buf[k..k + hi - j].copy_from_slice(&v[j..hi]);
            lo = hi;
        }
        v.copy_from_slice(&buf);
        width *= 2;
    }
    swaps
}

/// Kendall's tau-b in `O(n log n)` (Knight's algorithm).
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 || y.len() != n {
        return 0.0;
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n0 = (n * (n - 1) / 2) as u64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let n1 = tied_pairs(&xs);
    let mut n3 = 0u64;
    let mut run = 1u64;
    for k in 1..=n {
        if k < n && pairs[k] == pairs[k - 1] {
            run += 1;
        } else {
            n3 += run * (run - 1) / 2;
            run = 1;
        }
    }
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let swaps = count_swaps(&mut ys);
    let n2 = tied_pairs(&ys);

    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if denom == 0.0 {
        return 0.0;
    }
    let num = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    (num / denom).clamp(-1.0, 1.0)
}

/// Agreement between an estimate and the reference ratings.
pub fn rank_metrics(estimated: &RatingVector, golden: &RatingVector) -> Result<RankMetrics> {
    if !estimated.same_roster(golden.roster()) {
        return Err(Error::RosterMismatch);
    }
    Ok(score_metrics(estimated.scores(), golden.scores()))
}

/// [`rank_metrics`] on raw score slices of equal length.
pub fn score_metrics(est: &[f64], gold: &[f64]) -> RankMetrics {
    let n = est.len();
    if n == 0 {
        return RankMetrics {
            spearman_rho: 0.0,
            kendall_tau: 0.0,
            avg_rank_diff: 0.0,
            rmse: 0.0,
        };
    }
    let re = descending_ranks(est);
    let rg = descending_ranks(gold);
    let me = est.iter().sum::<f64>() / n as f64;
    let mg = gold.iter().sum::<f64>() / n as f64;
    let mse = est
        .iter()
        .zip(gold)
        .map(|(a, b)| ((a - me) - (b - mg)).powi(2))
        .sum::<f64>()
        / n as f64;
    RankMetrics {
        spearman_rho: pearson(&re, &rg),
        kendall_tau: kendall_tau_b(est, gold),
        avg_rank_diff: re.iter().zip(&rg).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64,
        rmse: mse.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::types::{numbered_roster, ELO_ALPHA};
    use proptest::prelude::*;
    use rand::Rng;

    fn brute_tau_b(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut c, mut d, mut tx, mut ty) = (0i64, 0i64, 0i64, 0i64);
        for i in 0..n {
            for j in i + 1..n {
                let sx = (x[i] - x[j]).partial_cmp(&0.0).unwrap() as i64;
                let sy = (y[i] - y[j]).partial_cmp(&0.0).unwrap() as i64;
                match (sx, sy) {
                    (0, 0) => {}
                    (0, _) => tx += 1,
                    (_, 0) => ty += 1,
                    _ if sx == sy => c += 1,
                    _ => d += 1,
                }
            }
        }
        let denom = (((c + d + tx) * (c + d + ty)) as f64).sqrt();
        if denom == 0.0 { 0.0 } else { (c - d) as f64 / denom }
    }

    fn rv(scores: &[f64]) -> RatingVector {
        RatingVector::from_scores(numbered_roster(scores.len()), scores.to_vec(), ELO_ALPHA).unwrap()
    }

    #[test]
    fn identity_and_reversal() {
        let g = rv(&[1200.0, 1100.0, 1000.0, 900.0, 800.0]);
        let same = rank_metrics(&g, &g).unwrap();
        assert_eq!((same.spearman_rho, same.kendall_tau, same.avg_rank_diff, same.rmse), (1.0, 1.0, 0.0, 0.0));
        let rev = rank_metrics(&rv(&[800.0, 900.0, 1000.0, 1100.0, 1200.0]), &g).unwrap();
        assert_eq!(rev.spearman_rho, -1.0);
        assert_eq!(rev.kendall_tau, -1.0);
    }

    #[test]
    fn average_ranks_for_ties() {
        assert_eq!(descending_ranks(&[3.0, 5.0, 3.0, 1.0]), vec![2.5, 1.0, 2.5, 4.0]);
    }

    #[test]
    fn roster_mismatch() {
        let a = rv(&[1.0, 2.0]);
        let b = RatingVector::from_scores(numbered_roster(3), vec![1.0, 2.0, 3.0], ELO_ALPHA).unwrap();
        assert!(rank_metrics(&a, &b).is_err());
    }

    #[test]
    fn constant_input_gives_zero() {
        assert_eq!(kendall_tau_b(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }

    proptest! {
        #[test]
        fn fast_tau_equals_brute_force(seed in any::<u64>(), n in 2usize..50, levels in 2u32..12) {
            let mut rng = seeded(seed);
            // few levels forces ties
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
            prop_assert!((kendall_tau_b(&x, &y) - brute_tau_b(&x, &y)).abs() < 1e-12);
        }

        #[test]
        fn common_shift_is_invisible(seed in any::<u64>(), shift in -500.0f64..500.0) {
            let mut rng = seeded(seed);
            let a: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1000.0)).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1000.0)).collect();
            let base = score_metrics(&a, &b);
            let sa: Vec<f64> = a.iter().map(|v| v + shift).collect();
            let sb: Vec<f64> = b.iter().map(|v| v + shift).collect();
            let moved = score_metrics(&sa, &sb);
            prop_assert_eq!(base.kendall_tau, moved.kendall_tau);
            prop_assert_eq!(base.avg_rank_diff, moved.avg_rank_diff);
            prop_assert!((base.rmse - moved.rmse).abs() < 1e-9);
        }
    }
}
