//! Win-probability model, online Elo updates and the batch Bradley-Terry
//! maximum-likelihood fit.

mod bt;
mod elo;

pub use bt::{fit_bt_mle, log_likelihood, log_likelihood_gradient, SolverConfig};
pub use elo::{elo_update, elo_update_with_score, run_elo, EloConfig};

/// Probability that a model rated `u_i` beats one rated `u_j`:
/// `1 / (1 + exp(-alpha (u_i - u_j)))`.
pub fn win_prob(u_i: f64, u_j: f64, alpha: f64) -> f64 {
    sigmoid(alpha * (u_i - u_j))
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln sigmoid(z)` without overflow for large |z|.
pub(crate) fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ELO_ALPHA;
    use proptest::prelude::*;

    #[test]
    fn equal_ratings_are_even() {
        assert_eq!(win_prob(1234.0, 1234.0, ELO_ALPHA), 0.5);
        assert_eq!(win_prob(0.0, 0.0, 3.0), 0.5);
    }

    #[test]
    fn four_hundred_points_is_ten_to_one() {
        let p = win_prob(1400.0, 1000.0, ELO_ALPHA);
        assert!((p - 10.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn log_sigmoid_is_stable() {
        assert!((log_sigmoid(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((log_sigmoid(-800.0) + 800.0).abs() < 1e-9);
        assert!(log_sigmoid(800.0).abs() < 1e-300);
    }

    proptest! {
        #[test]
        fn complement(a in -3000.0f64..3000.0, b in -3000.0f64..3000.0, alpha in 1e-4f64..0.1) {
            let p = win_prob(a, b, alpha);
            prop_assert!(p > 0.0 && p < 1.0 || (a - b).abs() * alpha > 30.0);
            prop_assert!((p + win_prob(b, a, alpha) - 1.0).abs() < 1e-12);
        }
    }
}
