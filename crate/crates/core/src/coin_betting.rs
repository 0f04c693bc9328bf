//! One-dimensional parameter-free learner based on coin betting.
//!
//! The learner bets a fraction `v ∈ [-1/2, 1/2]` of its current wealth. The
//! fraction is itself chosen by FTRL on the log-wealth losses
//! `-log(1 - g v)` linearized at the current bet, with regularizer
//! `½(5 + Σz²) v²`, which has the clipped closed-form minimizer used below.

use crate::error::{Error, Result};

/// Slack allowed on `|g| ≤ 1` before an update is rejected.
pub const LOSS_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CoinBetting {
    epsilon: f64,
    wealth: f64,
    fraction: f64,
    sum_z: f64,
    sum_z_sq: f64,
    round: usize,
}

impl Default for CoinBetting {
    fn default() -> Self {
        Self::new(1.0).expect("default epsilon is positive")
    }
}

impl CoinBetting {
    /// Fresh learner with initial wealth `epsilon`.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "initial wealth must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            wealth: epsilon,
            fraction: 0.0,
            sum_z: 0.0,
            sum_z_sq: 0.0,
            round: 0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn wealth(&self) -> f64 {
        self.wealth
    }

    pub fn fraction(&self) -> f64 {
        self.fraction
    }

    pub fn sum_z(&self) -> f64 {
        self.sum_z
    }

    pub fn sum_z_sq(&self) -> f64 {
        self.sum_z_sq
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Current bet `v · wealth`.
    pub fn predict(&self) -> f64 {
        self.fraction * self.wealth
    }

    /// Consumes the loss `g` (|g| ≤ 1) and returns the betting gradient `z`.
    pub fn update(&mut self, g: f64) -> Result<f64> {
        if !g.is_finite() {
            return Err(Error::NonFinite("coin betting loss"));
        }
        if g.abs() > 1.0 + LOSS_SLACK {
            return Err(Error::OutOfRange {
                what: "coin betting loss |g|",
                value: g.abs(),
                limit: 1.0,
            });
        }
        let factor = 1.0 - g * self.fraction;
        let z = g / factor;
        self.wealth *= factor;
        self.sum_z += z;
        self.sum_z_sq += z * z;
        self.fraction = (-self.sum_z / (5.0 + self.sum_z_sq)).clamp(-0.5, 0.5);
        self.round += 1;
        Ok(z)
    }

    #[cfg(test)]
    pub(crate) fn with_state(epsilon: f64, wealth: f64, fraction: f64) -> Self {
        Self {
            epsilon,
            wealth,
            fraction,
            sum_z: 0.0,
            sum_z_sq: 0.0,
            round: 0,
        }
    }
}

/// Closed-form regret bound of the coin-betting learner against `comparator`:
///
/// `ε + 2|u| max[√((3+3Σg²) log(e + |u|(7+4Σg²)/ε)), 2 log(e + |u|(7+4Σg²)/ε)]`
pub fn regret_bound(comparator: f64, sum_g_sq: f64, epsilon: f64) -> f64 {
    let u = comparator.abs();
    let log_term = (std::f64::consts::E + u * (7.0 + 4.0 * sum_g_sq) / epsilon).ln();
    let first = ((3.0 + 3.0 * sum_g_sq) * log_term).sqrt();
    let second = 2.0 * log_term;
    epsilon + 2.0 * u * first.max(second)
}
