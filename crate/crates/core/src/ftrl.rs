//! Constrained FTRL over the unit ball of a varying norm.
//!
//! The regularizer after `t` rounds is `ψ_t(x) = a‖x‖_t²` on `‖x‖_t ≤ 1` with
//! `a = √(1 + S)/√(2σ)` and `S` the sum of squared dual norms seen so far.

use crate::error::{Error, Result};
use crate::linalg::DenseVector;
use crate::norm_schedule::{NormSchedule, NormView};

/// Slack allowed on `‖g‖_⋆² ≤ 1` before an observation is rejected.
pub const DUAL_SLACK: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct FtrlState {
    theta: DenseVector,
    dual_sq_sum: f64,
    sigma: f64,
    round: usize,
}

impl FtrlState {
    pub fn new(dim: usize, sigma: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "strong-convexity parameter must lie in (0, 1], got {sigma}"
            )));
        }
        Ok(Self {
            theta: DenseVector::zeros(dim),
            dual_sq_sum: 0.0,
            sigma,
            round: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }

    pub fn theta(&self) -> &DenseVector {
        &self.theta
    }

    pub fn dual_sq_sum(&self) -> f64 {
        self.dual_sq_sum
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn round(&self) -> usize {
        self.round
    }

    /// Regularizer weight `a`.
    pub fn scale(&self) -> f64 {
        (1.0 + self.dual_sq_sum).sqrt() / (2.0 * self.sigma).sqrt()
    }

    /// Records `g` with its squared dual norm under the norm it was played against.
    pub fn observe(&mut self, g: &DenseVector, dual_sq: f64) -> Result<()> {
        g.check_dim(self.dim())?;
        if !dual_sq.is_finite() {
            return Err(Error::NonFinite("FTRL dual norm"));
        }
        if dual_sq > 1.0 + DUAL_SLACK {
            return Err(Error::OutOfRange {
                what: "FTRL squared dual norm",
                value: dual_sq,
                limit: 1.0,
            });
        }
        self.theta.axpy(1.0, g);
        self.dual_sq_sum += dual_sq.max(0.0);
        self.round += 1;
        Ok(())
    }

    pub fn step(&self, schedule: &NormSchedule) -> Result<DenseVector> {
        self.step_in(schedule.view())
    }

    /// `argmin a‖x‖² + ⟨θ, x⟩` over `‖x‖ ≤ 1`.
    pub fn step_in(&self, norm: NormView<'_>) -> Result<DenseVector> {
        let dim = self.dim();
        if self.theta.is_zero() {
            return Ok(DenseVector::zeros(dim));
        }
        let a = self.scale();
        match norm {
            NormView::Quadratic(q) => {
                self.theta.check_dim(q.dim())?;
                let (solved, in_range) = q.pseudo_solve(&self.theta)?;
                if !in_range {
                    return Err(Error::OutsideRange);
                }
                let dual_sq = self.theta.dot(&solved);
                if !(dual_sq > 0.0) {
                    return Ok(DenseVector::zeros(dim));
                }
                let dual = dual_sq.sqrt();
                if dual / (2.0 * a) <= 1.0 {
                    Ok(solved.scaled(-1.0 / (2.0 * a)))
                } else {
                    Ok(solved.scaled(-1.0 / dual))
                }
            }
            NormView::MaxQuad(m) => {
                // x = r·u with ‖u‖ = 1 maximizing ⟨−θ, u⟩; then r = min(1, c/(2a)).
                let (value, direction) = m.maximize_linear(&self.theta.scaled(-1.0))?;
                let radius = (value / (2.0 * a)).min(1.0);
                Ok(direction.scaled(radius))
            }
        }
    }
}
