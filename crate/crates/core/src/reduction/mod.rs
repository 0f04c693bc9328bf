//! Parameter-free learners built from a coin-betting scaler and the FTRL
//! direction learner, optionally constrained to a convex domain.
//!
//! Each round runs in a fixed order: predict under `‖·‖_{t−1}`, receive `g_t`,
//! form the surrogate gradient and dual norms under `‖·‖_{t−1}`, feed FTRL and
//! the scaler, then advance the schedule to `‖·‖_t`.

mod diag;
mod domain;

pub use diag::DiagScaleLearner;
pub(crate) use domain::project_with;
pub use domain::{mahalanobis_project, Domain};

use crate::coin_betting::CoinBetting;
use crate::error::{Error, Result};
use crate::ftrl::{FtrlState, DUAL_SLACK};
use crate::learner::OnlineLearner;
use crate::linalg::DenseVector;
use crate::norm_schedule::{NormSchedule, NormView, ScheduleKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerConfig {
    /// Initial wealth of the coin-betting scaler.
    pub epsilon: f64,
    /// Strong-convexity parameter; the schedule's nominal value when `None`.
    pub sigma: Option<f64>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            sigma: None,
        }
    }
}

/// Internal quantities of one completed round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    pub round: usize,
    /// FTRL direction `x_t`.
    pub x: DenseVector,
    /// Coin-betting scale `y_t`.
    pub y: f64,
    /// Unconstrained point `v_t = y_t x_t`.
    pub v: DenseVector,
    /// Played point `w_t = Π_t(v_t)`.
    pub w: DenseVector,
    pub g_hat: DenseVector,
    /// `‖g_t‖²_{t−1,⋆}`.
    pub dual_sq: f64,
    /// `‖ĝ_t‖²_{t−1,⋆}`.
    pub hat_dual_sq: f64,
    /// Scalar loss `⟨ĝ_t, x_t⟩` sent to the scaler.
    pub s: f64,
}

#[derive(Clone, Debug)]
struct Prediction {
    x: DenseVector,
    y: f64,
    v: DenseVector,
    w: DenseVector,
}

#[derive(Clone, Debug)]
pub struct VaryingNormLearner {
    scaler: CoinBetting,
    ftrl: FtrlState,
    schedule: NormSchedule,
    domain: Domain,
    round: usize,
    pending_gradient: Option<DenseVector>,
    prediction: Option<Prediction>,
    last: Option<RoundReport>,
}

impl VaryingNormLearner {
    pub fn new(schedule: NormSchedule, domain: Domain, config: LearnerConfig) -> Result<Self> {
        let dim = schedule.dim();
        domain.check_dim(dim)?;
        if schedule.kind() == ScheduleKind::MaxQuadScale && !domain.is_whole_space() {
            return Err(Error::UnsupportedDomain(format!(
                "{domain} with a max-quadratic norm (projection has no closed form)"
            )));
        }
        let sigma = config.sigma.unwrap_or_else(|| schedule.sigma());
        Ok(Self {
            scaler: CoinBetting::new(config.epsilon)?,
            ftrl: FtrlState::new(dim, sigma)?,
            schedule,
            domain,
            round: 0,
            pending_gradient: None,
            prediction: None,
            last: None,
        })
    }

    /// Unconstrained learner with a fresh schedule of the given kind.
    pub fn with_kind(kind: ScheduleKind, dim: usize) -> Result<Self> {
        Self::new(
            NormSchedule::new(kind, dim)?,
            Domain::WholeSpace,
            LearnerConfig::default(),
        )
    }

    pub fn schedule(&self) -> &NormSchedule {
        &self.schedule
    }

    pub fn ftrl(&self) -> &FtrlState {
        &self.ftrl
    }

    pub fn scaler(&self) -> &CoinBetting {
        &self.scaler
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Number of completed rounds.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn last_round(&self) -> Option<&RoundReport> {
        self.last.as_ref()
    }

    fn ready(&self) -> Result<()> {
        if !self.schedule.is_primed() || self.pending_gradient.is_some() {
            return Err(Error::MissingFeature("feature for the upcoming round"));
        }
        Ok(())
    }

    fn prepare(&mut self) -> Result<&Prediction> {
        if self.prediction.is_none() {
            self.ready()?;
            let x = self.ftrl.step(&self.schedule)?;
            let y = self.scaler.predict();
            let v = x.scaled(y);
            let eigen = match self.schedule.view() {
                NormView::Quadratic(q) => Some(q.eigen()),
                NormView::MaxQuad(_) => None,
            };
            let w = domain::project_with(eigen, &v, &self.domain)?;
            self.prediction = Some(Prediction { x, y, v, w });
        }
        Ok(self.prediction.as_ref().expect("prediction just stored"))
    }

    /// Surrogate gradient `ĝ ∈ ∂ ½(⟨g, ·⟩ + ‖g‖_⋆ S_t(·))` at `v_t`.
    fn surrogate(&self, g: &DenseVector, dual: f64, p: &Prediction) -> DenseVector {
        if self.domain.is_whole_space() {
            return g.clone();
        }
        let half = g.scaled(0.5);
        if p.v == p.w {
            return half;
        }
        let NormView::Quadratic(q) = self.schedule.view() else {
            return half;
        };
        let diff = p.v.sub(&p.w);
        let dist = q.norm(&diff);
        if !(dist > 0.0) {
            return half;
        }
        let pull = q.matrix().mul_slice(&diff);
        let mut out = half;
        for (o, m) in out.as_mut_slice().iter_mut().zip(pull) {
            *o += 0.5 * dual * m / dist;
        }
        out
    }
}

impl OnlineLearner for VaryingNormLearner {
    fn dim(&self) -> usize {
        self.schedule.dim()
    }

    /// For feature-based schedules the first call defines `‖·‖₀`; later calls
    /// complete the previous round's schedule advance.
    fn observe_feature(&mut self, f: &DenseVector) -> Result<()> {
        if !self.schedule.kind().needs_features() {
            return f.check_dim(self.dim());
        }
        if !self.schedule.is_primed() {
            return self.schedule.prime(f);
        }
        match self.pending_gradient.take() {
            Some(g) => self.schedule.advance(&g, Some(f)),
            None => Err(Error::InvalidParameter(
                "feature received twice without an intervening update".into(),
            )),
        }
    }

    fn predict(&mut self) -> Result<DenseVector> {
        Ok(self.prepare()?.w.clone())
    }

    fn update(&mut self, g: &DenseVector) -> Result<()> {
        g.check_dim(self.dim())?;
        let round = self.round + 1;
        self.prepare()?;
        let p = self.prediction.take().expect("prepared above");

        let dual = self.schedule.dual_norm_sq(g)?;
        if !dual.finite || dual.value > 1.0 + DUAL_SLACK {
            self.prediction = Some(p);
            return Err(Error::DualNormViolation {
                round,
                value: dual.value,
            });
        }
        let g_hat = self.surrogate(g, dual.value.sqrt(), &p);
        let hat_dual = if self.domain.is_whole_space() {
            dual
        } else {
            self.schedule.dual_norm_sq(&g_hat)?
        };
        let mut s = g_hat.dot(&p.x);
        if s.abs() > 1.0 && s.abs() <= 1.0 + DUAL_SLACK {
            s = s.clamp(-1.0, 1.0);
        }
        if let Err(err) = self.scaler.update(s) {
            self.prediction = Some(p);
            return Err(match err {
                Error::OutOfRange { value, .. } => Error::DualNormViolation { round, value },
                other => other,
            });
        }
        self.ftrl
            .observe(&g_hat, hat_dual.value.min(1.0 + DUAL_SLACK))?;
        if self.schedule.kind().needs_features() {
            self.pending_gradient = Some(g.clone());
        } else {
            self.schedule.advance(g, None)?;
        }
        self.round = round;
        self.last = Some(RoundReport {
            round,
            x: p.x,
            y: p.y,
            v: p.v,
            w: p.w,
            g_hat,
            dual_sq: dual.value,
            hat_dual_sq: hat_dual.value,
            s,
        });
        Ok(())
    }
}
