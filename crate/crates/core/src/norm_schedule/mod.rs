//! Increasing seminorm sequences `‖·‖₀ ≤ ‖·‖₁ ≤ …` consumed by the FTRL
//! direction learner.
//!
//! A schedule at index `t − 1` measures round `t`: the learner predicts with
//! it and computes the dual norm of `g_t` under it, then [`NormSchedule::advance`]
//! moves it to index `t`.

mod maxquad;
mod quadratic;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseVector, SymMatrix};

pub use maxquad::MaxQuadSeminorm;
pub use quadratic::{DualNorm, QuadraticSeminorm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    /// A fixed quadratic norm, Euclidean unless given explicitly.
    Static,
    /// `M_t = 2I + G_t`.
    FullMatrix,
    /// `M_t = (I + G_t)^{1/2}`.
    AdagradRoot,
    /// One-dimensional `‖x‖_t = m_{t+1}|x|` with `m` the running max of `|f|`.
    DiagScale,
    /// `‖x‖_t² = xᵀG_t x + 2 max_{i ≤ t+1} ⟨f_i, x⟩²`.
    MaxQuadScale,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 5] = [
        ScheduleKind::Static,
        ScheduleKind::FullMatrix,
        ScheduleKind::AdagradRoot,
        ScheduleKind::DiagScale,
        ScheduleKind::MaxQuadScale,
    ];

    pub fn needs_features(self) -> bool {
        matches!(self, ScheduleKind::DiagScale | ScheduleKind::MaxQuadScale)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Static => "static",
            ScheduleKind::FullMatrix => "full_matrix",
            ScheduleKind::AdagradRoot => "adagrad_root",
            ScheduleKind::DiagScale => "diag_scale",
            ScheduleKind::MaxQuadScale => "maxquad_scale",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScheduleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown schedule kind `{s}`")))
    }
}

/// Borrowed view of the current norm, as needed by the FTRL step.
#[derive(Clone, Copy, Debug)]
pub enum NormView<'a> {
    Quadratic(&'a QuadraticSeminorm),
    MaxQuad(&'a MaxQuadSeminorm),
}

impl NormView<'_> {
    pub fn norm(&self, x: &DenseVector) -> f64 {
        match self {
            NormView::Quadratic(q) => q.norm(x),
            NormView::MaxQuad(m) => m.norm(x),
        }
    }
}

#[derive(Clone, Debug)]
enum State {
    Static(QuadraticSeminorm),
    FullMatrix {
        gram: SymMatrix,
        norm: QuadraticSeminorm,
    },
    AdagradRoot {
        gram: SymMatrix,
        norm: QuadraticSeminorm,
    },
    DiagScale {
        running_max: f64,
        norm: QuadraticSeminorm,
    },
    MaxQuad(MaxQuadSeminorm),
}

#[derive(Clone, Debug)]
pub struct NormSchedule {
    kind: ScheduleKind,
    dim: usize,
    index: usize,
    primed: bool,
    state: State,
}

impl NormSchedule {
    /// Fresh schedule at index 0. `DiagScale` is one-dimensional.
    pub fn new(kind: ScheduleKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        let state = match kind {
            ScheduleKind::Static => State::Static(QuadraticSeminorm::euclidean(dim)),
            ScheduleKind::FullMatrix => State::FullMatrix {
                gram: SymMatrix::zeros(dim),
                norm: QuadraticSeminorm::new(SymMatrix::scaled_identity(dim, 2.0))?,
            },
            ScheduleKind::AdagradRoot => State::AdagradRoot {
                gram: SymMatrix::zeros(dim),
                norm: QuadraticSeminorm::euclidean(dim),
            },
            ScheduleKind::DiagScale => {
                if dim != 1 {
                    return Err(Error::InvalidParameter(format!(
                        "diag_scale schedules are one-dimensional, got dimension {dim}"
                    )));
                }
                State::DiagScale {
                    running_max: 0.0,
                    norm: QuadraticSeminorm::new(SymMatrix::zeros(1))?,
                }
            }
            ScheduleKind::MaxQuadScale => State::MaxQuad(MaxQuadSeminorm::new(dim)),
        };
        Ok(Self {
            kind,
            dim,
            index: 0,
            primed: !kind.needs_features(),
            state,
        })
    }

    /// Static schedule with an arbitrary fixed quadratic norm.
    pub fn fixed(norm: QuadraticSeminorm) -> Self {
        Self {
            kind: ScheduleKind::Static,
            dim: norm.dim(),
            index: 0,
            primed: true,
            state: State::Static(norm),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn is_primed(&self) -> bool {
        self.primed
    }

    /// Nominal strong-convexity parameter of `½‖·‖²`.
    pub fn sigma(&self) -> f64 {
        1.0
    }

    /// Feeds the first feature vector, which defines `‖·‖₀` for feature kinds.
    pub fn prime(&mut self, f: &DenseVector) -> Result<()> {
        f.check_dim(self.dim)?;
        if self.primed {
            return Err(Error::InvalidParameter(
                "schedule already received its first feature".into(),
            ));
        }
        self.absorb_feature(f)?;
        self.primed = true;
        Ok(())
    }

    /// Moves from index `t − 1` to `t` with gradient `g_t` and, for feature
    /// kinds, the next feature `f_{t+1}`.
    pub fn advance(&mut self, g: &DenseVector, next_feature: Option<&DenseVector>) -> Result<()> {
        g.check_dim(self.dim)?;
        self.require_primed()?;
        let feature = if self.kind.needs_features() {
            let f = next_feature.ok_or(Error::MissingFeature("schedule advance"))?;
            f.check_dim(self.dim)?;
            Some(f)
        } else {
            None
        };
        match &mut self.state {
            State::Static(_) => {}
            State::FullMatrix { gram, norm } => {
                gram.add_outer(g)?;
                *norm = QuadraticSeminorm::new(gram.shifted(2.0))?;
            }
            State::AdagradRoot { gram, norm } => {
                gram.add_outer(g)?;
                let (root, eigen) = linalg::psd_sqrt_with_eigen(&gram.shifted(1.0))?;
                *norm = QuadraticSeminorm::from_parts(root, eigen);
            }
            State::DiagScale { .. } => {}
            State::MaxQuad(m) => m.add_gradient(g)?,
        }
        if let Some(f) = feature {
            self.absorb_feature(f)?;
        }
        self.index += 1;
        Ok(())
    }

    pub fn view(&self) -> NormView<'_> {
        match &self.state {
            State::Static(norm)
            | State::FullMatrix { norm, .. }
            | State::AdagradRoot { norm, .. }
            | State::DiagScale { norm, .. } => NormView::Quadratic(norm),
            State::MaxQuad(m) => NormView::MaxQuad(m),
        }
    }

    /// Running max of `|f|` for diagonal schedules.
    pub fn running_max(&self) -> Option<f64> {
        match &self.state {
            State::DiagScale { running_max, .. } => Some(*running_max),
            _ => None,
        }
    }

    /// Accumulated `G_t`, for the kinds that keep one.
    pub fn gram(&self) -> Option<&SymMatrix> {
        match &self.state {
            State::FullMatrix { gram, .. } | State::AdagradRoot { gram, .. } => Some(gram),
            State::MaxQuad(m) => Some(m.gram()),
            _ => None,
        }
    }

    pub fn norm(&self, x: &DenseVector) -> f64 {
        self.view().norm(x)
    }

    /// Squared dual norm of `g` under the current norm. For max-quadratic
    /// schedules this is the upper bound `gᵀ(G + f₁f₁ᵀ + f_t f_tᵀ)⁺g`.
    pub fn dual_norm_sq(&self, g: &DenseVector) -> Result<DualNorm> {
        g.check_dim(self.dim)?;
        self.require_primed()?;
        match &self.state {
            State::Static(norm)
            | State::FullMatrix { norm, .. }
            | State::AdagradRoot { norm, .. } => norm.dual_norm_sq(g),
            State::DiagScale { running_max, .. } => {
                let m = *running_max;
                let x = g[0];
                if m == 0.0 {
                    // 0/0 = 0
                    if x == 0.0 {
                        Ok(DualNorm::finite(0.0))
                    } else {
                        Ok(DualNorm::infinite())
                    }
                } else {
                    let r = x / m;
                    Ok(DualNorm::finite(r * r))
                }
            }
            State::MaxQuad(m) => m.surrogate_dual_sq(g),
        }
    }

    fn require_primed(&self) -> Result<()> {
        if self.primed {
            Ok(())
        } else {
            Err(Error::MissingFeature(
                "schedule has not received its first feature",
            ))
        }
    }

    fn absorb_feature(&mut self, f: &DenseVector) -> Result<()> {
        match &mut self.state {
            State::DiagScale { running_max, norm } => {
                let a = f[0].abs();
                if a > *running_max {
                    *running_max = a;
                    *norm = QuadraticSeminorm::new(SymMatrix::diagonal(&[a * a])?)?;
                }
                Ok(())
            }
            State::MaxQuad(m) => m.push_feature(f),
            _ => Ok(()),
        }
    }
}
