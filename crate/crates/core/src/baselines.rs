//! Reference learners and closed-form regret-bound evaluators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::OnlineLearner;
use crate::linalg::{self, DenseVector, SymMatrix};
use crate::reduction::Domain;

/// Relative eigenvalue cutoff used to count the rank of `G_T`.
pub const RANK_CUTOFF: f64 = 1e-10;

/// The three comparator-dependent regret bounds of a gradient sequence, plus
/// the spectral quantities they are built from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `‖ẘ‖₂ √(Σ‖g_t‖₂²)`.
    pub l2_bound: f64,
    /// `√(r Σ⟨g_t, ẘ⟩²)`.
    pub fullmatrix_bound: f64,
    /// `√(ẘᵀG^{1/2}ẘ · tr G^{1/2})`.
    pub adagrad_bound: f64,
    pub rank: usize,
    /// `tr G^{1/2}`.
    pub trace_root: f64,
    pub oracle_eta: f64,
    /// `Σ‖g_t‖₂² = tr G`.
    pub t_eff: f64,
    pub lambda_max: f64,
    /// `(tr G^{1/2})² / tr G`.
    pub r_eff: f64,
}

pub fn bound_report(gradients: &[DenseVector], comparator: &DenseVector) -> Result<BoundReport> {
    let mut gram = SymMatrix::zeros(comparator.dim());
    for g in gradients {
        gram.add_outer(g)?;
    }
    bound_report_from_gram(&gram, comparator)
}

/// Same as [`bound_report`] given `G_T = Σ g_t g_tᵀ` directly.
pub fn bound_report_from_gram(gram: &SymMatrix, comparator: &DenseVector) -> Result<BoundReport> {
    comparator.check_dim(gram.dim())?;
    let (root, root_eigen) = linalg::psd_sqrt_with_eigen(gram)?;
    let root_max = root_eigen.lambda_max();
    let lambda_max = root_max * root_max;
    let rank = if lambda_max > 0.0 {
        root_eigen
            .eigenvalues()
            .iter()
            .filter(|&&s| s * s > RANK_CUTOFF * lambda_max)
            .count()
    } else {
        0
    };
    let t_eff = gram.trace().max(0.0);
    let trace_root = root.trace().max(0.0);
    let along = linalg::quad_form(gram, comparator)?.max(0.0);
    let root_along = linalg::quad_form(&root, comparator)?.max(0.0);
    Ok(BoundReport {
        l2_bound: comparator.norm2() * t_eff.sqrt(),
        fullmatrix_bound: (rank as f64 * along).sqrt(),
        adagrad_bound: (root_along * trace_root).sqrt(),
        rank,
        trace_root,
        oracle_eta: if trace_root > 0.0 {
            (root_along / trace_root).sqrt()
        } else {
            0.0
        },
        t_eff,
        lambda_max,
        r_eff: if t_eff > 0.0 {
            trace_root * trace_root / t_eff
        } else {
            0.0
        },
    })
}

/// Hindsight-optimal AdaGrad learning rate `√(ẘᵀG^{1/2}ẘ / tr G^{1/2})`.
pub fn oracle_eta(gram: &SymMatrix, comparator: &DenseVector) -> Result<f64> {
    comparator.check_dim(gram.dim())?;
    let root = linalg::psd_sqrt(gram)?;
    let trace = root.trace();
    if !(trace > 0.0) {
        return Err(Error::ZeroTrace);
    }
    let along = linalg::quad_form(&root, comparator)?.max(0.0);
    Ok((along / trace).sqrt())
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// Projected online gradient descent with step `D / √(Σ‖g_i‖₂²)`.
#[derive(Clone, Debug)]
pub struct OgdAdaptive {
    diameter: f64,
    domain: Domain,
    w: DenseVector,
    sum_sq: f64,
}

impl OgdAdaptive {
    pub fn new(dim: usize, diameter: f64, domain: Domain) -> Result<Self> {
        positive("OGD scale D", diameter)?;
        domain.check_dim(dim)?;
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            diameter,
            domain,
            w: DenseVector::zeros(dim),
            sum_sq: 0.0,
        })
    }
}

impl OnlineLearner for OgdAdaptive {
    fn dim(&self) -> usize {
        self.w.dim()
    }

    fn predict(&mut self) -> Result<DenseVector> {
        Ok(self.w.clone())
    }

    fn update(&mut self, g: &DenseVector) -> Result<()> {
        g.check_dim(self.dim())?;
        self.sum_sq += g.dot(g);
        if self.sum_sq > 0.0 {
            self.w.axpy(-self.diameter / self.sum_sq.sqrt(), g);
            self.w = crate::reduction::project_with(None, &self.w, &self.domain)?;
        }
        Ok(())
    }
}

/// Full-matrix AdaGrad in FTRL form with regularizer `(1/η) xᵀ(I + G_t)^{1/2} x`.
#[derive(Clone, Debug)]
pub struct AdagradFtrl {
    eta: f64,
    domain: Domain,
    theta: DenseVector,
    gram: SymMatrix,
}

impl AdagradFtrl {
    pub fn new(dim: usize, eta: f64, domain: Domain) -> Result<Self> {
        positive("AdaGrad learning rate", eta)?;
        domain.check_dim(dim)?;
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        Ok(Self {
            eta,
            domain,
            theta: DenseVector::zeros(dim),
            gram: SymMatrix::zeros(dim),
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl OnlineLearner for AdagradFtrl {
    fn dim(&self) -> usize {
        self.theta.dim()
    }

    fn predict(&mut self) -> Result<DenseVector> {
        let dim = self.dim();
        if self.theta.is_zero() {
            return Ok(DenseVector::zeros(dim));
        }
        let eigen = linalg::sym_eigen(&self.gram.shifted(1.0))?;
        let scale = -self.eta / 2.0;
        let free = eigen.apply_spectral(&self.theta, |l| scale / l.max(f64::MIN_POSITIVE).sqrt());
        let free = DenseVector::new(free)?;
        if self.domain.is_whole_space() || self.domain.contains(&free) {
            return Ok(free);
        }
        let root = eigen.map_eigenvalues(|l| l.max(0.0).sqrt());
        crate::reduction::project_with(Some(&root), &free, &self.domain)
    }

    fn update(&mut self, g: &DenseVector) -> Result<()> {
        g.check_dim(self.dim())?;
        self.theta.axpy(1.0, g);
        self.gram.add_outer(g)
    }
}
