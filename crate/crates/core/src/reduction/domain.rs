use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, DenseVector, EigenDecomposition, SymMatrix};

const BISECTION_TOLERANCE: f64 = 1e-10;
const BISECTION_MAX_ITERATIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    WholeSpace,
    L2Ball {
        radius: f64,
    },
    /// One-dimensional `[lo, hi]`.
    Interval {
        lo: f64,
        hi: f64,
    },
}

impl Domain {
    pub fn l2_ball(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Domain::L2Ball { radius })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidParameter(format!(
                "invalid interval [{lo}, {hi}]"
            )));
        }
        Ok(Domain::Interval { lo, hi })
    }

    pub fn is_whole_space(&self) -> bool {
        matches!(self, Domain::WholeSpace)
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Domain::Interval { .. } if dim != 1 => Err(Error::UnsupportedDomain(format!(
                "intervals are one-dimensional, learner has dimension {dim}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, w: &DenseVector) -> bool {
        match *self {
            Domain::WholeSpace => true,
            Domain::L2Ball { radius } => w.norm2() <= radius,
            Domain::Interval { lo, hi } => w.dim() == 1 && lo <= w[0] && w[0] <= hi,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::WholeSpace => f.write_str("whole_space"),
            Domain::L2Ball { radius } => write!(f, "l2_ball:{radius}"),
            Domain::Interval { lo, hi } => write!(f, "interval:{lo},{hi}"),
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    /// `whole_space`, `l2_ball:<r>` or `interval:<lo>,<hi>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Config(format!("invalid domain `{s}`: {what}"));
        let number = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad("expected a number"))
        };
        match s.trim().split_once(':') {
            None if s.trim() == "whole_space" => Ok(Domain::WholeSpace),
            Some(("l2_ball", r)) => Domain::l2_ball(number(r)?),
            Some(("interval", bounds)) => {
                let (lo, hi) = bounds
                    .split_once(',')
                    .ok_or_else(|| bad("expected lo,hi"))?;
                Domain::interval(number(lo)?, number(hi)?)
            }
            _ => Err(bad("unknown kind")),
        }
    }
}

/// `argmin_{w ∈ W} (v − w)ᵀM(v − w)`.
pub fn mahalanobis_project(m: &SymMatrix, v: &DenseVector, domain: &Domain) -> Result<DenseVector> {
    v.check_dim(m.dim())?;
    match domain {
        Domain::L2Ball { radius } if v.norm2() > *radius => {
            let eigen = linalg::sym_eigen(m)?;
            project_ball(&eigen, v, *radius)
        }
        _ => project_with(None, v, domain),
    }
}

/// Projection reusing a cached eigendecomposition of `M`.
pub(crate) fn project_with(
    eigen: Option<&EigenDecomposition>,
    v: &DenseVector,
    domain: &Domain,
) -> Result<DenseVector> {
    domain.check_dim(v.dim())?;
    match *domain {
        Domain::WholeSpace => Ok(v.clone()),
        Domain::Interval { lo, hi } => Ok(DenseVector::new(vec![v[0].clamp(lo, hi)])?),
        Domain::L2Ball { radius } => {
            if v.norm2() <= radius {
                return Ok(v.clone());
            }
            match eigen {
                Some(e) => project_ball(e, v, radius),
                None => Ok(radial(v, radius)),
            }
        }
    }
}

fn radial(v: &DenseVector, radius: f64) -> DenseVector {
    let n = v.norm2();
    let mut w = v.scaled(radius / n);
    // guard against the last ulp
    while w.norm2() > radius {
        w = w.scaled(1.0 - f64::EPSILON);
    }
    w
}

/// Bisection on the multiplier of the KKT system `(M + λI)w = Mv`.
fn project_ball(eigen: &EigenDecomposition, v: &DenseVector, radius: f64) -> Result<DenseVector> {
    let mu = eigen.eigenvalues();
    let mu_max = eigen.lambda_max();
    if !(mu_max > 0.0) {
        // every point of the ball is at distance zero
        return Ok(radial(v, radius));
    }
    let cutoff = linalg::PINV_CUTOFF * mu_max;
    let coords = eigen.coordinates(v);
    let point = |lambda: f64| -> Vec<f64> {
        let scaled: Vec<f64> = coords
            .iter()
            .zip(mu)
            .map(|(&c, &m)| {
                if m > cutoff {
                    c * m / (m + lambda)
                } else {
                    0.0
                }
            })
            .collect();
        eigen.from_coordinates(&scaled)
    };
    let norm = |w: &[f64]| w.iter().map(|x| x * x).sum::<f64>().sqrt();

    let limit = point(0.0);
    if norm(&limit) <= radius {
        return DenseVector::new(limit);
    }
    let mut lo = 0.0;
    let mut hi = mu_max * v.norm2() / radius;
    let mut best = point(hi);
    for _ in 0..BISECTION_MAX_ITERATIONS {
        if (norm(&best) - radius).abs() <= BISECTION_TOLERANCE * radius {
            let w = DenseVector::new(best)?;
            return Ok(if w.norm2() > radius {
                radial(&w, radius)
            } else {
                w
            });
        }
        let mid = 0.5 * (lo + hi);
        let w = point(mid);
        if norm(&w) > radius {
            lo = mid;
        } else {
            hi = mid;
            best = w;
        }
    }
    Err(Error::NoConvergence {
        routine: "Mahalanobis ball projection",
        iterations: BISECTION_MAX_ITERATIONS,
    })
}
