use crate::error::{Error, Result};
use crate::linalg::{self, DenseVector, EigenDecomposition, SymMatrix};

/// Dual (semi)norm value; `finite` is false when the argument leaves the range
/// of the seminorm matrix, in which case `value` is `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualNorm {
    pub value: f64,
    pub finite: bool,
}

impl DualNorm {
    pub(crate) fn finite(value: f64) -> Self {
        Self {
            value,
            finite: true,
        }
    }

    pub(crate) fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            finite: false,
        }
    }
}

/// `‖x‖ = √(xᵀMx)` for a PSD matrix `M`, with its eigendecomposition cached.
#[derive(Clone, Debug)]
pub struct QuadraticSeminorm {
    matrix: SymMatrix,
    eigen: EigenDecomposition,
}

impl QuadraticSeminorm {
    pub fn new(matrix: SymMatrix) -> Result<Self> {
        let eigen = linalg::sym_eigen(&matrix)?;
        let tolerance = linalg::PSD_TOLERANCE * eigen.lambda_max().max(0.0);
        if let Some(&lowest) = eigen.eigenvalues().first() {
            if lowest < -tolerance {
                return Err(Error::NotPsd {
                    eigenvalue: lowest,
                    tolerance: -tolerance,
                });
            }
        }
        Ok(Self { matrix, eigen })
    }

    pub(crate) fn from_parts(matrix: SymMatrix, eigen: EigenDecomposition) -> Self {
        Self { matrix, eigen }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(SymMatrix::identity(dim)).expect("identity is PSD")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eigen
    }

    pub fn norm_sq(&self, x: &DenseVector) -> f64 {
        linalg::quad_form_slice(&self.matrix, x).max(0.0)
    }

    pub fn norm(&self, x: &DenseVector) -> f64 {
        self.norm_sq(x).sqrt()
    }

    pub fn pseudo_solve(&self, b: &DenseVector) -> Result<(DenseVector, bool)> {
        linalg::pseudo_solve_with(&self.matrix, &self.eigen, b)
    }

    /// `gᵀM⁺g`, or infinite when `g` has a kernel component.
    pub fn dual_norm_sq(&self, g: &DenseVector) -> Result<DualNorm> {
        let (x, in_range) = self.pseudo_solve(g)?;
        if !in_range {
            return Ok(DualNorm::infinite());
        }
        Ok(DualNorm::finite(g.dot(&x).max(0.0)))
    }
}
