//! Dense symmetric linear algebra.
//!
//! Everything here works on small, fully stored matrices. The eigensolver is
//! cyclic Jacobi: it keeps exact symmetry, needs no external BLAS, and skips
//! rotations for entries that are already zero, which makes structured
//! (block-sparse) Gram matrices cheap to decompose.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Relative cutoff below which eigenvalues are treated as zero in pseudo-inverses.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Relative residual above which a right-hand side is reported outside the range.
pub const RANGE_TOLERANCE: f64 = 1e-8;
/// Relative slack allowed on negative eigenvalues of a numerically PSD matrix.
pub const PSD_TOLERANCE: f64 = 1e-10;

const JACOBI_THRESHOLD: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// A finite real vector of fixed dimension.
#[derive(Clone, PartialEq, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter(
                "vector dimension must be at least 1".into(),
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Standard basis vector `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }

    /// `self += factor * other`
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Debug for DenseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

/// Symmetric matrix with full row-major storage.
///
/// Construction averages `M` and `Mᵀ`, so stored entries are exactly symmetric.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from row-major entries, symmetrizing as `(M + Mᵀ)/2`.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimension must be at least 1".into(),
            ));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        let mut m = Self { dim, data };
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (m.data[i * dim + j] + m.data[j * dim + i]);
                m.data[i * dim + j] = avg;
                m.data[j * dim + i] = avg;
            }
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, value: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = value;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, x: &DenseVector) -> Result<DenseVector> {
        x.check_dim(self.dim)?;
        Ok(DenseVector(self.mul_slice(x)))
    }

    pub(crate) fn mul_slice(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                let row = &self.data[i * n..(i + 1) * n];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `self + other`
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SymMatrix {
            dim: self.dim,
            data,
        })
    }

    /// `self + value·I`
    pub fn shifted(&self, value: f64) -> SymMatrix {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.data[i * self.dim + i] += value;
        }
        m
    }

    /// In-place `self += g gᵀ`.
    pub fn add_outer(&mut self, g: &DenseVector) -> Result<()> {
        self.add_scaled_outer(1.0, g)
    }

    /// In-place `self += weight · g gᵀ`.
    pub fn add_scaled_outer(&mut self, weight: f64, g: &DenseVector) -> Result<()> {
        g.check_dim(self.dim)?;
        let n = self.dim;
        for i in 0..n {
            if g[i] == 0.0 {
                continue;
            }
            for j in i..n {
                let v = weight * (g[i] * g[j]);
                self.data[i * n + j] += v;
                if j != i {
                    self.data[j * n + i] += v;
                }
            }
        }
        Ok(())
    }

    fn max_abs_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        worst
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.dim).collect();
        f.debug_struct("SymMatrix")
            .field("dim", &self.dim)
            .field("rows", &rows)
            .finish()
    }
}

/// `M = Q diag(λ) Qᵀ` with eigenvalues ascending; eigenvectors are the columns of `Q`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    dim: usize,
    rotation: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Row-major `Q`.
    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub fn q(&self, row: usize, col: usize) -> f64 {
        self.rotation[row * self.dim + col]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Coordinates `Qᵀ b`.
    pub fn coordinates(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (row, &bi) in b.iter().enumerate() {
            if bi == 0.0 {
                continue;
            }
            let q_row = &self.rotation[row * n..(row + 1) * n];
            for (o, q) in out.iter_mut().zip(q_row) {
                *o += q * bi;
            }
        }
        out
    }

    /// `Q c`.
    pub fn from_coordinates(&self, c: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|row| {
                let q_row = &self.rotation[row * n..(row + 1) * n];
                q_row.iter().zip(c).map(|(q, ci)| q * ci).sum()
            })
            .collect()
    }

    /// Applies `Q f(Λ) Qᵀ` to `b`.
    pub fn apply_spectral(&self, b: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut c = self.coordinates(b);
        for (ci, &lambda) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= f(lambda);
        }
        self.from_coordinates(&c)
    }

    /// Builds `Q f(Λ) Qᵀ`.
    pub fn spectral_matrix(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let n = self.dim;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.q(i, k) * fl[k] * self.q(j, k);
                }
                data[i * n + j] = acc;
                data[j * n + i] = acc;
            }
        }
        SymMatrix { dim: n, data }
    }

    /// Same eigenvectors, eigenvalues mapped through `f` (order re-sorted).
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> EigenDecomposition {
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        sorted_decomposition(self.dim, self.rotation.clone(), values)
    }

    /// Number of eigenvalues strictly above `relative_cutoff · λ_max`.
    pub fn rank(&self, relative_cutoff: f64) -> usize {
        let lmax = self.lambda_max();
        if lmax <= 0.0 {
            return 0;
        }
        self.eigenvalues
            .iter()
            .filter(|&&l| l > relative_cutoff * lmax)
            .count()
    }

    /// `M⁺ b` with the relative eigenvalue cutoff [`PINV_CUTOFF`].
    pub fn pinv_apply(&self, b: &[f64]) -> Vec<f64> {
        let cutoff = PINV_CUTOFF * self.lambda_max();
        self.apply_spectral(b, |l| if l > cutoff && l > 0.0 { 1.0 / l } else { 0.0 })
    }
}

fn sorted_decomposition(dim: usize, rotation: Vec<f64>, values: Vec<f64>) -> EigenDecomposition {
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut q = vec![0.0; dim * dim];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..dim {
            q[row * dim + new_col] = rotation[row * dim + old_col];
        }
    }
    EigenDecomposition {
        dim,
        rotation: q,
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius mass falls below
/// `1e-12 · ‖M‖_F`; at most 100 sweeps are performed.
pub fn sym_eigen(m: &SymMatrix) -> Result<EigenDecomposition> {
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    if m.max_abs_asymmetry() != 0.0 {
        return Err(Error::InvalidParameter("matrix is not symmetric".into()));
    }
    let n = m.dim;
    let mut a = m.data.clone();
    let mut v = SymMatrix::identity(n).data;
    let tolerance = JACOBI_THRESHOLD * m.frobenius_norm();

    let mut converged = false;
    for sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() <= tolerance {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Past the first few sweeps, entries negligible next to both
                // diagonal values are zeroed outright.
                let tiny = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + tiny == app.abs() && aqq.abs() + tiny == aqq.abs() {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "jacobi eigensolver",
            iterations: JACOBI_MAX_SWEEPS,
        });
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    Ok(sorted_decomposition(n, v, values))
}

/// Symmetric PSD square root together with its eigendecomposition.
///
/// Eigenvalues in `[-1e-10·λ_max, 0)` are clamped to zero before rooting.
pub fn psd_sqrt_with_eigen(m: &SymMatrix) -> Result<(SymMatrix, EigenDecomposition)> {
    let eig = sym_eigen(m)?;
    let tolerance = PSD_TOLERANCE * eig.lambda_max().max(0.0);
    if let Some(&worst) = eig.eigenvalues.first() {
        if worst < -tolerance {
            return Err(Error::NotPsd {
                eigenvalue: worst,
                tolerance: -tolerance,
            });
        }
    }
    let root = eig.map_eigenvalues(|l| l.max(0.0).sqrt());
    Ok((root.spectral_matrix(|l| l), root))
}

pub fn psd_sqrt(m: &SymMatrix) -> Result<SymMatrix> {
    psd_sqrt_with_eigen(m).map(|(root, _)| root)
}

/// `M⁺ b` using a precomputed decomposition of `m`; the flag is false when
/// `‖M x − b‖₂ > 1e-8 ‖b‖₂`, i.e. `b` has a component in the kernel.
///
/// `M x` is formed as `QΛQᵀx` from the decomposition. Multiplying by the raw
/// entries instead leaves a residual of order `ε·cond(M)·‖b‖`, which would
/// flag well-posed but ill-conditioned systems.
pub fn pseudo_solve_with(
    m: &SymMatrix,
    eig: &EigenDecomposition,
    b: &DenseVector,
) -> Result<(DenseVector, bool)> {
    b.check_dim(m.dim)?;
    let x = eig.pinv_apply(b);
    let mx = eig.apply_spectral(&x, |l| l);
    let residual = mx
        .iter()
        .zip(b.iter())
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    let in_range = residual <= RANGE_TOLERANCE * b.norm2();
    Ok((DenseVector(x), in_range))
}

pub fn pseudo_solve(m: &SymMatrix, b: &DenseVector) -> Result<(DenseVector, bool)> {
    b.check_dim(m.dim)?;
    let eig = sym_eigen(m)?;
    pseudo_solve_with(m, &eig, b)
}

/// `xᵀ M x`, accumulating the diagonal once and each off-diagonal pair twice.
pub fn quad_form(m: &SymMatrix, x: &DenseVector) -> Result<f64> {
    x.check_dim(m.dim)?;
    Ok(quad_form_slice(m, x))
}

pub(crate) fn quad_form_slice(m: &SymMatrix, x: &[f64]) -> f64 {
    let n = m.dim;
    let mut acc = 0.0;
    for i in 0..n {
        let xi = x[i];
        if xi == 0.0 {
            continue;
        }
        acc += m.data[i * n + i] * xi * xi;
        let mut cross = 0.0;
        for j in (i + 1)..n {
            cross += m.data[i * n + j] * x[j];
        }
        acc += 2.0 * xi * cross;
    }
    acc
}

/// `M + g gᵀ`
pub fn rank_one_update(m: &SymMatrix, g: &DenseVector) -> Result<SymMatrix> {
    let mut out = m.clone();
    out.add_outer(g)?;
    Ok(out)
}

/// Solves `A x = b` for a symmetric positive-definite row-major `A` by
/// Cholesky factorization; `None` when a pivot is not positive.
pub(crate) fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::new(x.to_vec()).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn eigen_of_identity() {
        let eig = sym_eigen(&SymMatrix::identity(2)).unwrap();
        assert_eq!(eig.eigenvalues(), &[1.0, 1.0]);
        assert_eq!(eig.rotation(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn eigen_of_diagonal_is_sorted() {
        let eig = sym_eigen(&SymMatrix::diagonal(&[4.0, 1.0]).unwrap()).unwrap();
        assert_eq!(eig.eigenvalues(), &[1.0, 4.0]);
        // permutation of the identity
        for &q in eig.rotation() {
            assert!(q == 0.0 || q.abs() == 1.0);
        }
    }

    #[test]
    fn eigen_two_by_two_matches_characteristic_roots() {
        // λ² − 4λ + 3 = 0
        let m = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let eig = sym_eigen(&m).unwrap();
        let (a, b, c) = (1.0, -4.0, 3.0);
        let disc: f64 = b * b - 4.0 * a * c;
        let roots = [
            (-b - disc.sqrt()) / (2.0 * a),
            (-b + disc.sqrt()) / (2.0 * a),
        ];
        assert!(max_abs_diff(eig.eigenvalues(), &roots) < 1e-14);
        let rebuilt = eig.spectral_matrix(|l| l);
        assert!(max_abs_diff(rebuilt.as_slice(), m.as_slice()) < 1e-12);
    }

    #[test]
    fn eigen_rejects_non_finite() {
        let m = SymMatrix {
            dim: 2,
            data: vec![1.0, f64::NAN, f64::NAN, 1.0],
        };
        assert!(matches!(sym_eigen(&m), Err(Error::NonFinite(_))));
        assert!(SymMatrix::new(1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn construction_symmetrizes() {
        let m = SymMatrix::new(2, vec![1.0, 2.0, 4.0, 1.0]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.get(1, 0), 3.0);
    }

    #[test]
    fn sqrt_examples() {
        let root = psd_sqrt(&SymMatrix::identity(3)).unwrap();
        assert!(max_abs_diff(root.as_slice(), SymMatrix::identity(3).as_slice()) < 1e-15);

        let root = psd_sqrt(&SymMatrix::diagonal(&[4.0, 9.0]).unwrap()).unwrap();
        assert!(max_abs_diff(root.as_slice(), &[2.0, 0.0, 0.0, 3.0]) < 1e-15);

        let m = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let s = psd_sqrt(&m).unwrap();
        let mut ss = [0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                ss[i * 2 + j] = (0..2).map(|k| s.get(i, k) * s.get(k, j)).sum();
            }
        }
        let err: f64 = ss
            .iter()
            .zip(m.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-10);
    }

    #[test]
    fn sqrt_rejects_indefinite_and_names_eigenvalue() {
        let m = SymMatrix::diagonal(&[1.0, -0.5]).unwrap();
        match psd_sqrt(&m) {
            Err(Error::NotPsd { eigenvalue, .. }) => assert_eq!(eigenvalue, -0.5),
            other => panic!("expected NotPsd, got {other:?}"),
        }
        // roundoff-level negativity is clamped
        let m = SymMatrix::diagonal(&[1.0, -1e-14]).unwrap();
        let s = psd_sqrt(&m).unwrap();
        assert_eq!(s.get(1, 1), 0.0);
    }

    #[test]
    fn pseudo_solve_examples() {
        let (x, ok) = pseudo_solve(&SymMatrix::identity(2), &v(&[3.0, 4.0])).unwrap();
        assert!(ok);
        assert!(max_abs_diff(&x, &[3.0, 4.0]) < 1e-15);

        let m = SymMatrix::diagonal(&[2.0, 0.0]).unwrap();
        let (x, ok) = pseudo_solve(&m, &v(&[1.0, 0.0])).unwrap();
        assert!(ok);
        assert_eq!(x.as_slice(), &[0.5, 0.0]);

        let (_, ok) = pseudo_solve(&m, &v(&[0.0, 1.0])).unwrap();
        assert!(!ok);
    }

    #[test]
    fn quad_form_examples() {
        assert_eq!(
            quad_form(&SymMatrix::identity(2), &v(&[3.0, 4.0])).unwrap(),
            25.0
        );
        assert_eq!(
            quad_form(&SymMatrix::zeros(2), &v(&[3.0, -7.0])).unwrap(),
            0.0
        );
        let m = SymMatrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        assert_eq!(quad_form(&m, &v(&[1.0, 1.0])).unwrap(), 6.0);
        assert!(matches!(
            quad_form(&m, &v(&[1.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn rank_one_examples() {
        let m = rank_one_update(&SymMatrix::zeros(3), &DenseVector::basis(3, 0)).unwrap();
        assert_eq!(m, SymMatrix::diagonal(&[1.0, 0.0, 0.0]).unwrap());

        let m = rank_one_update(&SymMatrix::identity(2), &DenseVector::zeros(2)).unwrap();
        assert_eq!(m, SymMatrix::identity(2));

        let m = rank_one_update(&SymMatrix::zeros(2), &DenseVector::basis(2, 0)).unwrap();
        let m = rank_one_update(&m, &DenseVector::basis(2, 1)).unwrap();
        assert_eq!(m, SymMatrix::identity(2));

        assert!(rank_one_update(&SymMatrix::zeros(2), &DenseVector::zeros(3)).is_err());
    }

    #[test]
    fn rank_counts_significant_eigenvalues() {
        let eig = sym_eigen(&SymMatrix::diagonal(&[0.0, 3.0, 1e-13]).unwrap()).unwrap();
        assert_eq!(eig.rank(1e-10), 1);
        assert_eq!(sym_eigen(&SymMatrix::zeros(2)).unwrap().rank(1e-10), 0);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, 2, &[2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-15);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-15);
        assert!(cholesky_solve(&[1.0, 2.0, 2.0, 1.0], 2, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn vector_rejects_empty_and_nan() {
        assert!(DenseVector::new(vec![]).is_err());
        assert!(DenseVector::new(vec![1.0, f64::NAN]).is_err());
    }
}
