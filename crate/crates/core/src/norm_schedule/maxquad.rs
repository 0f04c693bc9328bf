//! Max-of-quadratics seminorm used by the full-matrix scale-invariant learner:
//!
//! `‖x‖² = xᵀ G x + 2 max_i ⟨f_i, x⟩²`
//!
//! Linear maximization over its unit ball is solved with a log-barrier Newton
//! method, then polished to full precision by Newton's method on the dual over
//! the constraints the barrier found active. Both steps are covariant under
//! invertible linear changes of variables, so transforming features by `M`
//! (and hence `G` by `M G Mᵀ`) maps the computed maximizer to `M⁻ᵀ u` up to
//! roundoff.

use crate::error::{Error, Result};
use crate::linalg::{self, cholesky_solve, DenseVector, SymMatrix};

use super::quadratic::{DualNorm, QuadraticSeminorm};

const GAP_TOLERANCE: f64 = 1e-11;
const BARRIER_GROWTH: f64 = 10.0;
const MAX_OUTER: usize = 80;
const MAX_NEWTON: usize = 100;
const DECREMENT_TOLERANCE: f64 = 1e-14;
const ROUNDOFF_FLOOR: f64 = 8.0 * f64::EPSILON;
const ACTIVE_SLACK: f64 = 1e-6;
const POLISH_TOLERANCE: f64 = 1e-10;
/// Relative eigenvalue cutoff for the whitened dual systems, well above the
/// roundoff left in exact kernels by the whitening.
const POLISH_CUTOFF: f64 = 1e-9;
const MAX_POLISH_STEPS: usize = 50;
const DUAL_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct MaxQuadSeminorm {
    gram: SymMatrix,
    features: Vec<DenseVector>,
}

impl MaxQuadSeminorm {
    pub fn new(dim: usize) -> Self {
        Self {
            gram: SymMatrix::zeros(dim),
            features: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn gram(&self) -> &SymMatrix {
        &self.gram
    }

    pub fn features(&self) -> &[DenseVector] {
        &self.features
    }

    pub(crate) fn push_feature(&mut self, f: &DenseVector) -> Result<()> {
        f.check_dim(self.dim())?;
        self.features.push(f.clone());
        Ok(())
    }

    pub(crate) fn add_gradient(&mut self, g: &DenseVector) -> Result<()> {
        self.gram.add_outer(g)
    }

    pub fn norm_sq(&self, x: &DenseVector) -> f64 {
        let base = linalg::quad_form_slice(&self.gram, x);
        let peak = self
            .features
            .iter()
            .map(|f| {
                let p = f.dot(x);
                p * p
            })
            .fold(0.0, f64::max);
        (base + 2.0 * peak).max(0.0)
    }

    pub fn norm(&self, x: &DenseVector) -> f64 {
        self.norm_sq(x).sqrt()
    }

    /// Upper bound on the squared dual norm:
    /// `gᵀ(G + f₁f₁ᵀ + f_t f_tᵀ)⁺ g`, with `f_t` the newest stored feature.
    pub fn surrogate_dual_sq(&self, g: &DenseVector) -> Result<DualNorm> {
        g.check_dim(self.dim())?;
        let mut m = self.gram.clone();
        if let (Some(first), Some(last)) = (self.features.first(), self.features.last()) {
            m.add_outer(first)?;
            m.add_outer(last)?;
        }
        QuadraticSeminorm::new(m)?.dual_norm_sq(g)
    }

    /// Maximizes `⟨c, u⟩` over `‖u‖ ≤ 1`; returns the value (the dual norm of
    /// `c`) and a maximizer lying on the unit sphere.
    pub fn maximize_linear(&self, c: &DenseVector) -> Result<(f64, DenseVector)> {
        let d = self.dim();
        c.check_dim(d)?;
        if c.is_zero() {
            return Ok((0.0, DenseVector::zeros(d)));
        }

        // Whitened basis of the range shared by all constraint matrices.
        let count = self.features.len().max(1);
        let mut avg = self.gram.clone();
        for f in &self.features {
            avg.add_scaled_outer(2.0 / count as f64, f)?;
        }
        let eig = linalg::sym_eigen(&avg)?;
        let cutoff = linalg::PINV_CUTOFF * eig.lambda_max();
        let kept: Vec<usize> = (0..d)
            .filter(|&k| eig.eigenvalues()[k] > cutoff && eig.eigenvalues()[k] > 0.0)
            .collect();
        let coords = eig.coordinates(c);
        let outside: f64 = (0..d)
            .filter(|k| !kept.contains(k))
            .map(|k| coords[k] * coords[k])
            .sum();
        if kept.is_empty() || outside.sqrt() > linalg::RANGE_TOLERANCE * c.norm2() {
            return Err(Error::OutsideRange);
        }
        let r = kept.len();
        // basis[k] = q_k / √λ_k, stored column-wise as rows of length d
        let basis: Vec<Vec<f64>> = kept
            .iter()
            .map(|&k| {
                let s = 1.0 / eig.eigenvalues()[k].sqrt();
                (0..d).map(|row| eig.q(row, k) * s).collect()
            })
            .collect();
        let reduce = |v: &[f64]| -> Vec<f64> {
            basis
                .iter()
                .map(|b| b.iter().zip(v).map(|(x, y)| x * y).sum())
                .collect()
        };

        let c_r = reduce(c);
        let mut g_r = vec![0.0; r * r];
        for (i, bi) in basis.iter().enumerate() {
            let gb = self.gram.mul_slice(bi);
            for (j, bj) in basis.iter().enumerate() {
                g_r[i * r + j] = gb.iter().zip(bj).map(|(x, y)| x * y).sum();
            }
        }
        for i in 0..r {
            for j in (i + 1)..r {
                let avg = 0.5 * (g_r[i * r + j] + g_r[j * r + i]);
                g_r[i * r + j] = avg;
                g_r[j * r + i] = avg;
            }
        }
        let f_r: Vec<Vec<f64>> = if self.features.is_empty() {
            vec![vec![0.0; r]]
        } else {
            self.features.iter().map(|f| reduce(f)).collect()
        };

        let problem = BarrierProblem {
            dim: r,
            c: &c_r,
            gram: &g_r,
            features: &f_r,
        };
        let rho = c_r.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (z, t) = problem.solve(rho)?;
        let z = problem.polish(&z, t)?.unwrap_or(z);

        let mut u = vec![0.0; d];
        for (zk, b) in z.iter().zip(&basis) {
            for (ui, bi) in u.iter_mut().zip(b) {
                *ui += zk * bi;
            }
        }
        let mut u = DenseVector::new(u)?;
        let reach = self.norm_sq(&u);
        if reach > 0.0 {
            u = u.scaled(1.0 / reach.sqrt());
        }
        Ok((c.dot(&u), u))
    }
}

fn pinv_with(eig: &linalg::EigenDecomposition, b: &[f64]) -> Vec<f64> {
    let cutoff = POLISH_CUTOFF * eig.lambda_max();
    eig.apply_spectral(b, |l| if l > cutoff && l > 0.0 { 1.0 / l } else { 0.0 })
}

/// `max ⟨c,z⟩ s.t. zᵀGz + 2⟨f_i,z⟩² ≤ 1` in whitened coordinates.
struct BarrierProblem<'a> {
    dim: usize,
    c: &'a [f64],
    gram: &'a [f64],
    features: &'a [Vec<f64>],
}

struct Evaluation {
    gz: Vec<f64>,
    projections: Vec<f64>,
    slack: Vec<f64>,
}

impl BarrierProblem<'_> {
    fn evaluate(&self, z: &[f64]) -> Option<Evaluation> {
        let n = self.dim;
        let gz: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| self.gram[i * n + j] * z[j]).sum())
            .collect();
        let gamma: f64 = gz.iter().zip(z).map(|(a, b)| a * b).sum();
        let projections: Vec<f64> = self
            .features
            .iter()
            .map(|f| f.iter().zip(z).map(|(a, b)| a * b).sum())
            .collect();
        let mut slack = Vec::with_capacity(projections.len());
        for &p in &projections {
            let s = 1.0 - gamma - 2.0 * p * p;
            if !(s > 0.0) {
                return None;
            }
            slack.push(s);
        }
        Some(Evaluation {
            gz,
            projections,
            slack,
        })
    }

    fn norm_sq(&self, z: &[f64]) -> f64 {
        let n = self.dim;
        let gamma: f64 = (0..n)
            .map(|i| z[i] * (0..n).map(|j| self.gram[i * n + j] * z[j]).sum::<f64>())
            .sum();
        let peak = self
            .features
            .iter()
            .map(|f| {
                let p: f64 = f.iter().zip(z).map(|(a, b)| a * b).sum();
                p * p
            })
            .fold(0.0, f64::max);
        gamma + 2.0 * peak
    }

    /// `G + 2 Σ_k w_k f_k f_kᵀ` over the given `(index, weight)` pairs.
    fn combined(&self, weights: &[(usize, f64)]) -> Result<SymMatrix> {
        let n = self.dim;
        let mut m = self.gram.to_vec();
        for &(k, w) in weights {
            let f = &self.features[k];
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] += 2.0 * w * f[i] * f[j];
                }
            }
        }
        SymMatrix::new(n, m)
    }

    /// Maximizer of `⟨c,z⟩` over the ellipsoid `zᵀAz ≤ 1`, rescaled onto the
    /// unit sphere of the full seminorm, together with `zᵀAz` after rescaling.
    fn ellipsoid_point(&self, a: &SymMatrix) -> Result<Option<(Vec<f64>, f64)>> {
        let eig = linalg::sym_eigen(a)?;
        let z = pinv_with(&eig, self.c);
        let az = a.mul_slice(&z);
        let residual: f64 = az
            .iter()
            .zip(self.c)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let c_norm = self.c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residual > linalg::RANGE_TOLERANCE * c_norm {
            return Ok(None);
        }
        let reach = self.norm_sq(&z);
        if !(reach > 0.0) {
            return Ok(None);
        }
        let scale = 1.0 / reach.sqrt();
        let relaxed = az.iter().zip(&z).map(|(x, y)| x * y).sum::<f64>() * scale * scale;
        Ok(Some((z.iter().map(|v| v * scale).collect(), relaxed)))
    }

    fn projection(&self, k: usize, z: &[f64]) -> f64 {
        self.features[k].iter().zip(z).map(|(a, b)| a * b).sum()
    }

    /// Replaces the barrier iterate by the exact maximizer recovered from the
    /// dual over the nearly active constraints `K`:
    ///
    /// `min_{λ ∈ Δ_K} φ(λ) = cᵀ(G + 2 Σ_k λ_k f_k f_kᵀ)⁺ c`
    ///
    /// which is convex with `∂_k φ = −2⟨f_k,z⟩²` for `z = A(λ)⁺c`. The point
    /// `z/√φ` is optimal once no constraint outside the relaxation binds harder.
    fn polish(&self, z: &[f64], t: f64) -> Result<Option<Vec<f64>>> {
        let Some(eval) = self.evaluate(z) else {
            return Ok(None);
        };
        let mut active: Vec<usize> = (0..eval.slack.len())
            .filter(|&k| eval.slack[k] <= ACTIVE_SLACK)
            .collect();
        if active.is_empty() {
            return Ok(None);
        }
        // barrier multipliers are proportional to 1/(t s_k)
        let mut lambda: Vec<f64> = active.iter().map(|&k| 1.0 / (t * eval.slack[k])).collect();
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= total);

        let mut last_spread = f64::INFINITY;
        for _ in 0..MAX_POLISH_STEPS {
            let weights: Vec<(usize, f64)> =
                active.iter().copied().zip(lambda.iter().copied()).collect();
            let a = self.combined(&weights)?;
            let eig = linalg::sym_eigen(&a)?;
            let point = pinv_with(&eig, self.c);
            let value: f64 = point.iter().zip(self.c).map(|(x, y)| x * y).sum();
            let m = active.len();
            if m == 1 {
                break;
            }
            let p: Vec<f64> = active.iter().map(|&k| self.projection(k, &point)).collect();
            let solved: Vec<Vec<f64>> = active
                .iter()
                .map(|&k| pinv_with(&eig, &self.features[k]))
                .collect();
            let grad: Vec<f64> = p.iter().map(|pk| -2.0 * pk * pk).collect();
            let hess = |k: usize, l: usize| {
                let fkl: f64 = self.features[active[k]]
                    .iter()
                    .zip(&solved[l])
                    .map(|(x, y)| x * y)
                    .sum();
                8.0 * p[k] * p[l] * fkl
            };
            // Newton step within Σλ = 1, parametrized by λ_k − λ_last
            let q = m - 1;
            let mut reduced = vec![0.0; q * q];
            for i in 0..q {
                for j in 0..q {
                    reduced[i * q + j] = hess(i, j) - hess(i, q) - hess(q, j) + hess(q, q);
                }
            }
            let rhs: Vec<f64> = (0..q).map(|i| -(grad[i] - grad[q])).collect();
            let u = match cholesky_solve(&reduced, q, &rhs) {
                Some(u) => u,
                None => linalg::sym_eigen(&SymMatrix::new(q, reduced)?)?.pinv_apply(&rhs),
            };
            let mut step: Vec<f64> = u.clone();
            step.push(-u.iter().sum::<f64>());
            let decrement: f64 = -grad.iter().zip(&step).map(|(g, d)| g * d).sum::<f64>();
            let (low, high) = grad
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &g| {
                    (a.min(g), b.max(g))
                });
            let spread = high - low;
            // stop at convergence or once roundoff keeps the spread from shrinking
            if !(decrement > 0.0)
                || spread <= DUAL_TOLERANCE * low.abs()
                || spread > 0.9 * last_spread
            {
                break;
            }
            last_spread = spread;
            // largest step keeping λ ≥ 0; a multiplier reaching zero leaves K
            let mut reach = 1.0;
            let mut leaving = None;
            for (k, (&l, &d)) in lambda.iter().zip(&step).enumerate() {
                if d < 0.0 && l + reach * d <= 0.0 {
                    reach = -l / d;
                    leaving = Some(k);
                }
            }
            let mut scale = reach;
            // below the roundoff of φ the line search is blind; take pure
            // Newton steps and rely on the shrinking spread instead
            let mut accepted = decrement <= ROUNDOFF_FLOOR * value.abs();
            if accepted {
                lambda = lambda
                    .iter()
                    .zip(&step)
                    .map(|(l, d)| (l + scale * d).max(0.0))
                    .collect();
            }
            while !accepted && scale > 1e-12 {
                let trial: Vec<f64> = lambda
                    .iter()
                    .zip(&step)
                    .map(|(l, d)| (l + scale * d).max(0.0))
                    .collect();
                let weights: Vec<(usize, f64)> =
                    active.iter().copied().zip(trial.iter().copied()).collect();
                let tz = pinv_with(&linalg::sym_eigen(&self.combined(&weights)?)?, self.c);
                let tv: f64 = tz.iter().zip(self.c).map(|(x, y)| x * y).sum();
                if tv <= value - 0.25 * scale * decrement + ROUNDOFF_FLOOR * value.abs() {
                    lambda = trial;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                break;
            }
            if scale == reach {
                if let Some(k) = leaving {
                    active.remove(k);
                    lambda.remove(k);
                }
            }
        }

        let weights: Vec<(usize, f64)> =
            active.iter().copied().zip(lambda.iter().copied()).collect();
        match self.ellipsoid_point(&self.combined(&weights)?)? {
            Some((point, relaxed)) if relaxed >= 1.0 - POLISH_TOLERANCE => Ok(Some(point)),
            _ => Ok(None),
        }
    }

    fn objective(&self, t: f64, z: &[f64], eval: &Evaluation) -> f64 {
        let linear: f64 = self.c.iter().zip(z).map(|(a, b)| a * b).sum();
        -t * linear - eval.slack.iter().map(|s| s.ln()).sum::<f64>()
    }

    /// Returns the last centered iterate and its barrier weight `t`.
    fn solve(&self, rho: f64) -> Result<(Vec<f64>, f64)> {
        let constraints = self.features.len() as f64;
        // ρ bounds the optimum from above and ρ/√m from below.
        let target_gap = GAP_TOLERANCE * rho / constraints.sqrt();
        let mut t = constraints / rho;
        let mut z = vec![0.0; self.dim];
        for _ in 0..MAX_OUTER {
            self.center(t, &mut z)?;
            if constraints / t <= target_gap {
                return Ok((z, t));
            }
            t *= BARRIER_GROWTH;
        }
        Err(Error::NoConvergence {
            routine: "max-quadratic barrier solver",
            iterations: MAX_OUTER,
        })
    }

    fn center(&self, t: f64, z: &mut Vec<f64>) -> Result<()> {
        let n = self.dim;
        for _ in 0..MAX_NEWTON {
            let eval = self
                .evaluate(z)
                .ok_or(Error::NonFinite("barrier iterate"))?;
            let h: Vec<f64> = eval.gz.iter().map(|v| 2.0 * v).collect();
            let mut w1 = 0.0;
            let mut w2 = 0.0;
            let mut grad: Vec<f64> = self.c.iter().map(|ci| -t * ci).collect();
            let mut cross = vec![0.0; n];
            let mut hess = vec![0.0; n * n];
            for ((f, &p), &s) in self.features.iter().zip(&eval.projections).zip(&eval.slack) {
                let w = 1.0 / s;
                w1 += w;
                w2 += w * w;
                let lin = 4.0 * w * p;
                let weight = 4.0 * w + 16.0 * w * w * p * p;
                for i in 0..n {
                    grad[i] += lin * f[i];
                    cross[i] += w * w * p * f[i];
                    if f[i] == 0.0 {
                        continue;
                    }
                    let wf = weight * f[i];
                    for j in 0..n {
                        hess[i * n + j] += wf * f[j];
                    }
                }
            }
            for i in 0..n {
                grad[i] += w1 * h[i];
                for j in 0..n {
                    hess[i * n + j] += 2.0 * w1 * self.gram[i * n + j]
                        + w2 * h[i] * h[j]
                        + 4.0 * (h[i] * cross[j] + cross[i] * h[j]);
                }
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let step = match cholesky_solve(&hess, n, &rhs) {
                Some(step) => step,
                None => {
                    let m = SymMatrix::new(n, hess)?;
                    let eig = linalg::sym_eigen(&m)?;
                    eig.pinv_apply(&rhs)
                }
            };
            let decrement: f64 = -grad.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            if !(decrement > 2.0 * DECREMENT_TOLERANCE) {
                return Ok(());
            }

            let current = self.objective(t, z, &eval);
            let mut scale = 1.0;
            let mut progress = None;
            while scale > 1e-14 {
                let trial: Vec<f64> = z.iter().zip(&step).map(|(a, b)| a + scale * b).collect();
                if let Some(trial_eval) = self.evaluate(&trial) {
                    let value = self.objective(t, &trial, &trial_eval);
                    if value <= current - 0.25 * scale * decrement {
                        *z = trial;
                        progress = Some(current - value);
                        break;
                    }
                }
                scale *= 0.5;
            }
            // stop once the decrease is lost in the roundoff of the objective
            match progress {
                Some(gain) if gain > ROUNDOFF_FLOOR * current.abs().max(1.0) => {}
                _ => return Ok(()),
            }
        }
        Ok(())
    }
}
