//! Synthetic loss streams.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;

/// Label noise of the supervised generator.
pub const LABEL_FLIP_PROBABILITY: f64 = 0.1;
/// Norm of the drift in the Gaussian generator.
pub const GAUSSIAN_DRIFT: f64 = 0.2;

/// Gradients fixed in advance, independent of the learner.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearStream {
    pub dim: usize,
    pub gradients: Vec<DenseVector>,
    pub comparator: DenseVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    Absolute,
    Hinge,
    Logistic,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Absolute => "absolute",
            LossKind::Hinge => "hinge",
            LossKind::Logistic => "logistic",
        }
    }

    /// A subgradient of the loss at margin `z` for label `y ∈ {−1, 1}`; always
    /// in `[−1, 1]`.
    pub fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            // |z − y|, zero at the kink
            LossKind::Absolute => {
                if z > y {
                    1.0
                } else if z < y {
                    -1.0
                } else {
                    0.0
                }
            }
            // max(0, 1 − yz), zero at the kink
            LossKind::Hinge => {
                if y * z < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
            // log(1 + exp(−yz))
            LossKind::Logistic => {
                let sigmoid = if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                };
                sigmoid - 0.5 * (y + 1.0)
            }
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(LossKind::Absolute),
            "hinge" => Ok(LossKind::Hinge),
            "logistic" => Ok(LossKind::Logistic),
            _ => Err(Error::Config(format!("unknown loss `{s}`"))),
        }
    }
}

/// Invertible feature transformation `f ↦ R f`.
#[derive(Clone, Debug, PartialEq)]
pub enum Rescale {
    Diagonal(Vec<f64>),
    /// Row-major `d × d`.
    Full(Vec<f64>),
    /// Seeded diagonal with log-uniform factors in `[1e−3, 1e3]`.
    RandomDiagonal(u64),
    /// Seeded `U diag(s) Vᵀ` with orthogonal `U, V` and `s ∈ [1, 100]`.
    RandomFull(u64),
}

impl FromStr for Rescale {
    type Err = Error;

    /// `diag:<r_1>,…,<r_d>`, `full:<row-major entries>`, `diag_random:<seed>`
    /// or `full_random:<seed>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Config(format!("invalid rescale `{s}`: {what}"));
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected kind:values"))?;
        let numbers = || -> Result<Vec<f64>> {
            rest.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad("expected numbers")))
                .collect()
        };
        let seed = || {
            rest.trim()
                .parse::<u64>()
                .map_err(|_| bad("expected an integer seed"))
        };
        match kind.trim() {
            "diag" => Ok(Rescale::Diagonal(numbers()?)),
            "full" => Ok(Rescale::Full(numbers()?)),
            "diag_random" => Ok(Rescale::RandomDiagonal(seed()?)),
            "full_random" => Ok(Rescale::RandomFull(seed()?)),
            _ => Err(bad("unknown kind")),
        }
    }
}

impl fmt::Display for Rescale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Rescale::Diagonal(v) => write!(f, "diag:{}", join(v)),
            Rescale::Full(v) => write!(f, "full:{}", join(v)),
            Rescale::RandomDiagonal(s) => write!(f, "diag_random:{s}"),
            Rescale::RandomFull(s) => write!(f, "full_random:{s}"),
        }
    }
}

impl Rescale {
    /// Dense row-major matrix of the transformation in dimension `d`.
    pub fn matrix(&self, d: usize) -> Result<Vec<f64>> {
        let diagonal = |v: &[f64]| {
            let mut m = vec![0.0; d * d];
            for (i, x) in v.iter().enumerate() {
                m[i * d + i] = *x;
            }
            m
        };
        let m = match self {
            Rescale::Diagonal(v) => {
                if v.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: v.len(),
                    });
                }
                diagonal(v)
            }
            Rescale::Full(v) => {
                if v.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: d * d,
                        found: v.len(),
                    });
                }
                v.clone()
            }
            Rescale::RandomDiagonal(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let v: Vec<f64> = (0..d)
                    .map(|_| 10f64.powf(rng.random_range(-3.0..=3.0)))
                    .collect();
                diagonal(&v)
            }
            Rescale::RandomFull(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let u = random_orthonormal(d, &mut rng);
                let v = random_orthonormal(d, &mut rng);
                let s: Vec<f64> = (0..d)
                    .map(|_| 10f64.powf(rng.random_range(0.0..=2.0)))
                    .collect();
                let mut m = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..d {
                        m[i * d + j] = (0..d).map(|k| u[k][i] * s[k] * v[k][j]).sum();
                    }
                }
                m
            }
        };
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("rescale matrix"));
        }
        Ok(m)
    }
}

/// Feature/label stream for losses `c_t(⟨f_t, w⟩)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupervisedStream {
    pub dim: usize,
    pub loss: LossKind,
    pub features: Vec<DenseVector>,
    pub labels: Vec<f64>,
    pub comparator: DenseVector,
}

impl SupervisedStream {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn derivative(&self, t: usize, margin: f64) -> f64 {
        self.loss.derivative(margin, self.labels[t])
    }

    /// The same stream with features `R f_t` and comparator `R⁻ᵀ ẘ`, so that
    /// every comparator margin is unchanged.
    pub fn rescaled(&self, rescale: &Rescale) -> Result<Self> {
        let d = self.dim;
        let r = rescale.matrix(d)?;
        let apply = |f: &DenseVector| -> Result<DenseVector> {
            DenseVector::new(
                (0..d)
                    .map(|i| (0..d).map(|j| r[i * d + j] * f[j]).sum())
                    .collect(),
            )
        };
        let mut transposed = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                transposed[i * d + j] = r[j * d + i];
            }
        }
        let comparator = solve_dense(&transposed, d, &self.comparator)
            .ok_or_else(|| Error::InvalidParameter("rescale matrix is singular".into()))?;
        Ok(Self {
            dim: d,
            loss: self.loss,
            features: self.features.iter().map(apply).collect::<Result<_>>()?,
            labels: self.labels.clone(),
            comparator: DenseVector::new(comparator)?,
        })
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::Config("dimension d must be at least 1".into()));
    }
    Ok(())
}

fn gaussian_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn clip_to_unit_ball(mut v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 1.0 {
        for x in &mut v {
            *x /= n;
        }
        // rounding can leave the norm a hair above one
        while v.iter().map(|x| x * x).sum::<f64>() > 1.0 {
            for x in &mut v {
                *x *= 1.0 - f64::EPSILON;
            }
        }
    }
    v
}

/// Orthonormal vectors `q_0, …, q_{d−1}` from modified Gram–Schmidt (applied
/// twice) on Gaussian samples.
pub fn random_orthonormal(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = gaussian_vector(d, rng);
        for _ in 0..2 {
            for q in &basis {
                let p: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= p * y;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Length of the cycling stream, `2d + 2k√d`.
pub fn cycling_length(d: usize, k: usize) -> usize {
    2 * d + 2 * k * integer_sqrt(d)
}

fn integer_sqrt(d: usize) -> usize {
    let mut r = (d as f64).sqrt() as usize;
    while r * r > d {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= d {
        r += 1;
    }
    r
}

/// Adversary that cycles with alternating signs through the first `√d` basis
/// vectors while keeping a constant `1/√d` component along the last one.
///
/// The basis is standard unless `rotation_seed` is given, in which case a
/// seeded random orthonormal basis is used.
pub fn cycling_adversary(d: usize, k: usize, rotation_seed: Option<u64>) -> Result<LinearStream> {
    let root = integer_sqrt(d);
    if d < 4 || root * root != d {
        return Err(Error::Config(format!(
            "cycling adversary needs d a perfect square of at least 4, got {d}"
        )));
    }
    if k == 0 {
        return Err(Error::Config("cycling adversary needs k ≥ 1".into()));
    }
    let basis: Vec<Vec<f64>> = match rotation_seed {
        Some(seed) => random_orthonormal(d, &mut ChaCha8Rng::seed_from_u64(seed)),
        None => (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect(),
    };
    let combine = |terms: &[(usize, f64)]| -> Result<DenseVector> {
        let mut g = vec![0.0; d];
        for &(i, c) in terms {
            for (x, b) in g.iter_mut().zip(&basis[i]) {
                *x += c * b;
            }
        }
        DenseVector::new(g)
    };

    let along = 1.0 / (d as f64).sqrt();
    let across = (1.0 - 1.0 / d as f64).sqrt();
    let total = cycling_length(d, k);
    let mut gradients = Vec::with_capacity(total);
    for t in 0..d {
        gradients.push(combine(&[(t, 1.0)])?);
    }
    for t in 0..d {
        gradients.push(combine(&[(t, -1.0)])?);
    }
    for tau in 0..(total - 2 * d) {
        let i = tau % root;
        let j = tau / root;
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        gradients.push(combine(&[(d - 1, along), (i, sign * across)])?);
    }
    Ok(LinearStream {
        dim: d,
        gradients,
        comparator: combine(&[(d - 1, -1.0)])?,
    })
}

/// I.i.d. gradients `clip(m + ξ/√d)` with a seeded drift `‖m‖ = 0.2`; the
/// comparator is `−m/‖m‖`.
pub fn gaussian(d: usize, rounds: usize, seed: u64) -> Result<LinearStream> {
    check_dim(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direction = loop {
        let v = gaussian_vector(d, &mut rng);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            break v.into_iter().map(|x| x / n).collect::<Vec<_>>();
        }
    };
    let scale = 1.0 / (d as f64).sqrt();
    let gradients = (0..rounds)
        .map(|_| {
            let noise = gaussian_vector(d, &mut rng);
            let g = direction
                .iter()
                .zip(noise)
                .map(|(m, xi)| GAUSSIAN_DRIFT * m + scale * xi)
                .collect();
            DenseVector::new(clip_to_unit_ball(g))
        })
        .collect::<Result<_>>()?;
    Ok(LinearStream {
        dim: d,
        gradients,
        comparator: DenseVector::new(direction.iter().map(|m| -m).collect())?,
    })
}

/// Features `f ~ N(0, I/d)` clipped to the unit ball, labels from a hidden
/// unit-norm model `w*` with sign noise. The comparator is `w*`, transformed
/// alongside the features when `rescale` is given.
pub fn supervised(
    d: usize,
    rounds: usize,
    seed: u64,
    loss: LossKind,
    rescale: Option<&Rescale>,
) -> Result<SupervisedStream> {
    check_dim(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = loop {
        let v = gaussian_vector(d, &mut rng);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            break v.into_iter().map(|x| x / n).collect::<Vec<_>>();
        }
    };
    let scale = 1.0 / (d as f64).sqrt();
    let mut features = Vec::with_capacity(rounds);
    let mut labels = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let f = clip_to_unit_ball(
            gaussian_vector(d, &mut rng)
                .into_iter()
                .map(|x| x * scale)
                .collect(),
        );
        let margin: f64 = f.iter().zip(&hidden).map(|(a, b)| a * b).sum();
        let mut y = if margin >= 0.0 { 1.0 } else { -1.0 };
        if rng.random::<f64>() < LABEL_FLIP_PROBABILITY {
            y = -y;
        }
        features.push(DenseVector::new(f)?);
        labels.push(y);
    }
    let base = SupervisedStream {
        dim: d,
        loss,
        features,
        labels,
        comparator: DenseVector::new(hidden)?,
    };
    match rescale {
        Some(r) => base.rescaled(r),
        None => Ok(base),
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_dense(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if !(m[pivot * n + col].abs() > 1e-14 * scale) {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            x.swap(pivot, col);
        }
        for row in (col + 1)..n {
            let factor = m[row * n + col] / m[col * n + col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let tail: f64 = ((col + 1)..n).map(|k| m[col * n + k] * x[k]).sum();
        x[col] = (x[col] - tail) / m[col * n + col];
    }
    Some(x)
}
