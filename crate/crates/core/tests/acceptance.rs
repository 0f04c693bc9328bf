//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::error::Error;
use std::f64::consts::E;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use varinorm::baselines;
use varinorm::coin_betting::{self, CoinBetting};
use varinorm::experiments::{self, generators, ExperimentConfig};
use varinorm::ftrl::FtrlState;
use varinorm::linalg::{self, DenseVector, SymMatrix};
use varinorm::norm_schedule::{NormSchedule, NormView, QuadraticSeminorm, ScheduleKind};
use varinorm::reduction::{mahalanobis_project, Domain, LearnerConfig, VaryingNormLearner};
use varinorm::OnlineLearner;

type Check = Result<String, Box<dyn Error>>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! fail {
    ($($arg:tt)*) => {
        return Err(format!($($arg)*).into())
    };
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<f64, Box<dyn Error>> {
    let elapsed = start.elapsed();
    if elapsed > limit {
        fail!(
            "{what} took {:.2}s, limit {}s",
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    Ok(elapsed.as_secs_f64())
}

fn normal_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit_vector(d: usize, rng: &mut ChaCha8Rng) -> DenseVector {
    loop {
        let v = normal_vector(d, rng);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return DenseVector::new(v.into_iter().map(|x| x / n).collect()).unwrap();
        }
    }
}

/// Symmetric `d × d` matrix from a row-major buffer, mirrored from the upper
/// triangle so that it is exactly symmetric.
fn symmetric(d: usize, mut data: Vec<f64>) -> SymMatrix {
    for i in 0..d {
        for j in 0..i {
            data[i * d + j] = data[j * d + i];
        }
    }
    SymMatrix::new(d, data).unwrap()
}

/// `Q diag(values) Qᵀ` with a random orthogonal `Q`.
fn with_spectrum(values: &[f64], rng: &mut ChaCha8Rng) -> SymMatrix {
    let d = values.len();
    let q = generators::random_orthonormal(d, rng);
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            data[i * d + j] = (0..d).map(|k| q[k][i] * values[k] * q[k][j]).sum();
        }
    }
    symmetric(d, data)
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

fn mat_vec(m: &SymMatrix, x: &[f64]) -> Vec<f64> {
    let d = m.dim();
    (0..d)
        .map(|i| (0..d).map(|j| m.get(i, j) * x[j]).sum())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coin-betting regret against a comparator grid.
fn criterion_coin_betting() -> Check {
    let start = Instant::now();
    let grid: Vec<f64> = (-100..=100).map(|i| f64::from(i) / 10.0).collect();
    let mut pairs = 0usize;
    let mut violations = 0usize;
    let mut tightest = f64::INFINITY;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bias = (seed % 5) as f64 * 0.25 - 0.5;
        let mut cb = CoinBetting::new(1.0)?;
        let (mut loss, mut sum_g, mut sum_sq) = (0.0, 0.0, 0.0);
        for _ in 0..1000 {
            let g = bias + (1.0 - bias.abs()) * rng.random_range(-1.0..=1.0);
            loss += g * cb.predict();
            sum_g += g;
            sum_sq += g * g;
            cb.update(g)?;
        }
        for &u in &grid {
            let regret = loss - sum_g * u;
            let bound = coin_betting::regret_bound(u, sum_sq, 1.0);
            tightest = tightest.min(bound - regret);
            pairs += 1;
            if regret > bound {
                violations += 1;
            }
        }
    }
    let secs = within(start, Duration::from_secs(10), "coin betting")?;
    if violations > 0 {
        fail!("{violations}/{pairs} pairs exceed the bound (min slack {tightest:e})");
    }
    Ok(format!(
        "{pairs} pairs, min slack {tightest:.4}, {secs:.2}s"
    ))
}

struct LemmaRun {
    norm_excess: f64,
    min_slack: f64,
    comparators: usize,
}

fn lemma_stream(kind: ScheduleKind, seed: u64) -> Result<LemmaRun, Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dim, rounds) = match kind {
        ScheduleKind::DiagScale => (1, 150),
        ScheduleKind::MaxQuadScale => (3, 60),
        _ => (4, 150),
    };
    let features: Vec<DenseVector> = (0..=rounds)
        .map(|_| unit_vector(dim, &mut rng).scaled(10f64.powf(rng.random_range(-2.0..=2.0))))
        .collect();
    let mut schedule = NormSchedule::new(kind, dim)?;
    if kind.needs_features() {
        schedule.prime(&features[0])?;
    }
    let mut ftrl = FtrlState::new(dim, schedule.sigma())?;
    let sigma = schedule.sigma();
    let mut last = schedule.clone();
    let mut loss = 0.0;
    let mut theta = DenseVector::zeros(dim);
    let mut duals = Vec::with_capacity(rounds);
    let mut norm_excess = f64::NEG_INFINITY;
    for t in 0..rounds {
        let x = ftrl.step(&schedule)?;
        norm_excess = norm_excess.max(schedule.norm(&x) - 1.0);
        let base = if kind.needs_features() {
            features[t].clone()
        } else {
            unit_vector(dim, &mut rng)
        };
        let base_dual = schedule.dual_norm_sq(&base)?;
        if !base_dual.finite {
            fail!(
                "{kind}: feature outside the range of the norm at round {}",
                t + 1
            );
        }
        let magnitude = rng.random_range(0.0..=1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let g = if base_dual.value > 0.0 {
            base.scaled(magnitude / base_dual.value.sqrt())
        } else {
            DenseVector::zeros(dim)
        };
        let dual = schedule.dual_norm_sq(&g)?.value;
        loss += g.dot(&x);
        theta.axpy(1.0, &g);
        duals.push(dual);
        ftrl.observe(&g, dual.min(1.0))?;
        last = schedule.clone();
        let next = kind.needs_features().then(|| &features[t + 1]);
        schedule.advance(&g, next)?;
    }
    let total: f64 = duals.iter().sum();
    let before_last = total - duals.last().copied().unwrap_or(0.0);

    let mut comparators: Vec<DenseVector> = Vec::new();
    if !theta.is_zero() {
        match last.view() {
            NormView::Quadratic(q) => {
                let (solved, _) = q.pseudo_solve(&theta)?;
                let dual = theta.dot(&solved);
                if dual > 0.0 {
                    comparators.push(solved.scaled(-1.0 / dual.sqrt()));
                }
            }
            NormView::MaxQuad(m) => {
                comparators.push(m.maximize_linear(&theta.scaled(-1.0))?.1);
            }
        }
    }
    for j in 0..20 {
        let u = unit_vector(dim, &mut rng);
        let n = last.norm(&u);
        if n > 0.0 {
            let radius = if j % 2 == 0 {
                1.0
            } else {
                rng.random_range(0.0..=1.0)
            };
            comparators.push(u.scaled(radius / n));
        }
    }
    let mut min_slack = f64::INFINITY;
    for w in &comparators {
        let n = last.norm(w);
        let lhs = loss - theta.dot(w);
        let rhs = (n * n * (1.0 + before_last).sqrt() + total.sqrt()) / sigma.sqrt() + 1e-6;
        min_slack = min_slack.min(rhs - lhs);
    }
    Ok(LemmaRun {
        norm_excess,
        min_slack,
        comparators: comparators.len(),
    })
}

/// Feasibility of the FTRL iterates and the constrained-FTRL regret inequality.
fn criterion_ftrl_lemma() -> Check {
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for kind in ScheduleKind::ALL {
        let mut excess = f64::NEG_INFINITY;
        let mut slack = f64::INFINITY;
        let mut count = 0;
        for seed in 0..50 {
            let run = lemma_stream(kind, 1000 + seed)?;
            excess = excess.max(run.norm_excess);
            slack = slack.min(run.min_slack);
            count += run.comparators;
        }
        if excess > 1e-9 || slack < 0.0 {
            failures.push(format!(
                "{kind}: norm excess {excess:e}, min slack {slack:e}"
            ));
        }
        lines.push(format!("{kind} slack {slack:.3e} ({count} comparators)"));
    }
    if !failures.is_empty() {
        fail!("{}", failures.join("; "));
    }
    Ok(lines.join(", "))
}

/// Constant-bearing regret envelope of the constrained learner, using the
/// larger of the two inner-log constants.
fn envelope(norm: f64, sum_sq: f64, sum_sq_before_last: f64, epsilon: f64, sigma: f64) -> f64 {
    let inner = (6.0 + 11.0 * sum_sq).max(7.0 + 4.0 * sum_sq);
    let log = (E + norm * inner / epsilon).ln();
    let first = ((3.0 + 3.0 * sum_sq) * log).sqrt();
    epsilon
        + 2.0 * norm * first.max(2.0 * log)
        + 2.0 * norm / sigma.sqrt() * (1.0 + sum_sq_before_last).sqrt()
}

fn criterion_envelope() -> Check {
    let (dim, rounds) = (5, 400);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    let mut tightest = f64::INFINITY;
    for kind in [
        ScheduleKind::Static,
        ScheduleKind::FullMatrix,
        ScheduleKind::AdagradRoot,
    ] {
        for domain in [Domain::WholeSpace, Domain::l2_ball(1.0)?] {
            for seed in 0..10u64 {
                let stream = generators::gaussian(dim, rounds, 2000 + seed)?;
                let config = LearnerConfig::default();
                let mut learner =
                    VaryingNormLearner::new(NormSchedule::new(kind, dim)?, domain, config)?;
                let mut loss = 0.0;
                let mut theta = DenseVector::zeros(dim);
                let mut sum_sq = 0.0;
                let mut last_dual = 0.0;
                let mut last = learner.schedule().clone();
                for g in &stream.gradients {
                    let w = learner.predict()?;
                    if !domain.contains(&w) {
                        fail!("{kind} on {domain}: prediction outside the domain");
                    }
                    last = learner.schedule().clone();
                    learner.update(g)?;
                    let report = learner.last_round().expect("round completed");
                    last_dual = report.dual_sq;
                    sum_sq += last_dual;
                    loss += g.dot(&w);
                    theta.axpy(1.0, g);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let radii: &[f64] = if domain.is_whole_space() {
                    &[0.0, 0.5, 1.0, 4.0, 16.0]
                } else {
                    &[0.0, 0.25, 0.5, 1.0]
                };
                let mut directions = vec![stream.comparator.clone()];
                directions.extend((0..5).map(|_| unit_vector(dim, &mut rng)));
                for u in &directions {
                    for &r in radii {
                        let w = u.scaled(r);
                        let regret = loss - theta.dot(&w);
                        let bound = envelope(
                            last.norm(&w),
                            sum_sq,
                            sum_sq - last_dual,
                            config.epsilon,
                            learner.ftrl().sigma(),
                        );
                        tightest = tightest.min(bound - regret);
                        checked += 1;
                        if regret > bound {
                            failures.push(format!(
                                "{kind}/{domain}/seed {seed}: regret {regret:.4} > {bound:.4}"
                            ));
                        }
                    }
                }
            }
        }
    }
    if !failures.is_empty() {
        fail!(
            "{} of {checked} exceed: {}",
            failures.len(),
            failures.join("; ")
        );
    }
    Ok(format!(
        "{checked} comparator checks, min slack {tightest:.4}"
    ))
}

fn criterion_potentials() -> Check {
    let start = Instant::now();
    let mut worst_log = 0.0f64;
    let mut worst_root = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let d = rng.random_range(1..=20usize);
        let rounds = rng.random_range(1..=2000usize);
        // a third of the streams live in a random lower-dimensional subspace
        let span = if seed % 3 == 0 {
            rng.random_range(1..=d)
        } else {
            d
        };
        let basis = generators::random_orthonormal(d, &mut rng);
        let mut gram = SymMatrix::zeros(d);
        let (mut log_sum, mut root_sum) = (0.0, 0.0);
        for _ in 0..rounds {
            let coefficients = unit_vector(span, &mut rng);
            let length = rng.random_range(0.0..=1.0);
            let mut g = vec![0.0; d];
            for (c, b) in coefficients.iter().zip(&basis) {
                for (x, y) in g.iter_mut().zip(b) {
                    *x += length * c * y;
                }
            }
            let g = DenseVector::new(g)?;
            gram.add_outer(&g)?;
            let eig = linalg::sym_eigen(&gram)?;
            let cutoff = linalg::PINV_CUTOFF * eig.lambda_max();
            let inv = eig.apply_spectral(&g, |l| 1.0 / (1.0 + l.max(0.0)));
            let root = eig.apply_spectral(&g, |l| if l > cutoff { l.powf(-0.5) } else { 0.0 });
            log_sum += dot(&g, &inv);
            root_sum += dot(&g, &root);
        }
        let report = baselines::bound_report_from_gram(&gram, &DenseVector::zeros(d))?;
        let log_bound = report.rank as f64 * ((rounds + 1) as f64).ln();
        let root_bound = 2.0 * report.trace_root;
        if log_sum > log_bound * (1.0 + 1e-8) {
            fail!("stream {seed} (d={d}, T={rounds}): {log_sum} > rank·log(T+1) = {log_bound}");
        }
        if root_sum > root_bound * (1.0 + 1e-8) {
            fail!("stream {seed} (d={d}, T={rounds}): {root_sum} > 2 tr G^1/2 = {root_bound}");
        }
        worst_log = worst_log.max(log_sum / log_bound);
        worst_root = worst_root.max(root_sum / root_bound);
    }
    let secs = within(start, Duration::from_secs(60), "potential sums")?;
    Ok(format!(
        "100 streams, max ratios {worst_log:.4} and {worst_root:.4}, {secs:.2}s"
    ))
}

const CYCLING_EQ1: f64 = 34.351128074635334;
const CYCLING_EQ3: f64 = 34.351128074635334;

fn cycling_eq4() -> f64 {
    let along = 11.8f64.sqrt();
    (along * (10.0 * 99.02f64.sqrt() + 89.0 * 2f64.sqrt() + along)).sqrt()
}

fn criterion_cycling() -> Check {
    let stream = generators::cycling_adversary(100, 49, None)?;
    if stream.gradients.len() != 1180 {
        fail!(
            "stream has {} rounds, expected 1180",
            stream.gradients.len()
        );
    }
    let report = baselines::bound_report(&stream.gradients, &stream.comparator)?;
    let eq4 = cycling_eq4();
    for (name, got, want) in [
        ("l2", report.l2_bound, CYCLING_EQ1),
        ("full-matrix", report.fullmatrix_bound, CYCLING_EQ3),
        ("adagrad", report.adagrad_bound, eq4),
    ] {
        if (got - want).abs() > 1e-9 * want {
            fail!("{name} bound {got} differs from golden {want}");
        }
    }
    if !(report.adagrad_bound < report.l2_bound && report.adagrad_bound < report.fullmatrix_bound) {
        fail!("ordering violated: {report:?}");
    }
    let mut learner = VaryingNormLearner::with_kind(ScheduleKind::AdagradRoot, 100)?;
    let records = experiments::harness::run_linear(&mut learner, &stream)?;
    let regret: f64 = records
        .iter()
        .map(|r| r.g.dot(&r.w.sub(&stream.comparator)))
        .sum();
    if regret > 4.0 * eq4 {
        fail!("adagrad_root regret {regret:.4} exceeds 4·{eq4:.4}");
    }
    Ok(format!(
        "bounds {:.4}/{:.4}/{:.4}, adagrad_root regret {regret:.4} ≤ {:.4}",
        report.l2_bound,
        report.fullmatrix_bound,
        report.adagrad_bound,
        4.0 * eq4
    ))
}

fn scale_deviation(
    learner: &str,
    d: usize,
    loss: &str,
    rescale: &str,
    seed: u64,
) -> Result<f64, Box<dyn Error>> {
    let text = format!(
        "generator = supervised\nd = {d}\nT = 500\nseed = {seed}\nloss = {loss}\nrescale = {rescale}\nlearner = {learner}\n"
    );
    let config = ExperimentConfig::parse(&text)?;
    Ok(experiments::scale_test(&config)?.max_relative_deviation)
}

fn criterion_scale_invariance() -> Check {
    let mut diag = 0.0f64;
    for seed in 1..=6u64 {
        let loss = if seed % 2 == 0 { "hinge" } else { "logistic" };
        let dev = scale_deviation("diag_scale", 8, loss, &format!("diag_random:{seed}"), seed)?;
        if dev > 1e-9 {
            fail!("diagonal rescale {seed}: relative deviation {dev:e} > 1e-9");
        }
        diag = diag.max(dev);
    }
    let mut full = 0.0f64;
    for seed in [5u64, 7, 9, 11] {
        let dev = scale_deviation(
            "maxquad_scale",
            4,
            "logistic",
            &format!("full_random:{seed}"),
            seed,
        )?;
        if dev > 1e-5 {
            fail!("full rescale {seed}: relative deviation {dev:e} > 1e-5");
        }
        full = full.max(dev);
    }
    Ok(format!("diagonal {diag:.2e}, full {full:.2e}"))
}

fn check_eigen(rng: &mut ChaCha8Rng) -> Result<(f64, f64), Box<dyn Error>> {
    let d = rng.random_range(2..=10usize);
    let scale = 10f64.powf(rng.random_range(-3.0..=3.0));
    let m = if rng.random::<bool>() {
        let data = (0..d * d)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        symmetric(d, data)
    } else {
        // repeated eigenvalues
        let values: Vec<f64> = (0..d)
            .map(|i| scale * f64::from((i % 3) as u8) - scale)
            .collect();
        with_spectrum(&values, rng)
    };
    let eig = linalg::sym_eigen(&m)?;
    let mut recon = vec![0.0; d * d];
    let mut gram = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            recon[i * d + j] = (0..d)
                .map(|k| eig.q(i, k) * eig.eigenvalues()[k] * eig.q(j, k))
                .sum::<f64>()
                - m.get(i, j);
            gram[i * d + j] = (0..d).map(|k| eig.q(k, i) * eig.q(k, j)).sum::<f64>()
                - if i == j { 1.0 } else { 0.0 };
        }
    }
    Ok((
        frobenius(&recon) / m.frobenius_norm().max(1.0),
        frobenius(&gram),
    ))
}

fn check_sqrt(rng: &mut ChaCha8Rng) -> Result<f64, Box<dyn Error>> {
    let d = rng.random_range(2..=10usize);
    let rank = rng.random_range(1..=d);
    let scale = 10f64.powf(rng.random_range(-3.0..=3.0));
    let b: Vec<f64> = (0..d * rank)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut data = vec![0.0; d * d];
    for i in 0..d {
        for j in i..d {
            data[i * d + j] = (0..rank).map(|k| b[i * rank + k] * b[j * rank + k]).sum();
        }
    }
    let m = symmetric(d, data);
    let root = linalg::psd_sqrt(&m)?;
    let square = matmul(root.as_slice(), root.as_slice(), d);
    let diff: Vec<f64> = square
        .iter()
        .zip(m.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    Ok(frobenius(&diff) / m.frobenius_norm())
}

fn random_pd(d: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let values: Vec<f64> = (0..d)
        .map(|_| 10f64.powf(rng.random_range(-1.0..=1.0)))
        .collect();
    with_spectrum(&values, rng)
}

/// Stationarity residual of the Mahalanobis ball projection.
fn check_kkt(rng: &mut ChaCha8Rng) -> Result<f64, Box<dyn Error>> {
    let d = rng.random_range(2..=8usize);
    let m = random_pd(d, rng);
    let radius = rng.random_range(0.1..=3.0);
    let v = unit_vector(d, rng).scaled(radius * rng.random_range(1.5..=20.0));
    let w = mahalanobis_project(&m, &v, &Domain::l2_ball(radius)?)?;
    let feasibility = (w.norm2() - radius).abs() / radius;
    if feasibility > 1e-10 {
        fail!("projection misses the sphere by {feasibility:e}");
    }
    let pull = mat_vec(&m, &v.sub(&w));
    let lambda = dot(&pull, &w) / dot(&w, &w);
    if lambda < 0.0 {
        fail!("negative multiplier {lambda}");
    }
    let residual: Vec<f64> = pull
        .iter()
        .zip(w.iter())
        .map(|(p, x)| lambda * x - p)
        .collect();
    Ok(frobenius(&residual) / frobenius(&mat_vec(&m, &v)).max(1.0))
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let factor = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = ((row + 1)..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row * n + row];
    }
    x
}

/// Euclidean projection onto `{x : xᵀMx ≤ 1}` via `x = (I + μM)⁻¹z`.
fn project_ellipsoid(m: &SymMatrix, z: &[f64]) -> Vec<f64> {
    let d = z.len();
    if dot(z, &mat_vec(m, z)) <= 1.0 {
        return z.to_vec();
    }
    let at = |mu: f64| {
        let mut a = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] = mu * m.get(i, j) + if i == j { 1.0 } else { 0.0 };
            }
        }
        solve_dense(a, z.to_vec())
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while {
        let x = at(hi);
        dot(&x, &mat_vec(m, &x)) > 1.0
    } {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let x = at(mid);
        if dot(&x, &mat_vec(m, &x)) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    at(hi)
}

/// Accelerated projected gradient on `a xᵀMx + ⟨θ, x⟩` over `xᵀMx ≤ 1`.
fn projected_gradient(m: &SymMatrix, theta: &[f64], a: f64, lipschitz: f64) -> Vec<f64> {
    let d = theta.len();
    let mut x = vec![0.0; d];
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..100_000 {
        let grad: Vec<f64> = mat_vec(m, &y)
            .iter()
            .zip(theta)
            .map(|(my, th)| 2.0 * a * my + th)
            .collect();
        let step: Vec<f64> = y
            .iter()
            .zip(&grad)
            .map(|(v, g)| v - g / lipschitz)
            .collect();
        let next = project_ellipsoid(m, &step);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let moved = next
            .iter()
            .zip(&x)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        y = next
            .iter()
            .zip(&x)
            .map(|(p, q)| p + (t - 1.0) / t_next * (p - q))
            .collect();
        x = next;
        t = t_next;
        if moved <= 1e-14 {
            break;
        }
    }
    x
}

fn check_ftrl_argmin(rng: &mut ChaCha8Rng) -> Result<f64, Box<dyn Error>> {
    let d = 5;
    let values: Vec<f64> = (0..d)
        .map(|_| 10f64.powf(rng.random_range(-1.0..=1.0)))
        .collect();
    let m = with_spectrum(&values, rng);
    let norm = QuadraticSeminorm::new(m.clone())?;
    let sigma = rng.random_range(0.1..=1.0);
    let theta = unit_vector(d, rng).scaled(10f64.powf(rng.random_range(-1.5..=1.5)));
    let mut ftrl = FtrlState::new(d, sigma)?;
    ftrl.observe(&theta, rng.random_range(0.0..=1.0))?;
    let closed = ftrl.step_in(NormView::Quadratic(&norm))?;
    let a = ftrl.scale();
    let lambda_max = values.iter().fold(0.0f64, |x, y| x.max(*y));
    let numeric = projected_gradient(&m, &theta, a, 2.0 * a * lambda_max);
    let diff: Vec<f64> = closed.iter().zip(&numeric).map(|(p, q)| p - q).collect();
    Ok(dot(&diff, &mat_vec(&m, &diff)).max(0.0).sqrt())
}

fn criterion_linalg() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4000);
    let (mut recon, mut orth) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let (r, o) = check_eigen(&mut rng)?;
        recon = recon.max(r);
        orth = orth.max(o);
    }
    if recon > 1e-10 || orth > 1e-10 {
        fail!("eigendecomposition reconstruction {recon:e}, orthogonality {orth:e}");
    }
    let mut sqrt = 0.0f64;
    for _ in 0..1000 {
        sqrt = sqrt.max(check_sqrt(&mut rng)?);
    }
    if sqrt > 1e-10 {
        fail!("PSD square root multiply-back {sqrt:e}");
    }
    let mut kkt = 0.0f64;
    for _ in 0..500 {
        kkt = kkt.max(check_kkt(&mut rng)?);
    }
    if kkt > 1e-8 {
        fail!("projection stationarity residual {kkt:e}");
    }
    let mut argmin = 0.0f64;
    for _ in 0..100 {
        argmin = argmin.max(check_ftrl_argmin(&mut rng)?);
    }
    if argmin > 1e-6 {
        fail!("FTRL closed form differs from projected gradient by {argmin:e}");
    }
    let secs = within(start, Duration::from_secs(30), "linear-algebra oracles")?;
    Ok(format!(
        "eigen {recon:.1e}/{orth:.1e}, sqrt {sqrt:.1e}, kkt {kkt:.1e}, argmin {argmin:.1e}, {secs:.2}s"
    ))
}

fn criterion_determinism() -> Check {
    let dir = tempfile::tempdir()?;
    let configs = [
        "generator = gaussian\nd = 6\nT = 300\nseed = 11\nlearner = varying_norm\nschedule = full_matrix\ndomain = l2_ball:2\noutput_format = csv\n",
        "generator = supervised\nd = 3\nT = 120\nseed = 5\nloss = logistic\nlearner = maxquad_scale\noutput_format = csv\n",
    ];
    let mut bytes = 0;
    for (i, text) in configs.iter().enumerate() {
        let path = dir.path().join(format!("run{i}.cfg"));
        std::fs::write(&path, text)?;
        let run = || -> Result<Vec<u8>, Box<dyn Error>> {
            let out = Command::new(env!("CARGO_BIN_EXE_varinorm"))
                .arg("run")
                .arg(&path)
                .env_remove("VARINORM_SEED")
                .output()?;
            if !out.status.success() {
                fail!("run {i} failed: {}", String::from_utf8_lossy(&out.stderr));
            }
            Ok(out.stdout)
        };
        let first = run()?;
        let second = run()?;
        if first.is_empty() || first != second {
            fail!("config {i}: outputs differ or are empty");
        }
        bytes += first.len();
    }
    Ok(format!(
        "{} configs, {bytes} identical bytes",
        configs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("coin-betting regret bound", criterion_coin_betting),
        (
            "FTRL feasibility and regret inequality",
            criterion_ftrl_lemma,
        ),
        ("constrained learner regret envelope", criterion_envelope),
        ("potential sums", criterion_potentials),
        ("cycling adversary bound ordering", criterion_cycling),
        ("scale invariance", criterion_scale_invariance),
        ("linear-algebra oracles", criterion_linalg),
        ("deterministic CSV output", criterion_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(err) => {
                failed += 1;
                println!("FAIL {} {name}: {err}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
