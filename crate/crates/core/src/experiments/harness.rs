use serde::{Deserialize, Serialize};

use crate::baselines::{self, AdagradFtrl, BoundReport, OgdAdaptive};
use crate::error::{Error, Result};
use crate::learner::{supervised_step, OnlineLearner};
use crate::linalg::{DenseVector, SymMatrix};
use crate::norm_schedule::{NormSchedule, ScheduleKind};
use crate::reduction::{DiagScaleLearner, Domain, LearnerConfig, VaryingNormLearner};

use super::config::{Eta, ExperimentConfig, GeneratorSpec, LearnerSpec};
use super::generators::{self, LinearStream, SupervisedStream};

pub const DESIGNATED: &str = "designated";
pub const HINDSIGHT: &str = "hindsight";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparator {
    pub id: String,
    pub point: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: usize,
    pub inner_product_gw: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_product_fw: Option<f64>,
    /// Cumulative regret against each comparator, in comparator order.
    pub cum_regret: Vec<f64>,
    pub bound_l2: f64,
    pub bound_fullmatrix: f64,
    pub bound_adagrad: f64,
}

/// Per-round record of a run plus the bound report of the full stream against
/// the designated comparator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub learner: String,
    pub dim: usize,
    pub comparators: Vec<Comparator>,
    pub rows: Vec<TraceRow>,
    pub gradients: Vec<Vec<f64>>,
    pub report: BoundReport,
}

/// Realized regret against the designated comparator relative to each bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub rounds: usize,
    pub regret: f64,
    pub ratio_l2: f64,
    pub ratio_fullmatrix: f64,
    pub ratio_adagrad: f64,
}

impl RegretTrace {
    pub fn final_regret(&self) -> Vec<f64> {
        self.rows
            .last()
            .map(|r| r.cum_regret.clone())
            .unwrap_or_else(|| vec![0.0; self.comparators.len()])
    }

    pub fn summary(&self) -> Summary {
        let regret = self.final_regret().first().copied().unwrap_or(0.0);
        let ratio = |b: f64| if b > 0.0 { regret / b } else { f64::NAN };
        Summary {
            rounds: self.rows.len(),
            regret,
            ratio_l2: ratio(self.report.l2_bound),
            ratio_fullmatrix: ratio(self.report.fullmatrix_bound),
            ratio_adagrad: ratio(self.report.adagrad_bound),
        }
    }
}

/// One played round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub w: DenseVector,
    pub g: DenseVector,
    /// `⟨f_t, w_t⟩` on feature streams.
    pub margin: Option<f64>,
}

pub enum Stream {
    Linear(LinearStream),
    Supervised(SupervisedStream),
}

impl Stream {
    pub fn generate(spec: &GeneratorSpec) -> Result<Self> {
        Ok(match spec {
            GeneratorSpec::CyclingAdversary {
                d,
                k,
                rotation_seed,
            } => Stream::Linear(generators::cycling_adversary(*d, *k, *rotation_seed)?),
            GeneratorSpec::Gaussian { d, rounds, seed } => {
                Stream::Linear(generators::gaussian(*d, *rounds, *seed)?)
            }
            GeneratorSpec::Supervised {
                d,
                rounds,
                seed,
                loss,
                rescale,
            } => Stream::Supervised(generators::supervised(
                *d,
                *rounds,
                *seed,
                *loss,
                rescale.as_ref(),
            )?),
        })
    }

    pub fn comparator(&self) -> &DenseVector {
        match self {
            Stream::Linear(s) => &s.comparator,
            Stream::Supervised(s) => &s.comparator,
        }
    }
}

/// Plays a fixed gradient sequence.
pub fn run_linear(
    learner: &mut dyn OnlineLearner,
    stream: &LinearStream,
) -> Result<Vec<RoundRecord>> {
    stream
        .gradients
        .iter()
        .map(|g| {
            let w = learner.predict()?;
            learner.update(g)?;
            Ok(RoundRecord {
                w,
                g: g.clone(),
                margin: None,
            })
        })
        .collect()
}

/// Plays a feature stream, deriving each gradient from the learner's margin.
pub fn run_supervised(
    learner: &mut dyn OnlineLearner,
    stream: &SupervisedStream,
) -> Result<Vec<RoundRecord>> {
    stream
        .features
        .iter()
        .enumerate()
        .map(|(t, f)| {
            let step = supervised_step(learner, f, |z| stream.derivative(t, z))?;
            Ok(RoundRecord {
                w: step.w,
                g: step.gradient,
                margin: Some(step.margin),
            })
        })
        .collect()
}

pub fn build_learner(config: &ExperimentConfig, stream: &Stream) -> Result<Box<dyn OnlineLearner>> {
    let dim = config.generator.dim();
    let learner_config = LearnerConfig {
        epsilon: config.epsilon,
        sigma: None,
    };
    Ok(match config.learner {
        LearnerSpec::VaryingNorm(ScheduleKind::DiagScale) => {
            Box::new(DiagScaleLearner::new(dim, learner_config)?)
        }
        LearnerSpec::VaryingNorm(kind) => Box::new(VaryingNormLearner::new(
            NormSchedule::new(kind, dim)?,
            config.domain,
            learner_config,
        )?),
        LearnerSpec::Ogd { diameter } => Box::new(OgdAdaptive::new(dim, diameter, config.domain)?),
        LearnerSpec::Adagrad { eta } => {
            let eta = match (eta, stream) {
                (Eta::Fixed(e), _) => e,
                (Eta::Oracle, Stream::Linear(s)) => {
                    let mut gram = SymMatrix::zeros(dim);
                    for g in &s.gradients {
                        gram.add_outer(g)?;
                    }
                    baselines::oracle_eta(&gram, &s.comparator)?
                }
                (Eta::Oracle, Stream::Supervised(_)) => {
                    return Err(Error::Config(
                        "oracle learning rate is unavailable on supervised streams".into(),
                    ))
                }
            };
            Box::new(AdagradFtrl::new(dim, eta, config.domain)?)
        }
    })
}

fn hindsight(domain: &Domain, gradients: &[DenseVector], dim: usize) -> Option<DenseVector> {
    let Domain::L2Ball { radius } = *domain else {
        return None;
    };
    let mut total = DenseVector::zeros(dim);
    for g in gradients {
        total.axpy(1.0, g);
    }
    let n = total.norm2();
    Some(if n > 0.0 {
        total.scaled(-radius / n)
    } else {
        total
    })
}

/// Builds the trace of a finished run.
pub fn trace_from_records(
    learner: String,
    dim: usize,
    comparator: &DenseVector,
    domain: &Domain,
    records: &[RoundRecord],
) -> Result<RegretTrace> {
    let gradients: Vec<DenseVector> = records.iter().map(|r| r.g.clone()).collect();
    let mut comparators = vec![(DESIGNATED.to_string(), comparator.clone())];
    if let Some(h) = hindsight(domain, &gradients, dim) {
        comparators.push((HINDSIGHT.to_string(), h));
    }

    let mut gram = SymMatrix::zeros(dim);
    let mut loss = 0.0;
    let mut comparator_loss = vec![0.0; comparators.len()];
    let mut rows = Vec::with_capacity(records.len());
    for (t, r) in records.iter().enumerate() {
        let gw = r.g.dot(&r.w);
        loss += gw;
        for (acc, (_, u)) in comparator_loss.iter_mut().zip(&comparators) {
            *acc += r.g.dot(u);
        }
        gram.add_outer(&r.g)?;
        let report = baselines::bound_report_from_gram(&gram, comparator)?;
        rows.push(TraceRow {
            round: t + 1,
            inner_product_gw: gw,
            inner_product_fw: r.margin,
            cum_regret: comparator_loss.iter().map(|c| loss - c).collect(),
            bound_l2: report.l2_bound,
            bound_fullmatrix: report.fullmatrix_bound,
            bound_adagrad: report.adagrad_bound,
        });
    }
    let report = baselines::bound_report(&gradients, comparator)?;
    Ok(RegretTrace {
        learner,
        dim,
        comparators: comparators
            .into_iter()
            .map(|(id, u)| Comparator {
                id,
                point: u.into_vec(),
            })
            .collect(),
        rows,
        gradients: gradients.into_iter().map(DenseVector::into_vec).collect(),
        report,
    })
}

fn play(config: &ExperimentConfig, stream: &Stream) -> Result<Vec<RoundRecord>> {
    let mut learner = build_learner(config, stream)?;
    match stream {
        Stream::Linear(s) => run_linear(learner.as_mut(), s),
        Stream::Supervised(s) => run_supervised(learner.as_mut(), s),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RegretTrace> {
    let stream = Stream::generate(&config.generator)?;
    let records = play(config, &stream)?;
    trace_from_records(
        config.learner.to_string(),
        config.generator.dim(),
        stream.comparator(),
        &config.domain,
        &records,
    )
}

/// Margins below this fraction of the largest margin in either run are
/// treated as zero when comparing runs; margins that vanish in exact
/// arithmetic are pure roundoff and have no meaningful relative error.
pub const ZERO_MARGIN_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleTestReport {
    pub rounds: usize,
    /// Largest `|a − b| / max(|a|, |b|, ν)` over rounds, where
    /// `ν = ZERO_MARGIN_FLOOR · max_t |margin|`.
    pub max_relative_deviation: f64,
    /// `max_t |a_t − b_t| / max_t |a_t|` over the whole sequence.
    pub sequence_deviation: f64,
}

/// `|a − b| / max(|a|, |b|, floor)`, with `0/0 = 0`.
pub fn relative_deviation(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compares two margin sequences as reported by [`scale_test`].
pub fn compare_margins(a: &[f64], b: &[f64]) -> ScaleTestReport {
    let peak = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = ZERO_MARGIN_FLOOR * peak;
    let max_relative_deviation = a
        .iter()
        .zip(b)
        .map(|(x, y)| relative_deviation(*x, *y, floor))
        .fold(0.0, f64::max);
    let largest_gap = a
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    ScaleTestReport {
        rounds: a.len().min(b.len()),
        max_relative_deviation,
        sequence_deviation: if peak == 0.0 { 0.0 } else { largest_gap / peak },
    }
}

/// Runs the configured supervised stream with and without its `rescale` and
/// compares the margins `⟨f_t, w_t⟩`.
pub fn scale_test(config: &ExperimentConfig) -> Result<ScaleTestReport> {
    let GeneratorSpec::Supervised {
        d,
        rounds,
        seed,
        loss,
        rescale: Some(rescale),
    } = &config.generator
    else {
        return Err(Error::Config(
            "scaletest needs the supervised generator with a `rescale` key".into(),
        ));
    };
    let base = Stream::Supervised(generators::supervised(*d, *rounds, *seed, *loss, None)?);
    let twin = match &base {
        Stream::Supervised(s) => Stream::Supervised(s.rescaled(rescale)?),
        Stream::Linear(_) => unreachable!(),
    };
    let margins = |records: Vec<RoundRecord>| -> Vec<f64> {
        records.iter().map(|r| r.margin.unwrap_or(0.0)).collect()
    };
    let a = margins(play(config, &base)?);
    let b = margins(play(config, &twin)?);
    Ok(compare_margins(&a, &b))
}
