//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Recognised keys:
//!
//! | key | values |
//! |-----|--------|
//! | `generator` | `cycling_adversary`, `gaussian`, `supervised` |
//! | `d`, `k`, `T`, `seed` | integers (`k` for the cycling adversary, `T` and `seed` otherwise) |
//! | `rotation_seed` | optional seed of a random basis for the cycling adversary |
//! | `loss` | `absolute`, `hinge`, `logistic` (supervised) |
//! | `rescale` | `diag:…`, `full:…`, `diag_random:<seed>`, `full_random:<seed>` (supervised) |
//! | `learner` | `varying_norm`, `ogd`, `adagrad`, `diag_scale`, `maxquad_scale` |
//! | `schedule` | norm schedule of `varying_norm` |
//! | `D` | OGD scale |
//! | `eta` | AdaGrad learning rate, a number or `oracle` |
//! | `domain` | `whole_space`, `l2_ball:<r>`, `interval:<lo>,<hi>` |
//! | `epsilon` | initial wealth, default 1 |
//! | `output_path` | file to write; standard output when absent |
//! | `output_format` | `csv` (default) or `json` |
//!
//! The `VARINORM_SEED` environment variable overrides `seed`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::norm_schedule::ScheduleKind;
use crate::reduction::Domain;

use super::generators::{cycling_length, LossKind, Rescale};

pub const SEED_ENV: &str = "VARINORM_SEED";

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    CyclingAdversary {
        d: usize,
        k: usize,
        rotation_seed: Option<u64>,
    },
    Gaussian {
        d: usize,
        rounds: usize,
        seed: u64,
    },
    Supervised {
        d: usize,
        rounds: usize,
        seed: u64,
        loss: LossKind,
        rescale: Option<Rescale>,
    },
}

impl GeneratorSpec {
    pub fn dim(&self) -> usize {
        match *self {
            GeneratorSpec::CyclingAdversary { d, .. }
            | GeneratorSpec::Gaussian { d, .. }
            | GeneratorSpec::Supervised { d, .. } => d,
        }
    }

    pub fn is_supervised(&self) -> bool {
        matches!(self, GeneratorSpec::Supervised { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Eta {
    Fixed(f64),
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LearnerSpec {
    VaryingNorm(ScheduleKind),
    Ogd { diameter: f64 },
    Adagrad { eta: Eta },
}

impl LearnerSpec {
    pub fn needs_features(&self) -> bool {
        matches!(self, LearnerSpec::VaryingNorm(k) if k.needs_features())
    }
}

impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerSpec::VaryingNorm(k) if k.needs_features() => write!(f, "{k}"),
            LearnerSpec::VaryingNorm(k) => write!(f, "varying_norm({k})"),
            LearnerSpec::Ogd { diameter } => write!(f, "ogd(D={diameter})"),
            LearnerSpec::Adagrad { eta: Eta::Fixed(e) } => write!(f, "adagrad(eta={e})"),
            LearnerSpec::Adagrad { eta: Eta::Oracle } => write!(f, "adagrad(eta=oracle)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Config(format!("unknown output format `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    pub learner: LearnerSpec,
    pub domain: Domain,
    pub epsilon: f64,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

const KEYS: &[&str] = &[
    "generator",
    "d",
    "k",
    "T",
    "seed",
    "rotation_seed",
    "loss",
    "rescale",
    "learner",
    "schedule",
    "D",
    "eta",
    "domain",
    "epsilon",
    "output_path",
    "output_format",
];

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }

    fn parse_required<T: FromStr>(&self, key: &str) -> Result<T> {
        self.require(key)?;
        Ok(self.parse(key)?.expect("checked above"))
    }

    fn reject(&self, keys: &[&str], context: &str) -> Result<()> {
        for key in keys {
            if self.get(key).is_some() {
                return Err(Error::Config(format!(
                    "key `{key}` does not apply to {context}"
                )));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", number + 1))
            })?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!(
                    "line {}: unknown key `{key}`",
                    number + 1
                )));
            }
            if entries
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    number + 1
                )));
            }
        }
        Self::from_entries(Entries(entries))
    }

    /// Reads a file and applies the `VARINORM_SEED` override.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        if let Ok(seed) = std::env::var(SEED_ENV) {
            config.override_seed(&seed)?;
        }
        Ok(config)
    }

    pub fn override_seed(&mut self, value: &str) -> Result<()> {
        let parsed = value
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("invalid {SEED_ENV} `{value}`")))?;
        match &mut self.generator {
            GeneratorSpec::Gaussian { seed, .. } | GeneratorSpec::Supervised { seed, .. } => {
                *seed = parsed;
            }
            GeneratorSpec::CyclingAdversary { .. } => {}
        }
        Ok(())
    }

    fn from_entries(e: Entries) -> Result<Self> {
        let d: usize = e.parse_required("d")?;
        let generator = match e.require("generator")? {
            "cycling_adversary" => {
                e.reject(&["seed", "loss", "rescale"], "the cycling adversary")?;
                let k: usize = e.parse_required("k")?;
                if let Some(t) = e.parse::<usize>("T")? {
                    let expected = cycling_length(d, k);
                    if t != expected {
                        return Err(Error::Config(format!(
                            "cycling adversary with d = {d}, k = {k} has T = {expected}, got {t}"
                        )));
                    }
                }
                GeneratorSpec::CyclingAdversary {
                    d,
                    k,
                    rotation_seed: e.parse("rotation_seed")?,
                }
            }
            "gaussian" => {
                e.reject(
                    &["k", "rotation_seed", "loss", "rescale"],
                    "the gaussian generator",
                )?;
                GeneratorSpec::Gaussian {
                    d,
                    rounds: e.parse_required("T")?,
                    seed: e.parse_required("seed")?,
                }
            }
            "supervised" => {
                e.reject(&["k", "rotation_seed"], "the supervised generator")?;
                GeneratorSpec::Supervised {
                    d,
                    rounds: e.parse_required("T")?,
                    seed: e.parse_required("seed")?,
                    loss: e.parse_required("loss")?,
                    rescale: e.parse("rescale")?,
                }
            }
            other => return Err(Error::Config(format!("unknown generator `{other}`"))),
        };
        if d == 0 {
            return Err(Error::Config("d must be at least 1".into()));
        }

        let learner = match e.require("learner")? {
            "varying_norm" => {
                e.reject(&["D", "eta"], "varying_norm")?;
                LearnerSpec::VaryingNorm(e.parse_required("schedule")?)
            }
            "diag_scale" => {
                e.reject(&["schedule", "D", "eta"], "diag_scale")?;
                LearnerSpec::VaryingNorm(ScheduleKind::DiagScale)
            }
            "maxquad_scale" => {
                e.reject(&["schedule", "D", "eta"], "maxquad_scale")?;
                LearnerSpec::VaryingNorm(ScheduleKind::MaxQuadScale)
            }
            "ogd" => {
                e.reject(&["schedule", "eta", "epsilon"], "ogd")?;
                LearnerSpec::Ogd {
                    diameter: e.parse_required("D")?,
                }
            }
            "adagrad" => {
                e.reject(&["schedule", "D", "epsilon"], "adagrad")?;
                let eta = match e.require("eta")? {
                    "oracle" => Eta::Oracle,
                    _ => Eta::Fixed(e.parse_required("eta")?),
                };
                LearnerSpec::Adagrad { eta }
            }
            other => return Err(Error::Config(format!("unknown learner `{other}`"))),
        };
        if learner.needs_features() && !generator.is_supervised() {
            return Err(Error::Config(format!(
                "learner {learner} needs features and only runs on the supervised generator"
            )));
        }
        if learner == (LearnerSpec::Adagrad { eta: Eta::Oracle }) && generator.is_supervised() {
            return Err(Error::Config(
                "oracle learning rate needs the gradients in advance; supervised gradients depend on the learner"
                    .into(),
            ));
        }

        let domain: Domain = e
            .get("domain")
            .map(str::parse)
            .transpose()?
            .unwrap_or(Domain::WholeSpace);
        domain.check_dim(d)?;
        if learner.needs_features() && !domain.is_whole_space() {
            return Err(Error::Config(format!(
                "learner {learner} supports only whole_space"
            )));
        }
        let epsilon = e.parse("epsilon")?.unwrap_or(1.0);
        if !(epsilon > 0.0 && f64::is_finite(epsilon)) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            generator,
            learner,
            domain,
            epsilon,
            output_path: e.get("output_path").map(PathBuf::from),
            output_format: e.parse("output_format")?.unwrap_or_default(),
        })
    }
}
