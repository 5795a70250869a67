//! TOML configuration files.
//!
//! A file holds one or more `[[experiment]]` tables and optional
//! `[[comparison]]` gates on the ratio of two experiments' slopes (entropy
//! checks contribute their estimate instead):
//!
//! ```toml
//! master_seed = 7
//!
//! [[experiment]]
//! name = "fair-coin"
//! kind = "lcs_law"
//! trials = 50
//! schedule = { log2_start = 8, log2_end = 16 }
//! source = { type = "iid", probs = [0.5, 0.5] }
//! encoder = { type = "identity" }
//! tolerance = { relative = 0.15 }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DimensionSpec, EncoderSpec, ExperimentKind, ExperimentPlan, Tolerance};
use crate::dynamics::{MapSpec, Observation, Point, SkewSystem, Start};
use crate::encoders::Weights;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::symbolic::{IidSource, MarkovSource, Source};

/// Default master seed when neither the file nor the command line sets one.
pub const DEFAULT_SEED: u64 = 20_240_229;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub master_seed: Option<u64>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
    #[serde(default, rename = "comparison")]
    pub comparisons: Vec<ComparisonConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: KindName,
    pub trials: Option<usize>,
    pub schedule: Option<ScheduleConfig>,
    /// Separates the trial seeds of experiments that should not be paired.
    #[serde(default)]
    pub seed_stream: u64,
    pub source: Option<SourceConfig>,
    pub encoder: Option<EncoderConfig>,
    pub weights: Option<Vec<u32>>,
    pub map: Option<MapConfig>,
    pub observation: Option<ObservationConfig>,
    pub start: Option<StartConfig>,
    pub system: Option<SystemConfig>,
    pub dimension: Option<DimensionConfig>,
    pub theory_limit: Option<f64>,
    pub tolerance: Option<ToleranceConfig>,
    #[serde(default)]
    pub expect_collapse: bool,
    /// Raw prefix length for the highest-score cross-check of scrabble runs.
    pub score_check_n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    LcsLaw,
    ScrabbleLaw,
    OrbitLaw,
    RandomOrbitLaw,
    EntropyCheck,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ScheduleConfig {
    Geometric { log2_start: u32, log2_end: u32 },
    Explicit { values: Vec<usize> },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Iid {
        probs: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        /// Initial distribution; the stationary one when omitted.
        initial: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EncoderConfig {
    Identity,
    ZeroInflation { epsilon: f64 },
    Stretch { weights: Vec<u32> },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapConfig {
    Times { m: u32 },
    Toral { matrix: [[i64; 2]; 2] },
    Perturbed { m: u32, epsilon: f64 },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservationConfig {
    Identity,
    Projection { coord: usize },
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    Collapse { lo: f64, hi: f64, c: f64 },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum StartConfig {
    /// `"uniform"`.
    Named(String),
    /// Fixed starting coordinates of the two orbits.
    Points { a: Vec<f64>, b: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    TwoThree,
    ToralPair {
        #[serde(default = "half")]
        q: f64,
        first: Option<[[i64; 2]; 2]>,
        second: Option<[[i64; 2]; 2]>,
    },
    Perturbed {
        #[serde(default = "two")]
        m: u32,
        epsilon: f64,
    },
}

fn half() -> f64 {
    0.5
}

fn two() -> u32 {
    2
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum DimensionConfig {
    Exact {
        value: f64,
    },
    Empirical {
        #[serde(default = "default_dimension_points")]
        points: usize,
        #[serde(default = "default_radii")]
        radii: usize,
    },
}

fn default_dimension_points() -> usize {
    100_000
}

fn default_radii() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub relative: Option<f64>,
    pub absolute: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    pub name: String,
    pub numerator: String,
    pub denominator: String,
    /// Expected ratio; leave unset and give `max_relative_change` to check
    /// that the two values agree.
    pub expected: Option<f64>,
    pub tolerance: Option<ToleranceConfig>,
    pub max_relative_change: Option<f64>,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.experiments.is_empty() {
            return Err(Error::Config("no [[experiment]] tables".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ConfigFile::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Validated plans, using `seed` in place of the file's master seed when
    /// given.
    pub fn plans(&self, seed: Option<u64>) -> Result<Vec<ExperimentPlan>> {
        let master = seed.or(self.master_seed).unwrap_or(DEFAULT_SEED);
        let mut names = std::collections::HashSet::new();
        self.experiments
            .iter()
            .map(|e| {
                if !names.insert(e.name.as_str()) {
                    return Err(Error::Config(format!("duplicate experiment name {:?}", e.name)));
                }
                e.to_plan(master)
            })
            .collect()
    }
}

fn cfg_err(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("experiment {name:?}: {msg}"))
}

impl ExperimentConfig {
    fn need<'a, T>(&self, field: &'a Option<T>, what: &str) -> Result<&'a T> {
        field
            .as_ref()
            .ok_or_else(|| cfg_err(&self.name, format!("missing `{what}`")))
    }

    pub fn to_plan(&self, master_seed: u64) -> Result<ExperimentPlan> {
        let symbolic = matches!(
            self.kind,
            KindName::LcsLaw | KindName::ScrabbleLaw | KindName::EntropyCheck
        );
        let trials = self.trials.unwrap_or(if symbolic { 50 } else { 20 });
        let schedule = match &self.schedule {
            Some(ScheduleConfig::Geometric { log2_start, log2_end }) => {
                if log2_start > log2_end || *log2_end > 40 {
                    return Err(cfg_err(&self.name, "bad geometric schedule"));
                }
                (*log2_start..=*log2_end).map(|e| 1usize << e).collect()
            }
            Some(ScheduleConfig::Explicit { values }) => values.clone(),
            None if symbolic => (8..=16).map(|e| 1usize << e).collect(),
            None => (10..=17).map(|e| 1usize << e).collect(),
        };
        let kind = match self.kind {
            KindName::LcsLaw => ExperimentKind::LcsLaw {
                source: self.source()?,
                encoder: self.encoder()?,
            },
            KindName::ScrabbleLaw => {
                let source = match self.source()? {
                    Source::Markov(m) => m,
                    Source::Iid(i) => i.to_markov(),
                };
                let weights = self.need(&self.weights, "weights")?;
                ExperimentKind::ScrabbleLaw {
                    source,
                    weights: Weights::new(weights.clone()).map_err(|e| cfg_err(&self.name, e))?,
                    score_check_n: self.score_check_n.unwrap_or(4096),
                }
            }
            KindName::OrbitLaw => {
                let map = self.map_spec()?;
                let observation = self.observation()?;
                let starts = self.starts(map.space())?;
                ExperimentKind::OrbitLaw {
                    map,
                    observation,
                    starts,
                }
            }
            KindName::RandomOrbitLaw => ExperimentKind::RandomOrbitLaw {
                system: self.system()?,
                dimension: match &self.dimension {
                    Some(DimensionConfig::Exact { value }) => DimensionSpec::Exact(*value),
                    Some(DimensionConfig::Empirical { points, radii }) => DimensionSpec::Empirical {
                        points: *points,
                        radii: *radii,
                    },
                    None => DimensionSpec::Default,
                },
            },
            KindName::EntropyCheck => ExperimentKind::EntropyCheck {
                source: self.source()?,
                encoder: self.encoder()?,
            },
        };
        let tolerance = match &self.tolerance {
            None => None,
            Some(t) => Some(t.to_tolerance().map_err(|e| cfg_err(&self.name, e))?),
        };
        ExperimentPlan::new(
            self.name.clone(),
            kind,
            trials,
            schedule,
            master_seed,
            self.seed_stream,
            self.theory_limit,
            tolerance,
            self.expect_collapse,
        )
    }

    fn source(&self) -> Result<Source> {
        let wrap = |e: Error| cfg_err(&self.name, e);
        Ok(match self.need(&self.source, "source")? {
            SourceConfig::Iid { probs } => Source::Iid(IidSource::new(probs.clone()).map_err(wrap)?),
            SourceConfig::Markov { transition, initial } => {
                let p = Matrix::from_rows(transition).map_err(wrap)?;
                let m = match initial {
                    Some(init) => MarkovSource::new(p, init.clone()),
                    None => MarkovSource::stationary(p),
                };
                Source::Markov(m.map_err(wrap)?)
            }
        })
    }

    fn encoder(&self) -> Result<EncoderSpec> {
        Ok(match self.encoder.as_ref().unwrap_or(&EncoderConfig::Identity) {
            EncoderConfig::Identity => EncoderSpec::Identity,
            EncoderConfig::ZeroInflation { epsilon } => {
                if !(0.0..1.0).contains(epsilon) {
                    return Err(cfg_err(
                        &self.name,
                        format!("epsilon must lie in [0, 1), got {epsilon}"),
                    ));
                }
                EncoderSpec::ZeroInflation { epsilon: *epsilon }
            }
            EncoderConfig::Stretch { weights } => {
                EncoderSpec::Stretch(Weights::new(weights.clone()).map_err(|e| cfg_err(&self.name, e))?)
            }
        })
    }

    fn map_spec(&self) -> Result<MapSpec> {
        let wrap = |e: Error| cfg_err(&self.name, e);
        match self.need(&self.map, "map")? {
            MapConfig::Times { m } => MapSpec::times(*m),
            MapConfig::Toral { matrix } => MapSpec::toral(*matrix),
            MapConfig::Perturbed { m, epsilon } => MapSpec::perturbed(MapSpec::times(*m).map_err(wrap)?, *epsilon),
        }
        .map_err(wrap)
    }

    fn observation(&self) -> Result<Observation> {
        let wrap = |e: Error| cfg_err(&self.name, e);
        Ok(
            match self.observation.as_ref().unwrap_or(&ObservationConfig::Identity) {
                ObservationConfig::Identity => Observation::Identity,
                ObservationConfig::Projection { coord } => Observation::Projection { coord: *coord },
                ObservationConfig::Affine { matrix, offset } => {
                    Observation::affine(matrix.clone(), offset.clone()).map_err(wrap)?
                }
                ObservationConfig::Collapse { lo, hi, c } => Observation::collapse(*lo, *hi, *c).map_err(wrap)?,
            },
        )
    }

    fn starts(&self, space: crate::dynamics::Space) -> Result<(Start, Start)> {
        match &self.start {
            None => Ok((Start::Uniform, Start::Uniform)),
            Some(StartConfig::Named(s)) if s == "uniform" => Ok((Start::Uniform, Start::Uniform)),
            Some(StartConfig::Named(s)) => Err(cfg_err(&self.name, format!("unknown start {s:?}"))),
            Some(StartConfig::Points { a, b }) => {
                let wrap = |e: Error| cfg_err(&self.name, e);
                Ok((
                    Start::At(Point::new(space, a).map_err(wrap)?),
                    Start::At(Point::new(space, b).map_err(wrap)?),
                ))
            }
        }
    }

    fn system(&self) -> Result<SkewSystem> {
        let wrap = |e: Error| cfg_err(&self.name, e);
        match self.need(&self.system, "system")? {
            SystemConfig::TwoThree => Ok(SkewSystem::two_three()),
            SystemConfig::ToralPair { q, first, second } => match (first, second) {
                (None, None) => SkewSystem::toral_pair(*q),
                (Some(a), Some(b)) => {
                    SkewSystem::bernoulli(*q, MapSpec::toral(*a).map_err(wrap)?, MapSpec::toral(*b).map_err(wrap)?)
                }
                _ => {
                    return Err(cfg_err(
                        &self.name,
                        "give both `first` and `second` matrices or neither",
                    ))
                }
            },
            SystemConfig::Perturbed { m, epsilon } => {
                SkewSystem::perturbed(MapSpec::perturbed(MapSpec::times(*m).map_err(wrap)?, *epsilon).map_err(wrap)?)
            }
        }
        .map_err(wrap)
    }
}

impl ToleranceConfig {
    fn to_tolerance(&self) -> Result<Tolerance> {
        match (self.relative, self.absolute) {
            (Some(r), None) if r >= 0.0 => Ok(Tolerance::Relative(r)),
            (None, Some(a)) if a >= 0.0 => Ok(Tolerance::Absolute(a)),
            _ => Err(Error::Config(
                "tolerance needs exactly one nonnegative `relative` or `absolute`".into(),
            )),
        }
    }
}

impl ComparisonConfig {
    pub(crate) fn tolerance(&self) -> Result<Option<Tolerance>> {
        self.tolerance.as_ref().map(|t| t.to_tolerance()).transpose()
    }
}
