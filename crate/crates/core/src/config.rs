//! Run configuration: one TOML file describes the environment, the grid,
//! the training settings and the verification problem.
//!
//! ```toml
//! seed = 7
//! out_dir = "runs/pendulum"
//!
//! [environment]
//! name = "pendulum"
//! initial_box = [[-0.3, 0.3], [-1.0, 1.0]]
//!
//! [abstraction]
//! granularity = [0.01, 0.01]
//!
//! [verify]
//! initial_box = [[0.0, 0.01], [0.0, 0.01]]
//! perturbation = [0.0, 0.0]
//! propositions = ["upright := abs(theta) <= pi/2"]
//! formula = "G upright"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::abstraction::{Granularity, IntervalBox};
use crate::check::ReplayOptions;
use crate::env::{builtin, Environment};
use crate::error::{Error, Result};
use crate::ltl::{parse_ltl, Ltl, Propositions};
use crate::trainer::{MlpFitConfig, TrainConfig};
use crate::transformer::Perturbation;

pub const DEFAULT_THRESHOLD: u64 = 1_000_000;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_out_dir")]
    out_dir: PathBuf,
    environment: RawEnvironment,
    abstraction: RawAbstraction,
    #[serde(default)]
    train: Option<toml::Table>,
    #[serde(default)]
    mlp: Option<MlpFitConfig>,
    #[serde(default)]
    verify: Option<RawVerify>,
    #[serde(default)]
    sweep: Option<RawSweep>,
    #[serde(default)]
    simulate: Option<RawSimulate>,
}

fn default_seed() -> u64 {
    7
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    name: String,
    /// Linear model file for `platoon`, relative to the config file.
    platoon_config: Option<PathBuf>,
    /// Training start region; defaults to the environment's own.
    initial_box: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAbstraction {
    granularity: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    initial_box: Vec<[f64; 2]>,
    perturbation: Option<Vec<f64>>,
    #[serde(default = "default_threshold")]
    threshold: u64,
    #[serde(default)]
    propositions: Vec<String>,
    formula: String,
    #[serde(default)]
    replay: RawReplay,
}

fn default_threshold() -> u64 {
    DEFAULT_THRESHOLD
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReplay {
    samples: Option<usize>,
    repetitions: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    granularities: Vec<Vec<f64>>,
    #[serde(default = "default_eval_episodes")]
    eval_episodes: usize,
    eval_horizon: Option<usize>,
}

fn default_eval_episodes() -> usize {
    5
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    #[serde(default = "default_sim_steps")]
    steps: usize,
    start: Option<Vec<f64>>,
}

fn default_sim_steps() -> usize {
    200
}

/// Everything needed to verify one property.
#[derive(Clone, Debug)]
pub struct VerifySettings {
    pub initial_box: IntervalBox,
    pub perturbation: Perturbation,
    pub threshold: u64,
    pub propositions: Propositions,
    pub formula_text: String,
    pub formula: Ltl,
    pub replay: ReplayOptions,
}

#[derive(Clone, Debug)]
pub struct SweepSettings {
    pub granularities: Vec<Granularity>,
    pub eval_episodes: usize,
    pub eval_horizon: usize,
}

#[derive(Clone, Debug)]
pub struct SimulateSettings {
    pub steps: usize,
    pub start: Option<Vec<f64>>,
}

/// A validated run configuration. Every vector has been checked against
/// the environment's dimension.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub env: Environment,
    pub granularity: Granularity,
    pub train: TrainConfig,
    pub mlp: Option<MlpFitConfig>,
    pub verify: Option<VerifySettings>,
    pub sweep: Option<SweepSettings>,
    pub simulate: SimulateSettings,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parse config text; relative paths inside it resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))?;

        let env = match (raw.environment.name.as_str(), &raw.environment.platoon_config) {
            ("platoon", Some(p)) => Environment::platoon_from_file(&base.join(p))?,
            (_, Some(_)) => {
                return Err(Error::Config(
                    "environment.platoon_config is only valid for the platoon environment".into(),
                ))
            }
            (name, None) => builtin(name)?,
        };
        let n = env.dim();
        let env = match &raw.environment.initial_box {
            Some(b) => {
                check_len("environment.initial_box", n, b.len())?;
                env.with_initial_box(IntervalBox::from_pairs(b)?)?
            }
            None => env,
        };

        check_len("abstraction.granularity", n, raw.abstraction.granularity.len())?;
        let granularity = env.granularity(&raw.abstraction.granularity)?;

        let mut train: TrainConfig = match raw.train {
            Some(table) => {
                if table.contains_key("seed") {
                    return Err(Error::Config(
                        "train.seed is not allowed; set the top-level seed".into(),
                    ));
                }
                table
                    .try_into()
                    .map_err(|e| Error::Format(format!("config [train]: {e}")))?
            }
            None => TrainConfig::default(),
        };
        train.seed = raw.seed;
        train.validate()?;
        if train.default_action >= env.num_actions() {
            return Err(Error::Config(format!(
                "train.default_action {} is not an action of `{}`",
                train.default_action,
                env.name()
            )));
        }

        let verify = raw.verify.map(|v| verify_settings(v, &env, raw.seed)).transpose()?;

        let sweep = match raw.sweep {
            Some(s) => {
                let mut gs = Vec::with_capacity(s.granularities.len());
                for (i, d) in s.granularities.iter().enumerate() {
                    check_len(&format!("sweep.granularities[{i}]"), n, d.len())?;
                    gs.push(env.granularity(d)?);
                }
                Some(SweepSettings {
                    granularities: gs,
                    eval_episodes: s.eval_episodes,
                    eval_horizon: s.eval_horizon.unwrap_or(train.horizon),
                })
            }
            None => None,
        };

        let simulate = match raw.simulate {
            Some(s) => {
                if let Some(start) = &s.start {
                    check_len("simulate.start", n, start.len())?;
                    if !env.in_bounds(start) {
                        return Err(Error::Config("simulate.start lies outside the state bounds".into()));
                    }
                }
                SimulateSettings {
                    steps: s.steps,
                    start: s.start,
                }
            }
            None => SimulateSettings {
                steps: default_sim_steps(),
                start: None,
            },
        };

        Ok(RunConfig {
            seed: raw.seed,
            out_dir: raw.out_dir,
            env,
            granularity,
            train,
            mlp: raw.mlp,
            verify,
            sweep,
            simulate,
        })
    }

    /// Override the seed everywhere it is used.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.train.seed = seed;
        if let Some(v) = &mut self.verify {
            v.replay.seed = seed;
        }
    }

    pub fn verify_settings(&self) -> Result<&VerifySettings> {
        self.verify
            .as_ref()
            .ok_or_else(|| Error::Config("missing [verify] section".into()))
    }

    /// Start state for `simulate`: the configured one, else the center of
    /// the verification box, else the center of the training box.
    pub fn simulation_start(&self) -> Vec<f64> {
        if let Some(s) = &self.simulate.start {
            return s.clone();
        }
        let b = self.verify.as_ref().map_or(self.env.initial_box(), |v| &v.initial_box);
        b.intervals().iter().map(|iv| iv.mid()).collect()
    }
}

fn check_len(field: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::dims(field, expected, got))
    }
}

fn verify_settings(v: RawVerify, env: &Environment, seed: u64) -> Result<VerifySettings> {
    let n = env.dim();
    check_len("verify.initial_box", n, v.initial_box.len())?;
    let initial_box = IntervalBox::from_pairs(&v.initial_box)?;
    if !env.bounds().contains_box(&initial_box) {
        return Err(Error::Config(
            "verify.initial_box is not inside the state bounds".into(),
        ));
    }
    let perturbation = match v.perturbation {
        Some(e) => {
            check_len("verify.perturbation", n, e.len())?;
            Perturbation::new(e)?
        }
        None => Perturbation::zero(n),
    };
    if v.threshold == 0 {
        return Err(Error::Config("verify.threshold must be at least 1".into()));
    }
    let mut propositions = Propositions::new(env.variables());
    for decl in &v.propositions {
        propositions.declare(decl)?;
    }
    let formula = parse_ltl(&v.formula)?;
    propositions.resolve(&formula)?;
    let defaults = ReplayOptions::default();
    Ok(VerifySettings {
        initial_box,
        perturbation,
        threshold: v.threshold,
        propositions,
        formula_text: v.formula,
        formula,
        replay: ReplayOptions {
            samples: v.replay.samples.unwrap_or(defaults.samples),
            repetitions: v.replay.repetitions.unwrap_or(defaults.repetitions),
            seed,
        },
    })
}
